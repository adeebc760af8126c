#include "cls/common/types.hpp"

#include <array>
#include <utility>

namespace cls {

std::optional<Side> side_from_char(std::string_view s) {
    if (s == "l") return Side::Left;
    if (s == "r") return Side::Right;
    return std::nullopt;
}

std::string_view role_name(AgentRole r) {
    switch (r) {
        case AgentRole::Player: return "player";
        case AgentRole::Coach: return "coach";
        case AgentRole::Trainer: return "trainer";
    }
    return "player";
}

namespace {

constexpr std::array<std::pair<PlayModeKind, std::string_view>, 8> kModeNames{{
    {PlayModeKind::BeforeKickOff, "before_kick_off"},
    {PlayModeKind::KickOff, "kick_off"},
    {PlayModeKind::PlayOn, "play_on"},
    {PlayModeKind::KickIn, "kick_in"},
    {PlayModeKind::GoalKick, "goal_kick"},
    {PlayModeKind::CornerKick, "corner_kick"},
    {PlayModeKind::Goal, "goal"},
    {PlayModeKind::TimeOver, "time_over"},
}};

}  // namespace

bool PlayMode::is_dead_ball() const {
    return kind == PlayModeKind::BeforeKickOff || kind == PlayModeKind::KickOff ||
           kind == PlayModeKind::KickIn || kind == PlayModeKind::GoalKick ||
           kind == PlayModeKind::CornerKick || kind == PlayModeKind::Goal ||
           kind == PlayModeKind::TimeOver;
}

bool PlayMode::is_valid() const { return kind_has_side(kind) == side.has_value(); }

std::string to_wire(const PlayMode& m) {
    std::string out;
    for (const auto& [k, name] : kModeNames) {
        if (k == m.kind) {
            out = name;
            break;
        }
    }
    if (m.side) {
        out += '_';
        out += side_char(*m.side);
    }
    return out;
}

std::optional<PlayMode> play_mode_from_wire(std::string_view s) {
    for (const auto& [k, name] : kModeNames) {
        if (kind_has_side(k)) {
            if (s.size() == name.size() + 2 && s.substr(0, name.size()) == name && s[name.size()] == '_') {
                if (auto side = side_from_char(s.substr(name.size() + 1))) return PlayMode{k, side};
            }
        } else if (s == name) {
            return PlayMode{k, std::nullopt};
        }
    }
    return std::nullopt;
}

PlayMode mirrored(const PlayMode& m) {
    PlayMode out = m;
    if (out.side) out.side = opposite(*out.side);
    return out;
}

}  // namespace cls
