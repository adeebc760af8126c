#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cls {

enum class Side { Left, Right };

constexpr Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
constexpr char side_char(Side s) { return s == Side::Left ? 'l' : 'r'; }
std::optional<Side> side_from_char(std::string_view s);

enum class AgentRole { Player, Coach, Trainer };

std::string_view role_name(AgentRole r);

enum class PlayModeKind {
    BeforeKickOff,
    KickOff,
    PlayOn,
    KickIn,
    GoalKick,
    CornerKick,
    Goal,
    TimeOver,
};

/// Referee state. Kinds that name a team (kick-off, kick-in, goal kick, corner
/// kick, goal) carry the entitled side: for Goal it is the scoring side.
struct PlayMode {
    PlayModeKind kind = PlayModeKind::BeforeKickOff;
    std::optional<Side> side;

    static PlayMode before_kick_off() { return {PlayModeKind::BeforeKickOff, std::nullopt}; }
    static PlayMode play_on() { return {PlayModeKind::PlayOn, std::nullopt}; }
    static PlayMode time_over() { return {PlayModeKind::TimeOver, std::nullopt}; }
    static PlayMode of(PlayModeKind k, Side s) { return {k, s}; }

    bool operator==(const PlayMode&) const = default;

    /// Modes in which the ball stays put until the entitled team kicks.
    bool is_dead_ball() const;
    bool is_valid() const;
};

constexpr bool kind_has_side(PlayModeKind k) {
    return k == PlayModeKind::KickOff || k == PlayModeKind::KickIn || k == PlayModeKind::GoalKick ||
           k == PlayModeKind::CornerKick || k == PlayModeKind::Goal;
}

/// Wire names: before_kick_off, kick_off_l, play_on, kick_in_r, goal_kick_l,
/// corner_kick_r, goal_l, time_over.
std::string to_wire(const PlayMode& m);
std::optional<PlayMode> play_mode_from_wire(std::string_view s);

/// Same mode as seen from the other team (sides swapped).
PlayMode mirrored(const PlayMode& m);

}  // namespace cls
