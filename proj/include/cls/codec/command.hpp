#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cls/codec/sexpr.hpp"
#include "cls/common/types.hpp"

namespace cls::codec {

inline constexpr double kMinPower = -100.0;
inline constexpr double kMaxPower = 100.0;
inline constexpr double kMinMoment = -180.0;
inline constexpr double kMaxMoment = 180.0;  ///< exclusive
inline constexpr int kProtocolVersion = 18;

/// Registration. Players send a team name; the trainer sends none.
struct InitCmd {
    std::string team;
    int version = kProtocolVersion;
    bool goalie = false;
    bool operator==(const InitCmd&) const = default;
};
struct MoveCmd {
    double x = 0.0, y = 0.0;
    bool operator==(const MoveCmd&) const = default;
};
struct DashCmd {
    double power = 0.0, dir = 0.0;
    bool operator==(const DashCmd&) const = default;
};
struct TurnCmd {
    double moment = 0.0;
    bool operator==(const TurnCmd&) const = default;
};
struct KickCmd {
    double power = 0.0, dir = 0.0;
    bool operator==(const KickCmd&) const = default;
};
struct TurnNeckCmd {
    double moment = 0.0;
    bool operator==(const TurnNeckCmd&) const = default;
};
struct SayCmd {
    std::string text;
    bool operator==(const SayCmd&) const = default;
};

struct BallTarget {
    bool operator==(const BallTarget&) const = default;
};
struct PlayerTarget {
    Side side = Side::Left;
    int unum = 1;
    bool operator==(const PlayerTarget&) const = default;
};

/// Trainer placement: `(move (ball) x y [vx vy])` or `(move (player l 7) x y [dir])`.
/// Coordinates are global.
struct TrainerMoveCmd {
    std::variant<BallTarget, PlayerTarget> target;
    double x = 0.0, y = 0.0;
    std::optional<double> vx, vy;  ///< ball only
    std::optional<double> dir;     ///< player only
    bool operator==(const TrainerMoveCmd&) const = default;
};
struct ChangeModeCmd {
    PlayMode play_mode;
    bool operator==(const ChangeModeCmd&) const = default;
};
/// Trainer: restore every player's stamina and effort.
struct RecoverCmd {
    bool operator==(const RecoverCmd&) const = default;
};
struct ByeCmd {
    bool operator==(const ByeCmd&) const = default;
};

using Command = std::variant<InitCmd, MoveCmd, DashCmd, TurnCmd, KickCmd, TurnNeckCmd, SayCmd, TrainerMoveCmd,
                             ChangeModeCmd, RecoverCmd, ByeCmd>;

/// Dash, turn, kick and move occupy the single per-cycle body slot.
bool is_body_command(const Command& c);

/// Throws CodecError(OutOfRangeField) if a field violates the command bounds.
void validate_command(const Command& c);

/// Canonical agent-side text with full numeric precision.
std::string encode_client_command(const Command& c);

/// Several commands in one datagram, concatenated without separators.
std::string encode_client_commands(const std::vector<Command>& cs);

/// Inverse of encode_client_command for a single command. Throws CodecError.
Command decode_client_command(std::string_view text);
Command decode_client_command(const SExpr& expr);

/// All commands in a datagram. Throws CodecError on the first bad one.
std::vector<Command> decode_client_commands(std::string_view text);

std::string_view command_name(const Command& c);

}  // namespace cls::codec
