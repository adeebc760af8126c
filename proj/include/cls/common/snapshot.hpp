#pragma once

#include <string>
#include <vector>

#include "cls/common/geometry.hpp"
#include "cls/common/types.hpp"

namespace cls {

struct BallState {
    Vec2 pos;
    Vec2 vel;
    bool operator==(const BallState&) const = default;
};

struct PlayerState {
    Side side = Side::Left;
    int unum = 0;
    Vec2 pos;
    Vec2 vel;
    double body_dir = 0.0;  ///< global, degrees
    double neck_dir = 0.0;  ///< relative to body, degrees
    double stamina = 0.0;
    double effort = 1.0;
    bool operator==(const PlayerState&) const = default;
};

/// Exact, observable state of a match at one cycle, in the global frame.
/// Carried by full-state observations and by replay records.
struct WorldSnapshot {
    int cycle = 0;
    PlayMode play_mode;
    int score_left = 0;
    int score_right = 0;
    std::string team_left;
    std::string team_right;
    BallState ball;
    std::vector<PlayerState> players;  ///< connected players, ordered by (side, unum)
    bool operator==(const WorldSnapshot&) const = default;
};

}  // namespace cls
