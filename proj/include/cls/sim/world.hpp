#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cls/codec/command.hpp"
#include "cls/common/snapshot.hpp"
#include "cls/sim/config.hpp"

namespace cls::sim {

/// Ground-truth match state owned by the simulation thread.
struct SimWorld {
    int cycle = 0;
    PlayMode play_mode = PlayMode::before_kick_off();
    int score_left = 0;
    int score_right = 0;
    std::string team_left;
    std::string team_right;
    BallState ball;
    std::vector<PlayerState> players;  ///< ordered by (side, unum)
    std::uint64_t rng_seed = 1;

    // referee bookkeeping
    std::optional<Side> last_touch;
    int mode_since = 0;  ///< cycle at which play_mode was entered

    PlayerState* find(Side side, int unum);
    const PlayerState* find(Side side, int unum) const;

    /// Adds a player at its home position. Throws std::logic_error if the
    /// slot is taken.
    PlayerState& add_player(Side side, int unum, const SimConfig& cfg);

    void set_mode(PlayMode m) {
        play_mode = m;
        mode_since = cycle;
    }

    WorldSnapshot snapshot() const;
};

SimWorld make_world(const SimConfig& cfg);

/// Kick-off formation point for a uniform number, in the team's own frame
/// (own goal at x = -52.5).
Vec2 home_position(int unum);

/// Own-team frame to global frame and back (a point reflection for the
/// right team).
Vec2 to_global(Side side, Vec2 own);
double to_global_dir(Side side, double own_dir);

// ---- step ------------------------------------------------------------------

/// Who sent a command.
struct AgentId {
    AgentRole role = AgentRole::Player;
    Side side = Side::Left;
    int unum = 0;  ///< 1..11 for players, 0 otherwise
    bool operator==(const AgentId&) const = default;
    auto operator<=>(const AgentId&) const = default;
};

struct AgentCommand {
    AgentId agent;
    codec::Command command;
};

enum class EventKind {
    Goal,
    ModeChange,
    IllegalCommandForPlayMode,
    MultipleBodyCommands,
};

std::string_view event_kind_name(EventKind k);

struct Event {
    EventKind kind;
    AgentId agent;       ///< sender for rejections; scorer side for goals
    std::string detail;  ///< wire mode name, command name, ...
    bool operator==(const Event&) const = default;
};

struct StepReport {
    std::vector<Event> events;
    /// Players whose body command was accepted this step, ordered.
    std::vector<AgentId> body_applied;
    /// Say texts to deliver with the next observations.
    std::vector<std::pair<AgentId, std::string>> said;
};

/// Advances the world by one cycle. Commands are applied in (role, side,
/// unum) order, and within one agent in arrival order; the first body command
/// wins and later ones are rejected with an event. Trainer commands come
/// first. Motion, stamina and the position clamp follow. Does not judge play
/// modes; call referee_judge afterwards.
StepReport step_simulation(SimWorld& world, const std::vector<AgentCommand>& commands, const SimConfig& cfg);

/// Kick acceleration magnitude for a ball at `ball_rel` (relative to the
/// kicker, body frame rotated away) and kick power.
double kick_effective_power(double power, Vec2 ball_rel_body, const SimConfig& cfg);

/// Rounds a dash direction to the nearest multiple of 45 degrees.
double discretize_dash_dir(double dir);

/// Referee pass. Updates play_mode, scores and dead-ball placement; appends
/// events. Total: every reachable state yields a defined mode.
void referee_judge(SimWorld& world, const SimConfig& cfg, std::vector<Event>& events);

}  // namespace cls::sim
