#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cls/codec/server_message.hpp"
#include "cls/common/geometry.hpp"
#include "cls/common/types.hpp"

namespace cls::world {

/// Physical constants the estimator needs. Populated from server_param.
struct WorldParams {
    double ball_decay = 0.94;
    double player_decay = 0.4;
    double player_speed_max = 1.05;
    double dash_power_rate = 0.006;
    double effort_max = 1.0;
    double kickable_area = 1.085;
    double kick_power_rate = 0.027;
    double ball_speed_max = 3.0;
    double max_neck_angle = 90.0;
    double inertia_moment = 5.0;

    double confidence_decay = 0.95;
    int pose_valid_age = 5;       ///< cycles a dead-reckoned pose stays valid
    double turn_threshold = 15.0; ///< degrees
    int intercept_horizon = 200;

    double dash_accel() const { return 100.0 * dash_power_rate * effort_max; }

    /// Overrides the fields present in a server_param map.
    void apply(const codec::ParamMap& m);

    bool operator==(const WorldParams&) const = default;
};

struct PoseEstimate {
    Vec2 pos;
    double body_dir = 0.0;  ///< degrees
    double neck_dir = 0.0;  ///< relative to body
    double pos_error = 0.0; ///< meters, RMS distance residual of the fix
    bool valid = false;
    bool operator==(const PoseEstimate&) const = default;
};

struct TrackedObject {
    Vec2 pos;
    Vec2 vel;
    double confidence = 0.0;
    int last_seen_cycle = -1;        ///< -1: never seen
    Vec2 seen_pos;                   ///< position at the last sighting
    std::optional<double> body_dir;  ///< players only, when observable
    bool seen() const { return last_seen_cycle >= 0; }
    bool operator==(const TrackedObject&) const = default;
};

/// Minimal cycles to reach the ball per player; nullopt is unreachable or
/// never seen.
struct InterceptTable {
    std::array<std::optional<int>, 11> ours{};
    std::array<std::optional<int>, 11> theirs{};
    std::optional<int> self_cycles;
    std::optional<int> fastest_ours;    ///< unum
    std::optional<int> fastest_theirs;  ///< unum
    bool operator==(const InterceptTable&) const = default;
};

/// An agent's estimate of the match. All positions and directions are in the
/// team-normalized frame: own goal at x = -52.5 whichever side we play.
struct WorldState {
    int cycle = 0;
    Side our_side = Side::Left;
    AgentRole role = AgentRole::Player;
    int self_unum = 0;
    std::string our_team;
    std::string their_team;

    PoseEstimate self;
    Vec2 self_vel;
    double stamina = 0.0;
    double effort = 1.0;
    Vec2 sensed_speed;        ///< last sense_body speed, face-relative
    int last_fix_cycle = -1;  ///< cycle of the last fresh self-localization

    TrackedObject ball;
    /// Displacement between the last two consecutive ball sightings (the
    /// ball's velocity before decay on the earlier cycle).
    std::optional<Vec2> ball_displacement;
    std::array<TrackedObject, 11> teammates{};
    std::array<TrackedObject, 11> opponents{};

    PlayMode play_mode;  ///< Left means us
    int our_score = 0;
    int their_score = 0;

    InterceptTable intercept;
    bool full_state = false;  ///< last observation was a full-state snapshot
    int stale_messages = 0;
    std::vector<codec::HearMsg> heard;  ///< verbatim, current cycle only

    WorldParams params;

    bool operator==(const WorldState&) const = default;
};

// ---- localization ------------------------------------------------------------

struct LocalizeInput {
    std::vector<codec::ObservedObject> landmarks;  ///< flags and goals, global names
    PoseEstimate prior;                            ///< global frame
    Vec2 last_velocity;                            ///< global frame
    int prior_age = 0;                             ///< cycles since the prior's fix
    int valid_age = 5;                             ///< dead-reckoned poses expire after this
};

/// Self pose in the global frame. With two or more landmarks: closed-form
/// rigid alignment of the observed relative positions, refined by weighted
/// Gauss-Newton on the distance residuals; face direction from the bearings
/// of up to three nearest landmarks. With fewer: dead reckoning from the prior.
PoseEstimate localize(const LocalizeInput& in);

// ---- prediction and interception --------------------------------------------

/// pos + vel * (1 - decay^n) / (1 - decay).
Vec2 predict_ball_position(const TrackedObject& ball, int n, double ball_decay);

struct Mover {
    Vec2 pos;
    std::optional<double> body_dir;
};

/// Furthest distance a player starting at rest covers in t cycles, ignoring
/// turning.
double reachable_distance(int t, const WorldParams& p);

/// Smallest t in [0, horizon] at which the player can be within kickable
/// area of the predicted ball; nullopt if none.
std::optional<int> intercept_cycles(const Mover& player, const TrackedObject& ball, const WorldParams& p);

/// Applies intercept_cycles to every seen player of both teams and to self.
InterceptTable build_intercept_table(const WorldState& ws);

// ---- observation integration --------------------------------------------------

WorldState make_world_state(AgentRole role, const std::string& team, const WorldParams& params = {});

/// Folds one server message into the estimate. Messages older than the
/// current cycle are counted in stale_messages and otherwise ignored. The
/// intercept table is rebuilt after see and fullstate.
void integrate_observation(WorldState& ws, const codec::ServerMessage& msg);

/// Decays confidences and extrapolates objects up to `cycle`.
void advance_to(WorldState& ws, int cycle);

/// Global <-> team-normalized conversions.
Vec2 normalize_pos(Side our_side, Vec2 global);
double normalize_dir(Side our_side, double global_dir);

}  // namespace cls::world
