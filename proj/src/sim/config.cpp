#include "cls/sim/config.hpp"

#include <cmath>
#include <stdexcept>

namespace cls::sim {

std::string_view observation_mode_name(ObservationMode m) {
    return m == ObservationMode::See ? "see" : "fullstate";
}

std::optional<ObservationMode> observation_mode_from_name(std::string_view s) {
    if (s == "see") return ObservationMode::See;
    if (s == "fullstate") return ObservationMode::FullState;
    return std::nullopt;
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid SimConfig: ") + what);
}

bool unit_open(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

void SimConfig::validate() const {
    require(unit_open(ball_decay), "ball_decay must be in (0,1)");
    require(unit_open(player_decay), "player_decay must be in (0,1)");
    require(unit_open(dash_power_rate), "dash_power_rate must be in (0,1)");
    require(unit_open(kick_power_rate), "kick_power_rate must be in (0,1)");
    require(unit_open(quantize_step), "quantize_step must be in (0,1)");
    require(player_speed_max > 0.0, "player_speed_max must be > 0");
    require(ball_speed_max > 0.0, "ball_speed_max must be > 0");
    require(stamina_max > 0.0, "stamina_max must be > 0");
    require(stamina_recovery >= 0.0, "stamina_recovery must be >= 0");
    require(player_size > 0.0 && ball_size > 0.0 && kickable_margin > 0.0, "sizes must be > 0");
    require(visible_angle > 0.0 && visible_angle <= 360.0, "visible_angle must be in (0,360]");
    require(pitch_length > 0.0 && pitch_width > 0.0 && goal_width > 0.0, "pitch dimensions must be > 0");
    require(cycle_ms > 0, "cycle_ms must be > 0");
    require(half_cycles > 0, "half_cycles must be > 0");
    require(before_kickoff_cycles >= 0 && goal_pause_cycles >= 0, "pause lengths must be >= 0");
    require(dead_ball_timeout > 0, "dead_ball_timeout must be > 0");
    require(effort_min > 0.0 && effort_min <= effort_max, "effort bounds");
    require(player_types >= 1, "player_types must be >= 1");
    require(inertia_moment >= 0.0, "inertia_moment must be >= 0");
}

codec::ServerParamMsg SimConfig::server_param_message() const {
    codec::ServerParamMsg m;
    auto& p = m.params;
    p["pitch_length"] = pitch_length;
    p["pitch_width"] = pitch_width;
    p["goal_width"] = goal_width;
    p["simulator_step"] = cycle_ms;
    p["half_time"] = half_cycles;
    p["ball_decay"] = ball_decay;
    p["player_decay"] = player_decay;
    p["dash_power_rate"] = dash_power_rate;
    p["kick_power_rate"] = kick_power_rate;
    p["player_speed_max"] = player_speed_max;
    p["ball_speed_max"] = ball_speed_max;
    p["inertia_moment"] = inertia_moment;
    p["player_size"] = player_size;
    p["ball_size"] = ball_size;
    p["kickable_margin"] = kickable_margin;
    p["kickable_area"] = kickable_area();
    p["max_neck_angle"] = max_neck_angle;
    p["visible_angle"] = visible_angle;
    p["quantize_step"] = quantize_step;
    p["stamina_max"] = stamina_max;
    p["stamina_inc_max"] = stamina_recovery;
    p["effort_max"] = effort_max;
    p["effort_min"] = effort_min;
    p["fullstate"] = observation_mode == ObservationMode::FullState ? 1.0 : 0.0;
    return m;
}

codec::PlayerParamMsg SimConfig::player_param_message() const {
    codec::PlayerParamMsg m;
    m.params["player_types"] = player_types;
    m.params["subs_max"] = subs_max;
    m.params["pt_max"] = player_types;
    return m;
}

codec::PlayerTypeMsg SimConfig::player_type_message(int id) const {
    // Heterogeneous players are not modelled: every type carries the default
    // physical coefficients.
    codec::PlayerTypeMsg m;
    m.id = id;
    auto& p = m.params;
    p["player_speed_max"] = player_speed_max;
    p["stamina_inc_max"] = stamina_recovery;
    p["player_decay"] = player_decay;
    p["inertia_moment"] = inertia_moment;
    p["dash_power_rate"] = dash_power_rate;
    p["player_size"] = player_size;
    p["kickable_margin"] = kickable_margin;
    p["kick_rand"] = 0.0;
    p["extra_stamina"] = 0.0;
    p["effort_max"] = effort_max;
    p["effort_min"] = effort_min;
    p["kickable_area"] = kickable_area();
    return m;
}

}  // namespace cls::sim
