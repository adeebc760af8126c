#pragma once

#include <cstdint>
#include <string>

#include "cls/codec/server_message.hpp"

namespace cls::sim {

enum class ObservationMode { See, FullState };

std::string_view observation_mode_name(ObservationMode m);
std::optional<ObservationMode> observation_mode_from_name(std::string_view s);

/// Match and physics parameters. Defaults follow the standard soccer server.
struct SimConfig {
    // field
    double pitch_length = 105.0;
    double pitch_width = 68.0;
    double goal_width = 14.02;

    // timing
    int cycle_ms = 100;
    int half_cycles = 3000;
    int before_kickoff_cycles = 50;  ///< cycles in before_kick_off before the first kick-off
    int goal_pause_cycles = 50;      ///< cycles the Goal mode lasts before the restart
    int dead_ball_timeout = 100;     ///< dead-ball modes auto-resume play_on after this many cycles

    // kinematics
    double ball_decay = 0.94;
    double player_decay = 0.4;
    double dash_power_rate = 0.006;
    double kick_power_rate = 0.027;
    double player_speed_max = 1.05;
    double ball_speed_max = 3.0;
    double inertia_moment = 5.0;
    double player_size = 0.3;
    double ball_size = 0.085;
    double kickable_margin = 0.7;
    double max_neck_angle = 90.0;

    // sensing
    double visible_angle = 90.0;
    double quantize_step = 0.1;

    // stamina
    double stamina_max = 8000.0;
    double stamina_recovery = 45.0;
    double effort_max = 1.0;
    double effort_min = 0.6;

    // roster
    int player_types = 1;
    int subs_max = 3;

    ObservationMode observation_mode = ObservationMode::See;

    // network
    int player_port = 6000;
    int trainer_port = 6001;
    int coach_port = 6002;

    std::uint64_t seed = 1;

    double kickable_area() const { return player_size + ball_size + kickable_margin; }
    double half_length() const { return pitch_length / 2.0; }
    double half_width() const { return pitch_width / 2.0; }
    int total_cycles() const { return 2 * half_cycles; }
    /// Maximum dash acceleration of a player with full effort.
    double max_dash_accel() const { return 100.0 * dash_power_rate * effort_max; }

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    /// Parameter maps announced to agents on connect.
    codec::ServerParamMsg server_param_message() const;
    codec::PlayerParamMsg player_param_message() const;
    codec::PlayerTypeMsg player_type_message(int id) const;
};

}  // namespace cls::sim
