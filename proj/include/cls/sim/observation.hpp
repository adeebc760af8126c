#pragma once

#include <stdexcept>
#include <vector>

#include "cls/codec/server_message.hpp"
#include "cls/sim/world.hpp"

namespace cls::sim {

/// Distance as reported in See messages: rounded to a step of
/// qstep * max(1, d / 10), so absolute resolution is qstep up to 10 m and
/// relative resolution is constant beyond.
double quantize_distance(double d, double qstep);

class UnknownAgent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Messages an agent receives at the end of a cycle, in sending order.
/// Players in See mode get sense_body then see; players in FullState mode,
/// coaches and trainers get one fullstate. Throws UnknownAgent if the player
/// is not on the pitch.
std::vector<codec::ServerMessage> render_observation(const SimWorld& world, const AgentId& agent, ObservationMode mode,
                                                     const SimConfig& cfg);

codec::SenseBodyMsg render_sense_body(const SimWorld& world, const PlayerState& self);

/// Flags and goals in landmark-table order, then the ball, then players by
/// (side, unum), keeping only objects within visible_angle / 2 of the face
/// direction (boundary inclusive).
codec::SeeMsg render_see(const SimWorld& world, const PlayerState& self, const SimConfig& cfg);

}  // namespace cls::sim
