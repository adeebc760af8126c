#pragma once

// Random world-model states covering every field the RPC schema carries.

#include "cls/world/model.hpp"
#include "generators.hpp"

namespace cls::testsupport {

inline world::TrackedObject random_tracked(Gen& g, bool with_body) {
    world::TrackedObject o;
    if (g.integer(0, 3) == 0) return o;  // never seen
    o.pos = {g.uniform(-60, 60), g.uniform(-40, 40)};
    o.vel = {g.uniform(-3, 3), g.uniform(-3, 3)};
    o.last_seen_cycle = g.integer(0, 6000);
    o.confidence = g.uniform(0.01, 1.0);
    if (with_body && g.coin()) o.body_dir = g.uniform(-180, 180);
    return o;
}

inline std::optional<int> random_cycles(Gen& g) {
    return g.integer(0, 3) == 0 ? std::nullopt : std::optional<int>(g.integer(0, 200));
}

/// Every field carried by the schema is populated; the rest stay default.
inline world::WorldState random_world_state(Gen& g, AgentRole role = AgentRole::Player) {
    world::WorldState ws;
    ws.role = role;
    ws.cycle = g.integer(0, 6000);
    ws.our_side = g.coin() ? Side::Left : Side::Right;
    ws.self_unum = g.integer(1, 11);
    ws.our_team = g.identifier(15);
    ws.their_team = g.coin() ? g.identifier(15) : std::string{};
    ws.self.pos = {g.uniform(-55, 55), g.uniform(-37, 37)};
    ws.self.body_dir = g.uniform(-180, 180);
    ws.self.neck_dir = g.uniform(-90, 90);
    ws.self.pos_error = g.uniform(0, 3);
    ws.self.valid = g.coin();
    ws.self_vel = {g.uniform(-1, 1), g.uniform(-1, 1)};
    ws.stamina = g.uniform(0, 8000);
    ws.effort = g.uniform(0.6, 1.0);
    ws.ball = random_tracked(g, false);
    if (g.coin()) ws.ball_displacement = Vec2{g.uniform(-3, 3), g.uniform(-3, 3)};
    for (auto& t : ws.teammates) t = random_tracked(g, true);
    for (auto& t : ws.opponents) t = random_tracked(g, true);
    ws.play_mode = g.play_mode();
    ws.our_score = g.integer(0, 20);
    ws.their_score = g.integer(0, 20);
    for (auto& c : ws.intercept.ours) c = random_cycles(g);
    for (auto& c : ws.intercept.theirs) c = random_cycles(g);
    ws.intercept.self_cycles = random_cycles(g);
    if (g.coin()) ws.intercept.fastest_ours = g.integer(1, 11);
    if (g.coin()) ws.intercept.fastest_theirs = g.integer(1, 11);
    ws.full_state = g.coin();
    ws.stale_messages = g.integer(0, 50);
    return ws;
}

/// Copy with the fields the schema does not carry reset to their defaults.
inline world::WorldState carried_fields(world::WorldState ws) {
    ws.ball.seen_pos = {};
    for (auto& t : ws.teammates) t.seen_pos = {};
    for (auto& t : ws.opponents) t.seen_pos = {};
    ws.sensed_speed = {};
    ws.last_fix_cycle = -1;
    ws.heard.clear();
    ws.params = {};
    return ws;
}

}  // namespace cls::testsupport
