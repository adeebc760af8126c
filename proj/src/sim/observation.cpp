#include "cls/sim/observation.hpp"

#include <algorithm>
#include <cmath>

#include "cls/common/landmarks.hpp"

namespace cls::sim {

double quantize_distance(double d, double qstep) {
    const double step = qstep * std::max(1.0, d / 10.0);
    return std::rint(d / step) * step;
}

codec::SenseBodyMsg render_sense_body(const SimWorld& world, const PlayerState& self) {
    codec::SenseBodyMsg m;
    m.cycle = world.cycle;
    m.stamina = self.stamina;
    m.effort = self.effort;
    m.speed_mag = self.vel.length();
    const double face = self.body_dir + self.neck_dir;
    m.speed_dir = m.speed_mag > 0.0 ? normalize_angle(self.vel.angle_deg() - face) : 0.0;
    m.neck_dir = self.neck_dir;
    return m;
}

codec::SeeMsg render_see(const SimWorld& world, const PlayerState& self, const SimConfig& cfg) {
    codec::SeeMsg m;
    m.cycle = world.cycle;
    const double face = self.body_dir + self.neck_dir;
    const double half_cone = cfg.visible_angle / 2.0;

    auto add = [&](codec::ObjectKind kind, Vec2 pos) {
        const Vec2 rel = pos - self.pos;
        const double rel_dir = normalize_angle(rel.angle_deg() - face);
        if (std::abs(rel_dir) > half_cone) return;
        codec::ObservedObject o;
        o.kind = std::move(kind);
        o.distance = quantize_distance(rel.length(), cfg.quantize_step);
        o.direction = normalize_angle(std::rint(rel_dir));
        m.objects.push_back(std::move(o));
    };

    for (const auto& f : flag_landmarks()) add(codec::FlagObject{std::string(f.name)}, f.pos);
    for (const auto& g : goal_landmarks()) add(codec::GoalObject{g.name == "g l" ? Side::Left : Side::Right}, g.pos);
    add(codec::BallObject{}, world.ball.pos);
    for (const auto& p : world.players) {
        if (p.side == self.side && p.unum == self.unum) continue;
        const std::string& team = p.side == Side::Left ? world.team_left : world.team_right;
        add(codec::PlayerObject{team, p.unum}, p.pos);
    }
    return m;
}

std::vector<codec::ServerMessage> render_observation(const SimWorld& world, const AgentId& agent, ObservationMode mode,
                                                     const SimConfig& cfg) {
    if (agent.role != AgentRole::Player || mode == ObservationMode::FullState) {
        if (agent.role == AgentRole::Player && !world.find(agent.side, agent.unum)) throw UnknownAgent("no such player");
        return {codec::FullStateMsg{world.snapshot()}};
    }
    const PlayerState* self = world.find(agent.side, agent.unum);
    if (!self) throw UnknownAgent("no such player");
    return {render_sense_body(world, *self), render_see(world, *self, cfg)};
}

}  // namespace cls::sim
