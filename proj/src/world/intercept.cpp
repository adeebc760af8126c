#include <algorithm>
#include <cmath>

#include "cls/world/model.hpp"

namespace cls::world {

Vec2 predict_ball_position(const TrackedObject& ball, int n, double ball_decay) {
    if (n <= 0) return ball.pos;
    if (ball_decay == 1.0) return ball.pos + ball.vel * static_cast<double>(n);
    return ball.pos + ball.vel * ((1.0 - std::pow(ball_decay, n)) / (1.0 - ball_decay));
}

double reachable_distance(int t, const WorldParams& p) {
    double d = 0.0;
    for (int i = 1; i <= t; ++i) d += std::min(p.player_speed_max, i * p.dash_accel());
    return d;
}

std::optional<int> intercept_cycles(const Mover& player, const TrackedObject& ball, const WorldParams& p) {
    double reach = 0.0;  // reachable_distance(t - 1)
    double reach_prev = 0.0;  // reachable_distance(t - 2)
    for (int t = 0; t <= p.intercept_horizon; ++t) {
        if (t >= 1) {
            reach_prev = reach;
            reach += std::min(p.player_speed_max, t * p.dash_accel());
        }
        const Vec2 target = predict_ball_position(ball, t, p.ball_decay);
        const double gap = player.pos.distance(target) - p.kickable_area;
        if (gap <= 0.0) return t;
        const bool needs_turn =
            !player.body_dir || std::abs(normalize_angle(bearing(player.pos, target) - *player.body_dir)) > p.turn_threshold;
        if ((needs_turn ? reach_prev : reach) >= gap) return t;
    }
    return std::nullopt;
}

namespace {

std::optional<int> fastest(const std::array<std::optional<int>, 11>& cycles) {
    std::optional<int> best;
    for (int u = 1; u <= 11; ++u) {
        const auto& c = cycles[static_cast<std::size_t>(u - 1)];
        if (c && (!best || *c < *cycles[static_cast<std::size_t>(*best - 1)])) best = u;
    }
    return best;
}

}  // namespace

InterceptTable build_intercept_table(const WorldState& ws) {
    InterceptTable t;
    if (!ws.ball.seen()) return t;
    const WorldParams& p = ws.params;
    for (int u = 1; u <= 11; ++u) {
        const auto i = static_cast<std::size_t>(u - 1);
        if (u == ws.self_unum && ws.role == AgentRole::Player) continue;
        if (ws.teammates[i].seen()) t.ours[i] = intercept_cycles({ws.teammates[i].pos, ws.teammates[i].body_dir}, ws.ball, p);
        if (ws.opponents[i].seen()) t.theirs[i] = intercept_cycles({ws.opponents[i].pos, ws.opponents[i].body_dir}, ws.ball, p);
    }
    if (ws.role == AgentRole::Player && ws.self_unum >= 1 && ws.self_unum <= 11 && ws.self.valid) {
        t.self_cycles = intercept_cycles({ws.self.pos, ws.self.body_dir}, ws.ball, p);
        t.ours[static_cast<std::size_t>(ws.self_unum - 1)] = t.self_cycles;
    }
    t.fastest_ours = fastest(t.ours);
    t.fastest_theirs = fastest(t.theirs);
    return t;
}

}  // namespace cls::world
