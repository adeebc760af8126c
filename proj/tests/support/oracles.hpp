#pragma once

// Reference implementations written independently of the library, used as
// test oracles. Header-only, test code only.

#include <algorithm>
#include <cmath>
#include <optional>

namespace cls::testsupport {

struct OracleParams {
    double ball_decay = 0.94;
    double player_speed_max = 1.05;
    double dash_accel = 0.6;
    double kickable_area = 1.085;
    double turn_threshold = 15.0;
    int horizon = 200;
};

/// Cycle-by-cycle simulation of the interception model: for every candidate
/// t the ball is rolled forward t steps, and the player spends one cycle
/// turning if needed and then accelerates along a straight line toward the
/// ball's position at t.
inline std::optional<int> brute_force_intercept(double px, double py, std::optional<double> body_dir, double bx,
                                                double by, double bvx, double bvy, const OracleParams& p) {
    const double pi = std::acos(-1.0);
    for (int t = 0; t <= p.horizon; ++t) {
        double x = bx, y = by, vx = bvx, vy = bvy;
        for (int i = 0; i < t; ++i) {
            x += vx;
            y += vy;
            vx *= p.ball_decay;
            vy *= p.ball_decay;
        }
        const double dx = x - px, dy = y - py;
        const double dist = std::sqrt(dx * dx + dy * dy);
        if (dist <= p.kickable_area) return t;

        bool turn = true;
        if (body_dir) {
            double diff = std::atan2(dy, dx) * 180.0 / pi - *body_dir;
            while (diff >= 180.0) diff -= 360.0;
            while (diff < -180.0) diff += 360.0;
            turn = std::abs(diff) > p.turn_threshold;
        }
        double travelled = 0.0;
        double speed = 0.0;
        for (int c = 1; c <= t; ++c) {
            if (turn && c == 1) continue;
            speed = std::min(p.player_speed_max, speed + p.dash_accel);
            travelled += speed;
        }
        if (travelled >= dist - p.kickable_area) return t;
    }
    return std::nullopt;
}

}  // namespace cls::testsupport
