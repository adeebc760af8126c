#include <algorithm>
#include <cmath>

#include "cls/common/landmarks.hpp"
#include "cls/world/model.hpp"

namespace cls::world {

namespace {

struct Sighting {
    Vec2 landmark;
    double distance;
    double direction;
    double weight;
};

std::vector<Sighting> resolve(const std::vector<codec::ObservedObject>& objs) {
    std::vector<Sighting> out;
    for (const auto& o : objs) {
        std::optional<Vec2> p;
        if (const auto* f = std::get_if<codec::FlagObject>(&o.kind)) {
            p = landmark_position(f->id);
        } else if (const auto* g = std::get_if<codec::GoalObject>(&o.kind)) {
            p = landmark_position(g->side == Side::Left ? "g l" : "g r");
        }
        if (!p) continue;
        const double scale = std::max(1.0, o.distance / 10.0);
        out.push_back({*p, o.distance, o.direction, 1.0 / (scale * scale)});
    }
    return out;
}

/// Rotation and translation mapping face-frame relative positions onto the
/// landmark positions in the weighted least-squares sense.
Vec2 rigid_fit(const std::vector<Sighting>& s, double& face_deg) {
    Vec2 rbar, pbar;
    double wsum = 0.0;
    for (const auto& x : s) {
        rbar += polar(x.distance, x.direction) * x.weight;
        pbar += x.landmark * x.weight;
        wsum += x.weight;
    }
    rbar = rbar / wsum;
    pbar = pbar / wsum;
    double dot = 0.0, cross = 0.0;
    for (const auto& x : s) {
        const Vec2 r = polar(x.distance, x.direction) - rbar;
        const Vec2 p = x.landmark - pbar;
        dot += x.weight * r.dot(p);
        cross += x.weight * r.cross(p);
    }
    face_deg = rad_to_deg(std::atan2(cross, dot));
    return pbar - rbar.rotated_deg(face_deg);
}

void gauss_newton(const std::vector<Sighting>& s, Vec2& x) {
    for (int it = 0; it < 20; ++it) {
        double h00 = 0, h01 = 0, h11 = 0, g0 = 0, g1 = 0;
        for (const auto& o : s) {
            const Vec2 d = x - o.landmark;
            const double len = d.length();
            if (len < 1e-9) continue;
            const Vec2 j = d / len;
            const double r = len - o.distance;
            h00 += o.weight * j.x * j.x;
            h01 += o.weight * j.x * j.y;
            h11 += o.weight * j.y * j.y;
            g0 += o.weight * j.x * r;
            g1 += o.weight * j.y * r;
        }
        const double det = h00 * h11 - h01 * h01;
        if (std::abs(det) < 1e-12) return;
        const Vec2 step{-(h11 * g0 - h01 * g1) / det, -(h00 * g1 - h01 * g0) / det};
        x += step;
        if (step.length() < 1e-12) return;
    }
}

}  // namespace

PoseEstimate localize(const LocalizeInput& in) {
    std::vector<Sighting> s = resolve(in.landmarks);
    PoseEstimate out = in.prior;

    if (s.size() < 2) {
        out.pos = in.prior.pos + in.last_velocity;
        out.valid = in.prior.valid && in.prior_age < in.valid_age;
        if (s.size() == 1)
            out.body_dir = normalize_angle(bearing(out.pos, s[0].landmark) - s[0].direction - in.prior.neck_dir);
        return out;
    }

    double face = 0.0;
    Vec2 x = rigid_fit(s, face);
    gauss_newton(s, x);

    std::sort(s.begin(), s.end(), [](const Sighting& a, const Sighting& b) { return a.distance < b.distance; });
    Vec2 heading;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, s.size()); ++i)
        heading += polar(1.0, bearing(x, s[i].landmark) - s[i].direction);
    face = heading.length() > 1e-12 ? heading.angle_deg() : face;

    double sq = 0.0;
    for (const auto& o : s) {
        const double r = x.distance(o.landmark) - o.distance;
        sq += r * r;
    }
    out.pos = x;
    out.body_dir = normalize_angle(face - in.prior.neck_dir);
    out.pos_error = std::sqrt(sq / static_cast<double>(s.size()));
    out.valid = out.pos_error < 5.0;
    return out;
}

}  // namespace cls::world
