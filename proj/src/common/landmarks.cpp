#include "cls/common/landmarks.hpp"

#include <array>

namespace cls {

namespace {

using namespace pitch;

constexpr double kL = kHalfLength;
constexpr double kW = kHalfWidth;
constexpr double kOutX = kHalfLength + kFlagMargin;
constexpr double kOutY = kHalfWidth + kFlagMargin;
constexpr double kPen = kHalfLength - kPenaltyAreaLength;

constexpr std::array<Landmark, 53> kFlags{{
    {"f c", {0.0, 0.0}},
    {"f c t", {0.0, -kW}},
    {"f c b", {0.0, kW}},
    {"f l t", {-kL, -kW}},
    {"f l b", {-kL, kW}},
    {"f r t", {kL, -kW}},
    {"f r b", {kL, kW}},
    {"f p l t", {-kPen, -kPenaltyAreaHalfWidth}},
    {"f p l c", {-kPen, 0.0}},
    {"f p l b", {-kPen, kPenaltyAreaHalfWidth}},
    {"f p r t", {kPen, -kPenaltyAreaHalfWidth}},
    {"f p r c", {kPen, 0.0}},
    {"f p r b", {kPen, kPenaltyAreaHalfWidth}},
    {"f g l t", {-kL, -kGoalHalfWidth}},
    {"f g l b", {-kL, kGoalHalfWidth}},
    {"f g r t", {kL, -kGoalHalfWidth}},
    {"f g r b", {kL, kGoalHalfWidth}},
    {"f t 0", {0.0, -kOutY}},
    {"f t l 10", {-10.0, -kOutY}},
    {"f t l 20", {-20.0, -kOutY}},
    {"f t l 30", {-30.0, -kOutY}},
    {"f t l 40", {-40.0, -kOutY}},
    {"f t l 50", {-50.0, -kOutY}},
    {"f t r 10", {10.0, -kOutY}},
    {"f t r 20", {20.0, -kOutY}},
    {"f t r 30", {30.0, -kOutY}},
    {"f t r 40", {40.0, -kOutY}},
    {"f t r 50", {50.0, -kOutY}},
    {"f b 0", {0.0, kOutY}},
    {"f b l 10", {-10.0, kOutY}},
    {"f b l 20", {-20.0, kOutY}},
    {"f b l 30", {-30.0, kOutY}},
    {"f b l 40", {-40.0, kOutY}},
    {"f b l 50", {-50.0, kOutY}},
    {"f b r 10", {10.0, kOutY}},
    {"f b r 20", {20.0, kOutY}},
    {"f b r 30", {30.0, kOutY}},
    {"f b r 40", {40.0, kOutY}},
    {"f b r 50", {50.0, kOutY}},
    {"f l 0", {-kOutX, 0.0}},
    {"f l t 10", {-kOutX, -10.0}},
    {"f l t 20", {-kOutX, -20.0}},
    {"f l t 30", {-kOutX, -30.0}},
    {"f l b 10", {-kOutX, 10.0}},
    {"f l b 20", {-kOutX, 20.0}},
    {"f l b 30", {-kOutX, 30.0}},
    {"f r 0", {kOutX, 0.0}},
    {"f r t 10", {kOutX, -10.0}},
    {"f r t 20", {kOutX, -20.0}},
    {"f r t 30", {kOutX, -30.0}},
    {"f r b 10", {kOutX, 10.0}},
    {"f r b 20", {kOutX, 20.0}},
    {"f r b 30", {kOutX, 30.0}},
}};

constexpr std::array<Landmark, 2> kGoals{{
    {"g l", {-kL, 0.0}},
    {"g r", {kL, 0.0}},
}};

}  // namespace

std::span<const Landmark> flag_landmarks() { return kFlags; }
std::span<const Landmark> goal_landmarks() { return kGoals; }

std::optional<Vec2> landmark_position(std::string_view name) {
    for (const auto& f : kFlags)
        if (f.name == name) return f.pos;
    for (const auto& g : kGoals)
        if (g.name == name) return g.pos;
    return std::nullopt;
}

std::optional<std::string_view> mirrored_landmark(std::string_view name) {
    auto pos = landmark_position(name);
    if (!pos) return std::nullopt;
    const Vec2 target = -*pos;
    for (const auto& f : kFlags)
        if (f.pos == target) return f.name;
    for (const auto& g : kGoals)
        if (g.pos == target) return g.name;
    return std::nullopt;
}

}  // namespace cls
