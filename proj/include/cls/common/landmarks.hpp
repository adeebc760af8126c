#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "cls/common/geometry.hpp"

namespace cls {

/// Pitch geometry shared by server, codec and world model.
namespace pitch {
inline constexpr double kHalfLength = 52.5;
inline constexpr double kHalfWidth = 34.0;
inline constexpr double kGoalHalfWidth = 7.01;
inline constexpr double kPenaltyAreaLength = 16.5;
inline constexpr double kPenaltyAreaHalfWidth = 20.16;
inline constexpr double kGoalAreaLength = 5.5;
inline constexpr double kGoalAreaHalfWidth = 9.16;
/// Distance of the outer flag ring from the field boundary.
inline constexpr double kFlagMargin = 5.0;
}  // namespace pitch

/// A fixed field marker. `name` is the observation key without parentheses,
/// e.g. "f c", "f t l 10", "f g r b", "g l".
struct Landmark {
    std::string_view name;
    Vec2 pos;
};

/// The 53 standard flags. Four of them are the goalpost flags
/// ("f g l t", "f g l b", "f g r t", "f g r b").
std::span<const Landmark> flag_landmarks();

/// The two goal-centre markers "g l" and "g r".
std::span<const Landmark> goal_landmarks();

/// Position of any flag or goal by observation key.
std::optional<Vec2> landmark_position(std::string_view name);

/// Key of the landmark at the point reflection (x, y) -> (-x, -y) of `name`.
std::optional<std::string_view> mirrored_landmark(std::string_view name);

}  // namespace cls
