#pragma once

#include <cmath>
#include <numbers>

namespace cls {

/// Planar vector in field coordinates (meters, or meters/cycle for velocities).
/// The field frame follows the soccer server convention: +x toward the right
/// goal, +y toward the bottom touchline.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    double length() const { return std::hypot(x, y); }
    constexpr double length_sq() const { return x * x + y * y; }
    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double distance(Vec2 o) const { return (*this - o).length(); }
    /// Direction of the vector in degrees, in [-180, 180].
    double angle_deg() const;
    Vec2 rotated_deg(double deg) const;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle in degrees into [-180, 180).
double normalize_angle(double deg);

/// Vector of the given length pointing along `deg`.
Vec2 polar(double length, double deg);

/// Global direction (degrees) from `from` toward `to`.
double bearing(Vec2 from, Vec2 to);

inline double Vec2::angle_deg() const { return rad_to_deg(std::atan2(y, x)); }

inline Vec2 Vec2::rotated_deg(double deg) const {
    const double r = deg_to_rad(deg);
    const double c = std::cos(r);
    const double s = std::sin(r);
    return {x * c - y * s, x * s + y * c};
}

inline double normalize_angle(double deg) {
    if (deg >= -180.0 && deg < 180.0) return deg;
    double r = std::fmod(deg + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    double out = r - 180.0;
    // fmod can land exactly on 360 after the shift for values like -180 - 1e-17.
    if (out >= 180.0) out -= 360.0;
    return out;
}

inline Vec2 polar(double length, double deg) {
    const double r = deg_to_rad(deg);
    return {length * std::cos(r), length * std::sin(r)};
}

inline double bearing(Vec2 from, Vec2 to) { return (to - from).angle_deg(); }

}  // namespace cls
