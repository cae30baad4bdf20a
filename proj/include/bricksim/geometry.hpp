#pragma once

#include <cmath>

namespace bricksim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double norm2d() const { return std::hypot(x, y); }
};

// Position plus heading. For channels, yaw is the along-channel direction.
struct Pose {
    double x = 0.0, y = 0.0, z = 0.0, yaw = 0.0;

    Vec3 position() const { return {x, y, z}; }
};

// Velocity set-point: linear components plus yaw rate.
struct Twist {
    double vx = 0.0, vy = 0.0, vz = 0.0, yaw_rate = 0.0;

    double linear_norm() const { return std::sqrt(vx * vx + vy * vy + vz * vz); }
};

struct Box {
    Vec3 min, max;

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }
};

inline double wrap_pi(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

// Wrap to (-pi/2, pi/2]; an ellipse major axis is ambiguous by pi.
inline double wrap_half_pi(double a) {
    a = wrap_pi(a);
    if (a > M_PI / 2.0) a -= M_PI;
    if (a <= -M_PI / 2.0) a += M_PI;
    return a;
}

// World offset expressed in a frame rotated by yaw (z unchanged).
inline Vec3 to_frame(const Vec3& world_offset, double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * world_offset.x + s * world_offset.y,
            -s * world_offset.x + c * world_offset.y, world_offset.z};
}

inline Vec3 from_frame(const Vec3& local, double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * local.x - s * local.y, s * local.x + c * local.y, local.z};
}

}  // namespace bricksim
