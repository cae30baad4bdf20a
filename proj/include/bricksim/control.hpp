#pragma once

#include <optional>

#include "bricksim/geometry.hpp"
#include "bricksim/perception.hpp"
#include "bricksim/world.hpp"

namespace bricksim {

// Per-loop PD gains. Pixel-domain gains convert px -> m/s.
struct PdGains {
    double kp_cx = 0.004, kd_cx = 0.008;
    double kp_cy = 0.004, kd_cy = 0.008;
    double kp_yaw = 1.2, kd_yaw = 0.4;
    double kp_area = 5e-4, kd_area = 1e-3;
    double kp_v = 1e-3;                  // UGV forward
    double kp_z = 0.005, kd_z = 0.01;    // UGV yaw
    double kp_place = 1.0, kd_place = 0.2;
};

struct ServoTolerances {
    double center_px = 2.0;
    double yaw_rad = 0.02;
    double place_m = 0.02;
};

// Previous-tick errors for the backward-difference derivative terms.
// Reset before each servo phase.
struct ServoState {
    double d_area = 0.0;  // desired area set-point, px^2

    double prev_e_cx = 0.0, prev_e_cy = 0.0;
    double prev_yaw = 0.0;
    double prev_e_area = 0.0;
    Vec3 prev_place_err;
    bool has_center = false, has_yaw = false, has_area = false, has_place = false;

    void reset() {
        has_center = has_yaw = has_area = has_place = false;
        prev_e_cx = prev_e_cy = prev_yaw = prev_e_area = 0.0;
        prev_place_err = {};
    }
};

struct PlanarCommand {
    double vx = 0.0, vy = 0.0;
};

// V = kp*e + kd*(e - e_prev), e = pixel offset from the image center.
PlanarCommand centering_command(const BrickObservation& obs, const CameraModel& cam,
                                const PdGains& gains, ServoState& state);

double yaw_command(const BrickObservation& obs, const PdGains& gains, ServoState& state);

// Area-error descent; the caller suppresses it (hover) whenever the centering
// tolerance is violated.
double descend_command(const BrickObservation& obs, const PdGains& gains,
                       ServoState& state);

struct UgvCommand {
    double forward = 0.0;
    double yaw_rate = 0.0;
};

// Forward speed from the area gap, yaw rate from the pixel bearing error.
// Forward is clamped to [0, speed_limit].
UgvCommand ugv_approach(const BrickObservation& obs, const CameraModel& cam,
                        const PdGains& gains, ServoState& state, double speed_limit);

struct PlaceCommand {
    Vec3 velocity_local;    // agent-frame
    double yaw_rate = 0.0;
    bool release = false;   // position error under tolerance
    bool edge_lost = false; // observation vanished mid-alignment
};

// Drop-pose update + final placement: target brick center = detected edge +
// half the held brick's length along the channel, one brick-height up; PD on
// the agent-frame positional error, release when within tolerance.
PlaceCommand place_alignment(const std::optional<EdgeObservation>& edge,
                             BrickColor held_kind, const PdGains& gains,
                             ServoState& state, const ServoTolerances& tol);

// Desired area for a kind's top face at the given camera depth; used to set
// d_area from the touch-down height instead of a per-kind pixel constant.
double area_at_depth(BrickColor color, double focal_px, double depth_m);
double face_area_at_range(BrickColor color, double focal_px, double range_m);

}  // namespace bricksim
