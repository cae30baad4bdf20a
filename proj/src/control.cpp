#include "bricksim/control.hpp"

#include <algorithm>
#include <cmath>

namespace bricksim {

PlanarCommand centering_command(const BrickObservation& obs, const CameraModel& cam,
                                const PdGains& gains, ServoState& state) {
    const double e_cx = obs.center_x_px - cam.width_px / 2.0;
    const double e_cy = obs.center_y_px - cam.height_px / 2.0;
    const double de_cx = state.has_center ? e_cx - state.prev_e_cx : 0.0;
    const double de_cy = state.has_center ? e_cy - state.prev_e_cy : 0.0;
    state.prev_e_cx = e_cx;
    state.prev_e_cy = e_cy;
    state.has_center = true;
    return {gains.kp_cx * e_cx + gains.kd_cx * de_cx,
            gains.kp_cy * e_cy + gains.kd_cy * de_cy};
}

double yaw_command(const BrickObservation& obs, const PdGains& gains, ServoState& state) {
    const double e = obs.yaw_rad;  // desired minus current yaw
    const double de = state.has_yaw ? e - state.prev_yaw : 0.0;
    state.prev_yaw = e;
    state.has_yaw = true;
    return gains.kp_yaw * e + gains.kd_yaw * de;
}

double descend_command(const BrickObservation& obs, const PdGains& gains,
                       ServoState& state) {
    const double e = obs.area_px2 - state.d_area;
    const double de = state.has_area ? e - state.prev_e_area : 0.0;
    state.prev_e_area = e;
    state.has_area = true;
    return gains.kp_area * e + gains.kd_area * de;
}

UgvCommand ugv_approach(const BrickObservation& obs, const CameraModel& cam,
                        const PdGains& gains, ServoState& state, double speed_limit) {
    UgvCommand cmd;
    cmd.forward = std::clamp(gains.kp_v * (state.d_area - obs.area_px2), 0.0, speed_limit);
    const double e_cx = obs.center_x_px - cam.width_px / 2.0;
    const double de = state.has_center ? e_cx - state.prev_e_cx : 0.0;
    state.prev_e_cx = e_cx;
    state.has_center = true;
    // Camera x grows with bearing, so a positive pixel error turns the
    // vehicle toward the brick.
    cmd.yaw_rate = gains.kp_z * e_cx + gains.kd_z * de;
    return cmd;
}

PlaceCommand place_alignment(const std::optional<EdgeObservation>& edge,
                             BrickColor held_kind, const PdGains& gains,
                             ServoState& state, const ServoTolerances& tol) {
    PlaceCommand cmd;
    if (!edge) {
        cmd.edge_lost = true;
        state.has_place = false;
        return cmd;
    }
    const BrickKind& kind = brick_kind(held_kind);
    const double heading = edge->edge_local.yaw;
    // Target brick center: half a length past the edge, half a height up.
    Vec3 err{edge->edge_local.x + (kind.length_m / 2.0) * std::cos(heading),
             edge->edge_local.y + (kind.length_m / 2.0) * std::sin(heading),
             edge->edge_local.z + kind.height_m / 2.0};
    const Vec3 derr = state.has_place ? err - state.prev_place_err : Vec3{};
    state.prev_place_err = err;
    state.has_place = true;

    cmd.velocity_local = {gains.kp_place * err.x + gains.kd_place * derr.x,
                          gains.kp_place * err.y + gains.kd_place * derr.y,
                          gains.kp_place * err.z + gains.kd_place * derr.z};
    const double yaw_err = heading;
    cmd.yaw_rate = gains.kp_yaw * yaw_err;
    if (err.norm2d() < tol.place_m && std::abs(yaw_err) < tol.yaw_rad) cmd.release = true;
    return cmd;
}

double area_at_depth(BrickColor color, double focal_px, double depth_m) {
    return brick_kind(color).top_area_m2() * focal_px * focal_px / (depth_m * depth_m);
}

double face_area_at_range(BrickColor color, double focal_px, double range_m) {
    return brick_kind(color).face_area_m2() * focal_px * focal_px / (range_m * range_m);
}

}  // namespace bricksim
