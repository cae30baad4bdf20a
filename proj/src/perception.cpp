#include "bricksim/perception.hpp"

#include <cmath>

namespace bricksim {

std::optional<BrickObservation> observe_brick(const CameraModel& cam,
                                              const Pose& agent_pose,
                                              const BrickInstance& brick) {
    const Pose cam_pose{agent_pose.x + cam.mount_offset.x,
                        agent_pose.y + cam.mount_offset.y,
                        agent_pose.z + cam.mount_offset.z, agent_pose.yaw};
    const BrickKind& kind = brick_kind(brick.color);
    const double brick_top = brick.pose.z + kind.height_m / 2.0;
    const double depth = cam_pose.z - brick_top;
    if (depth <= 0.0) return std::nullopt;

    const Vec3 offset = to_frame(
        {brick.pose.x - cam_pose.x, brick.pose.y - cam_pose.y, 0.0}, cam_pose.yaw);

    BrickObservation obs;
    obs.brick_id = brick.id;
    obs.center_x_px = cam.width_px / 2.0 + cam.focal_px * offset.x / depth;
    obs.center_y_px = cam.height_px / 2.0 + cam.focal_px * offset.y / depth;
    if (obs.center_x_px < 0.0 || obs.center_x_px > cam.width_px ||
        obs.center_y_px < 0.0 || obs.center_y_px > cam.height_px)
        return std::nullopt;
    obs.yaw_rad = wrap_half_pi(brick.pose.yaw - agent_pose.yaw);
    obs.area_px2 = kind.top_area_m2() * cam.focal_px * cam.focal_px / (depth * depth);
    obs.depth_m = depth;
    return obs;
}

std::optional<BrickObservation> observe_brick_forward(const CameraModel& cam,
                                                      const Pose& agent_pose,
                                                      const BrickInstance& brick) {
    const double dx = brick.pose.x - agent_pose.x;
    const double dy = brick.pose.y - agent_pose.y;
    const double range = std::hypot(dx, dy);
    if (range < 1e-6) return std::nullopt;
    const double bearing = wrap_pi(std::atan2(dy, dx) - agent_pose.yaw);
    if (std::abs(bearing) >= cam.half_fov_x()) return std::nullopt;

    const BrickKind& kind = brick_kind(brick.color);
    BrickObservation obs;
    obs.brick_id = brick.id;
    obs.center_x_px = cam.width_px / 2.0 + cam.focal_px * std::tan(bearing);
    obs.center_y_px = cam.height_px / 2.0;
    obs.yaw_rad = wrap_half_pi(brick.pose.yaw - agent_pose.yaw);
    obs.area_px2 = kind.face_area_m2() * cam.focal_px * cam.focal_px / (range * range);
    obs.depth_m = range;
    return obs;
}

std::optional<EdgeObservation> observe_edge(const Pose& agent_pose,
                                            const Channel& channel,
                                            const Dashboard& db,
                                            double sensing_radius_m) {
    const double dist = std::hypot(agent_pose.x - channel.origin.x,
                                   agent_pose.y - channel.origin.y);
    // Channel may extend away from its origin; sense from either end.
    const double end_x = channel.origin.x + channel.length_m * std::cos(channel.origin.yaw);
    const double end_y = channel.origin.y + channel.length_m * std::sin(channel.origin.yaw);
    const double dist_end = std::hypot(agent_pose.x - end_x, agent_pose.y - end_y);
    if (std::min(dist, dist_end) > sensing_radius_m) return std::nullopt;

    // Lowest incomplete layer; the free edge is past the last Filled slot.
    int layer = -1;
    double edge_along = 0.0;
    for (const auto& s : db.slots) {
        if (s.channel_id != channel.id) continue;
        if (s.status == SlotStatus::Filled) continue;
        if (layer == -1 || s.layer < layer) layer = s.layer;
    }
    if (layer == -1) return std::nullopt;  // channel complete
    for (const auto& s : db.slots) {
        if (s.channel_id != channel.id || s.layer != layer) continue;
        if (s.status != SlotStatus::Filled) continue;
        edge_along = std::max(edge_along,
                              s.offset_m + brick_kind(s.required).length_m);
    }

    EdgeObservation edge;
    edge.layer = layer;
    edge.along_channel_m = edge_along;
    edge.edge_world.x = channel.origin.x + edge_along * std::cos(channel.origin.yaw);
    edge.edge_world.y = channel.origin.y + edge_along * std::sin(channel.origin.yaw);
    edge.edge_world.z = channel.origin.z + layer * 0.20;
    edge.edge_world.yaw = channel.origin.yaw;

    const Vec3 local = to_frame({edge.edge_world.x - agent_pose.x,
                                 edge.edge_world.y - agent_pose.y,
                                 edge.edge_world.z - agent_pose.z},
                                agent_pose.yaw);
    edge.edge_local = {local.x, local.y, local.z,
                       wrap_pi(edge.edge_world.yaw - agent_pose.yaw)};
    return edge;
}

std::vector<DiscoveryEvent> discoveries(const CameraModel& cam, const Pose& agent_pose,
                                        const std::vector<Landmark>& landmarks) {
    std::vector<DiscoveryEvent> out;
    const double alt = agent_pose.z;
    if (alt <= 0.0) return out;
    const double half_x = alt * (cam.width_px / 2.0) / cam.focal_px;
    const double half_y = alt * (cam.height_px / 2.0) / cam.focal_px;
    for (const auto& lm : landmarks) {
        const Vec3 rel = to_frame({lm.pose.x - agent_pose.x, lm.pose.y - agent_pose.y, 0.0},
                                  agent_pose.yaw);
        if (std::abs(rel.x) <= half_x && std::abs(rel.y) <= half_y)
            out.push_back({lm.kind, lm.pose});
    }
    return out;
}

}  // namespace bricksim
