#pragma once

#include <optional>
#include <vector>

#include "bricksim/geometry.hpp"
#include "bricksim/world.hpp"

namespace bricksim {

enum class CameraMount { Downward, Forward, Side };

struct CameraModel {
    double focal_px = 500.0;
    int width_px = 640;
    int height_px = 480;
    CameraMount mount = CameraMount::Downward;
    Pose mount_offset;  // relative to the agent body frame

    double half_fov_x() const { return std::atan2(width_px / 2.0, focal_px); }
    double half_fov_y() const { return std::atan2(height_px / 2.0, focal_px); }
};

// What the brick detector of the real pipeline reports: contour center,
// ellipse major-axis angle, and polygon area.
struct BrickObservation {
    int brick_id = -1;
    double center_x_px = 0.0;
    double center_y_px = 0.0;
    double yaw_rad = 0.0;   // wrapped to (-pi/2, pi/2]
    double area_px2 = 0.0;
    double depth_m = 0.0;   // camera-to-brick-top distance (ground truth)
};

struct EdgeObservation {
    Pose edge_world;        // free edge of the last laid brick (or channel start)
    Pose edge_local;        // same, in the agent frame
    double along_channel_m = 0.0;
    int layer = 0;
};

// Pinhole projection of a brick's top face as seen by a downward camera.
// Returns nullopt when the projected center falls outside the image or the
// brick is not below the camera.
std::optional<BrickObservation> observe_brick(const CameraModel& cam,
                                              const Pose& agent_pose,
                                              const BrickInstance& brick);

// Forward-camera analogue used by the UGV: pixel offset from the bearing to
// the brick, projected front-face area as the depth proxy.
std::optional<BrickObservation> observe_brick_forward(const CameraModel& cam,
                                                      const Pose& agent_pose,
                                                      const BrickInstance& brick);

// Pose of the free edge in the channel's lowest incomplete layer: the channel
// start when the layer is empty, else the far end of the last Filled slot.
// Nullopt when the agent is beyond sensing_radius_m of the channel or the
// channel is complete.
std::optional<EdgeObservation> observe_edge(const Pose& agent_pose,
                                            const Channel& channel,
                                            const Dashboard& db,
                                            double sensing_radius_m);

enum class DiscoveryKind { UavPileFound, UgvPileFound, UavSiteFound, UgvSiteFound };

struct DiscoveryEvent {
    DiscoveryKind kind;
    Pose pose;
};

struct Landmark {
    DiscoveryKind kind;
    Pose pose;
};

// Landmarks whose ground position falls inside the downward camera's
// footprint rectangle at the current pose.
std::vector<DiscoveryEvent> discoveries(const CameraModel& cam, const Pose& agent_pose,
                                        const std::vector<Landmark>& landmarks);

}  // namespace bricksim
