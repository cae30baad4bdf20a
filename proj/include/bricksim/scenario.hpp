#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bricksim/agents.hpp"
#include "bricksim/control.hpp"
#include "bricksim/perception.hpp"
#include "bricksim/scheduler.hpp"
#include "bricksim/world.hpp"

namespace bricksim {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PileConfig {
    Vec3 origin;
    double row_spacing_m = 3.0;
    double col_spacing_m = 6.0;
    int cols = 3;
    double yaw = 0.0;
    int bricks_per_spot = 10;
};

struct ChannelConfig {
    Vec3 origin;
    double heading = 0.0;
    double length_m = 4.0;
    SiteKind site = SiteKind::UavSite;
    std::optional<BrickColor> reserved_kind;
    std::vector<LayerSpec> layers;
};

struct AgentConfig {
    int id = 0;
    AgentKind kind = AgentKind::Uav;
    Pose start;
};

struct PauseEvent {
    double time_s = 0.0;
    double duration_s = 0.0;
};

struct Scenario {
    Box bounds{{0, 0, 0}, {50, 40, 20}};
    PileConfig uav_pile;
    PileConfig ugv_pile;
    std::vector<ChannelConfig> channels;
    std::vector<AgentConfig> agents;
    std::vector<PauseEvent> pauses;
    std::array<double, 4> points_rows = {10.0, 6.0, 4.0, 3.0};
};

// The 3-UAV + 1-UGV mission: three two-layer channels (one orange-reserved)
// on the 1.7 m platform plus the five-layer L-wall at ground level.
Scenario default_scenario();

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& sc);

// Expands a scenario into the live dashboard: pickup spots, bricks stacked
// per spot, channels, and slots.
Dashboard build_dashboard(const Scenario& sc);

std::vector<Landmark> scenario_landmarks(const Scenario& sc);

struct FaultConfig {
    double p_pick_fail = 0.0;
    double p_place_fail = 0.0;
    double conn_loss_per_min = 0.0;
    double conn_timeout_s = 10.0;
};

struct SimConfig {
    double dt = 0.05;
    uint64_t seed = 1;
    double max_sim_time_s = 4000.0;
    PdGains gains;
    CostParams cost;
    ServoTolerances tol;
    FaultConfig faults;
    double noise_sigma_px = 0.0;

    double explore_altitude_m = 10.0;
    double explore_fov_rad = M_PI / 2.0;
    double arrival_xy_m = 0.2;
    double arrival_z_m = 0.1;
    double align_altitude_m = 2.0;     // camera height above brick top to align at
    double touchdown_depth_m = 0.35;   // camera height above brick top at touch-down
    double sensing_radius_m = 6.0;
    double carry_offset_m = 0.5;       // held brick hangs this far below a UAV
    double ugv_reach_m = 0.85;
    double ugv_stop_range_m = 0.8;
    double manip_action_s = 1.0;       // fixed-duration grip/stow/release actions
    double fault_recovery_s = 2.0;
    int trajectory_every_ticks = 1;

    CameraModel servo_camera;  // downward (UAV) / forward (UGV) detector camera

    void validate() const;
};

}  // namespace bricksim
