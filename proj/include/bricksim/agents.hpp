#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "bricksim/geometry.hpp"
#include "bricksim/world.hpp"

namespace bricksim {

enum class AgentKind { Uav, Ugv };

enum class MissionMode {
    Idle,
    Explore,
    TravelToPick,
    AlignOverBrick,
    Descend,
    Grip,
    Ascend,
    TravelToPlace,
    PlaceAlign,
    Release,
    Fault,
};

const char* mode_name(MissionMode mode);

enum class FaultKind { None, PickFail, PlaceFail, ConnectivityLoss, Collision };

enum class MissionEvent {
    TaskAssigned,
    ExploreAssigned,
    ArrivedAtPick,
    Centered,
    TouchedDown,
    GripConfirmed,
    AtCorridor,
    ArrivedAtPlace,
    EdgeLocked,
    Released,
    FaultRaised,
    FaultCleared,
};

// Total transition function. Illegal (mode, event) pairs leave the mode
// unchanged; `legal` reports whether the edge exists so callers can log.
MissionMode mode_transition(MissionMode mode, MissionEvent event,
                            bool* legal = nullptr);

// 15 km/h and 30 km/h in m/s.
constexpr double kUavSpeedLimit = 15.0 / 3.6;
constexpr double kUgvSpeedLimit = 30.0 / 3.6;

struct AgentState {
    int id = -1;
    AgentKind kind = AgentKind::Uav;
    Pose pose;
    Twist velocity;
    MissionMode mode = MissionMode::Idle;
    FaultKind fault = FaultKind::None;
    int payload = -1;  // held brick id, -1 if none
    std::optional<double> corridor_m;
    double speed_limit_mps = kUavSpeedLimit;
};

// Transit altitude by carried-brick weight tier: Orange 3 m, Blue 5 m,
// Red/Green 7 m.
double corridor_for(BrickColor color);

struct DegenerateFov : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExplorationPlan {
    std::vector<Vec3> waypoints;
    double strip_width_m = 0.0;
    int pass_count = 0;
};

// Boustrophedon sweep along the long axis of the bounds at fixed altitude.
// Strip width = 2*altitude*tan(fov/2); passes spaced so footprints tile the
// short axis.
ExplorationPlan lawnmower_plan(const Box& bounds, double altitude_m, double fov_rad);

// First-order integration of a velocity set-point: saturate to the agent's
// speed limit, integrate, clamp to the arena. UGV vz is forced to zero.
AgentState step_kinematics(const AgentState& state, const Twist& command, double dt,
                           const Box& bounds);

}  // namespace bricksim
