#include "bricksim/agents.hpp"

#include <algorithm>
#include <cmath>

namespace bricksim {

const char* mode_name(MissionMode mode) {
    switch (mode) {
        case MissionMode::Idle: return "Idle";
        case MissionMode::Explore: return "Explore";
        case MissionMode::TravelToPick: return "TravelToPick";
        case MissionMode::AlignOverBrick: return "AlignOverBrick";
        case MissionMode::Descend: return "Descend";
        case MissionMode::Grip: return "Grip";
        case MissionMode::Ascend: return "Ascend";
        case MissionMode::TravelToPlace: return "TravelToPlace";
        case MissionMode::PlaceAlign: return "PlaceAlign";
        case MissionMode::Release: return "Release";
        case MissionMode::Fault: return "Fault";
    }
    return "?";
}

MissionMode mode_transition(MissionMode mode, MissionEvent event, bool* legal) {
    bool ok = true;
    MissionMode next = mode;
    if (event == MissionEvent::FaultRaised) {
        next = MissionMode::Fault;
    } else {
        switch (mode) {
            case MissionMode::Idle:
                if (event == MissionEvent::TaskAssigned) next = MissionMode::TravelToPick;
                else if (event == MissionEvent::ExploreAssigned) next = MissionMode::Explore;
                else ok = false;
                break;
            case MissionMode::Explore:
                if (event == MissionEvent::Released) next = MissionMode::Idle;
                else ok = false;
                break;
            case MissionMode::TravelToPick:
                if (event == MissionEvent::ArrivedAtPick) next = MissionMode::AlignOverBrick;
                else ok = false;
                break;
            case MissionMode::AlignOverBrick:
                if (event == MissionEvent::Centered) next = MissionMode::Descend;
                else ok = false;
                break;
            case MissionMode::Descend:
                if (event == MissionEvent::TouchedDown) next = MissionMode::Grip;
                else ok = false;
                break;
            case MissionMode::Grip:
                if (event == MissionEvent::GripConfirmed) next = MissionMode::Ascend;
                else ok = false;
                break;
            case MissionMode::Ascend:
                if (event == MissionEvent::AtCorridor) next = MissionMode::TravelToPlace;
                else ok = false;
                break;
            case MissionMode::TravelToPlace:
                if (event == MissionEvent::ArrivedAtPlace) next = MissionMode::PlaceAlign;
                else ok = false;
                break;
            case MissionMode::PlaceAlign:
                if (event == MissionEvent::EdgeLocked) next = MissionMode::Release;
                else ok = false;
                break;
            case MissionMode::Release:
                if (event == MissionEvent::Released) next = MissionMode::Idle;
                else ok = false;
                break;
            case MissionMode::Fault:
                if (event == MissionEvent::FaultCleared) next = MissionMode::Idle;
                else ok = false;
                break;
        }
    }
    if (legal) *legal = ok;
    return next;
}

double corridor_for(BrickColor color) {
    switch (color) {
        case BrickColor::Orange: return 3.0;
        case BrickColor::Blue: return 5.0;
        case BrickColor::Red:
        case BrickColor::Green: return 7.0;
    }
    return 7.0;
}

ExplorationPlan lawnmower_plan(const Box& bounds, double altitude_m, double fov_rad) {
    if (!(fov_rad > 0.0 && fov_rad < M_PI)) throw DegenerateFov("fov must be in (0, pi)");
    if (altitude_m <= 0.0) throw DegenerateFov("altitude must be positive");

    const double strip = 2.0 * altitude_m * std::tan(fov_rad / 2.0);
    const double ext_x = bounds.max.x - bounds.min.x;
    const double ext_y = bounds.max.y - bounds.min.y;

    // Sweep along the long axis, step passes across the short axis.
    const bool sweep_x = ext_x >= ext_y;
    const double sweep_ext = sweep_x ? ext_x : ext_y;
    const double cross_ext = sweep_x ? ext_y : ext_x;
    // Tolerance keeps an exact-fit footprint (e.g. tan(pi/4)) from rounding
    // up to a spurious extra pass.
    const int passes =
        std::max(1, static_cast<int>(std::ceil(cross_ext / strip - 1e-9)));

    ExplorationPlan plan;
    plan.strip_width_m = strip;
    plan.pass_count = passes;

    // Pass centers tile the cross extent; sweep endpoints pulled in by half
    // a footprint where that still covers the edges.
    const double margin = std::min(strip / 2.0, sweep_ext / 2.0);
    const double s0 = (sweep_x ? bounds.min.x : bounds.min.y) + margin;
    const double s1 = (sweep_x ? bounds.max.x : bounds.max.y) - margin;
    for (int p = 0; p < passes; ++p) {
        double cross = (sweep_x ? bounds.min.y : bounds.min.x) + strip * (p + 0.5);
        cross = std::min(cross, (sweep_x ? bounds.max.y : bounds.max.x) - strip / 2.0);
        cross = std::max(cross, (sweep_x ? bounds.min.y : bounds.min.x) + strip / 2.0);
        const double a = (p % 2 == 0) ? s0 : s1;
        const double b = (p % 2 == 0) ? s1 : s0;
        if (sweep_x) {
            plan.waypoints.push_back({a, cross, altitude_m});
            plan.waypoints.push_back({b, cross, altitude_m});
        } else {
            plan.waypoints.push_back({cross, a, altitude_m});
            plan.waypoints.push_back({cross, b, altitude_m});
        }
    }
    return plan;
}

AgentState step_kinematics(const AgentState& state, const Twist& command, double dt,
                           const Box& bounds) {
    AgentState next = state;
    Twist v = command;
    if (state.kind == AgentKind::Ugv) v.vz = 0.0;

    const double speed = v.linear_norm();
    if (speed > state.speed_limit_mps && speed > 0.0) {
        const double k = state.speed_limit_mps / speed;
        v.vx *= k;
        v.vy *= k;
        v.vz *= k;
    }
    next.velocity = v;
    next.pose.x = std::clamp(state.pose.x + v.vx * dt, bounds.min.x, bounds.max.x);
    next.pose.y = std::clamp(state.pose.y + v.vy * dt, bounds.min.y, bounds.max.y);
    next.pose.z = std::clamp(state.pose.z + v.vz * dt, bounds.min.z, bounds.max.z);
    if (state.kind == AgentKind::Ugv) next.pose.z = 0.0;
    next.pose.yaw = wrap_pi(state.pose.yaw + v.yaw_rate * dt);
    return next;
}

}  // namespace bricksim
