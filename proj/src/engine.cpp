#include "bricksim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace bricksim {

namespace {

std::string fmt_row(const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

}  // namespace

std::vector<Violation> collision_monitor(const std::vector<AgentState>& agents,
                                         const SeparationThresholds& th,
                                         const std::vector<Vec3>& service_zones,
                                         int tick) {
    std::vector<Violation> out;
    auto in_service_zone = [&](const AgentState& a) {
        for (const auto& z : service_zones)
            if (std::hypot(a.pose.x - z.x, a.pose.y - z.y) <= th.service_zone_m)
                return true;
        return false;
    };
    for (size_t i = 0; i < agents.size(); ++i) {
        for (size_t j = i + 1; j < agents.size(); ++j) {
            const AgentState& a = agents[i];
            const AgentState& b = agents[j];
            const double dh = std::hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y);
            const double dv = std::abs(a.pose.z - b.pose.z);
            const bool both_uav = a.kind == AgentKind::Uav && b.kind == AgentKind::Uav;
            if (both_uav) {
                if (dh < th.uav_horizontal_m && dv < th.uav_vertical_m)
                    out.push_back({tick, a.id, b.id, dh, dv});
            } else {
                if (dh < th.ground_m && !in_service_zone(a) && !in_service_zone(b))
                    out.push_back({tick, a.id, b.id, dh, dv});
            }
        }
    }
    return out;
}

Simulation::Simulation(SimConfig config, Scenario scenario)
    : config_(std::move(config)), scenario_(std::move(scenario)) {
    config_.validate();
    db_ = build_dashboard(scenario_);
    landmarks_ = scenario_landmarks(scenario_);
    // A site with no channels has no landmark and nothing to find.
    auto has = [&](DiscoveryKind k) {
        for (const auto& lm : landmarks_)
            if (lm.kind == k) return true;
        return false;
    };
    db_.uav_site_found = !has(DiscoveryKind::UavSiteFound);
    db_.ugv_site_found = !has(DiscoveryKind::UgvSiteFound);
    rng_.seed(config_.seed);

    // Square exploration camera whose across-track footprint equals the
    // lawnmower strip width.
    explore_camera_.width_px = 640;
    explore_camera_.height_px = 640;
    explore_camera_.focal_px = 320.0 / std::tan(config_.explore_fov_rad / 2.0);

    for (const auto& cfg : scenario_.agents) {
        AgentRuntime a;
        a.st.id = cfg.id;
        a.st.kind = cfg.kind;
        a.st.pose = cfg.start;
        a.home = cfg.start.position();
        a.st.speed_limit_mps =
            cfg.kind == AgentKind::Uav ? kUavSpeedLimit : kUgvSpeedLimit;
        if (config_.faults.conn_loss_per_min > 0.0) {
            std::exponential_distribution<double> exp(config_.faults.conn_loss_per_min /
                                                      60.0);
            a.next_conn_loss_s = exp(rng_);
        }
        agents_.push_back(a);
    }
    points_.row_values = scenario_.points_rows;

    for (const auto& b : db_.bricks) initial_counts_[static_cast<int>(b.color)]++;
    metrics_.slots_total = static_cast<int>(db_.slots.size());
    metrics_.agent_distance_m.assign(agents_.size(), 0.0);

    for (const auto& s : db_.spots) service_zones_.push_back(s.pose.position());
    for (const auto& ch : db_.channels)
        service_zones_.push_back(ch.origin.position() +
                                 from_frame({ch.length_m / 2.0, 0.0, 0.0}, ch.origin.yaw));

    traj_log_ = "tick,agent,x,y,z,yaw,mode\n";
    servo_log_ = "tick,agent,loop,error,command\n";
    task_log_ = "tick,task_id,variant,agent,status\n";
}

const std::vector<AgentState> Simulation::agent_states() const {
    std::vector<AgentState> out;
    for (const auto& a : agents_) out.push_back(a.st);
    return out;
}

bool Simulation::paused_at(double t) const {
    for (const auto& p : scenario_.pauses)
        if (t >= p.time_s && t < p.time_s + p.duration_s) return true;
    return false;
}

bool Simulation::mission_complete() const {
    return db_.site_complete(SiteKind::UavSite) && db_.site_complete(SiteKind::UgvSite);
}

int Simulation::top_brick(int spot_index) const {
    int best = -1;
    double best_z = -1.0;
    for (const auto& b : db_.bricks) {
        if (b.state != BrickState::InPile || b.spot_index != spot_index) continue;
        if (b.pose.z > best_z) {
            best_z = b.pose.z;
            best = b.id;
        }
    }
    return best;
}

void Simulation::log_trajectory() {
    if (tick_ % config_.trajectory_every_ticks != 0) return;
    for (const auto& a : agents_) {
        traj_log_ += fmt_row("%d,%d,%.4f,%.4f,%.4f,%.4f,%s\n", tick_, a.st.id,
                             a.st.pose.x, a.st.pose.y, a.st.pose.z, a.st.pose.yaw,
                             mode_name(a.st.mode));
    }
}

void Simulation::log_servo(const AgentRuntime& a, const char* loop, double error,
                           double command) {
    servo_log_ += fmt_row("%d,%d,%s,%.6f,%.6f\n", tick_, a.st.id, loop, error, command);
}

void Simulation::log_task(const Task& t) {
    task_log_ += fmt_row("%d,%d,%s,%d,%s\n", tick_, t.id, task_variant_name(t.variant),
                         t.agent, task_status_name(t.status));
}

void Simulation::close_task(int task_id, TaskStatus status) {
    if (task_id < 0) return;
    Task& t = tasks_.tasks[task_id];
    if (t.status != TaskStatus::Engaged) return;
    t.status = status;
    t.end_s = now_s();
    log_task(t);
}

void Simulation::set_mode(AgentRuntime& a, MissionEvent ev) {
    bool legal = true;
    a.st.mode = mode_transition(a.st.mode, ev, &legal);
    if (!legal) metrics_.invariant_violations++;
}

void Simulation::raise_fault(AgentRuntime& a, FaultKind kind, const FaultEvent& ev,
                             bool handle_now) {
    a.st.fault = kind;
    set_mode(a, MissionEvent::FaultRaised);
    if (handle_now) {
        handle_fault(ev, db_, tasks_, score_, now_s());
        for (auto& ag : agents_) {
            if (ag.st.id != ev.agent && ag.st.id != ev.other_agent) continue;
            for (int tid : {ag.pick_task, ag.place_task, ag.explore_task})
                if (tid >= 0 && tasks_.tasks[tid].status == TaskStatus::Failed)
                    log_task(tasks_.tasks[tid]);
            ag.pick_task = ag.place_task = ag.explore_task = -1;
            ag.target_spot = ag.target_brick = ag.target_slot = ag.target_channel = -1;
            ag.st.payload = -1;
            ag.st.corridor_m.reset();
        }
    }
    a.fault_until_s = now_s() + (kind == FaultKind::ConnectivityLoss
                                     ? config_.faults.conn_timeout_s
                                     : config_.fault_recovery_s);
}

void Simulation::clear_fault(AgentRuntime& a) {
    if (a.st.fault == FaultKind::ConnectivityLoss) {
        // Resources are released only now, after the timeout.
        FaultEvent ev{FaultType::ConnectivityLoss, a.st.id};
        handle_fault(ev, db_, tasks_, score_, now_s());
        for (int tid : {a.pick_task, a.place_task, a.explore_task})
            if (tid >= 0 && tasks_.tasks[tid].status == TaskStatus::Failed)
                log_task(tasks_.tasks[tid]);
        a.pick_task = a.place_task = a.explore_task = -1;
        a.target_spot = a.target_brick = a.target_slot = a.target_channel = -1;
        a.st.payload = -1;
        a.st.corridor_m.reset();
    }
    a.st.fault = FaultKind::None;
    a.fault_until_s = -1.0;
    set_mode(a, MissionEvent::FaultCleared);
    a.next_query_s = now_s();
}

void Simulation::open_pick(AgentRuntime& a, const PickChoice& pick) {
    Task& t = tasks_.open(TaskVariant::Pick, a.st.id, now_s());
    t.spot = pick.spot_index;
    t.color = pick.color;
    a.pick_task = t.id;
    a.target_spot = pick.spot_index;
    a.target_color = pick.color;
    a.target_brick = top_brick(pick.spot_index);
    if (a.st.kind == AgentKind::Uav) a.st.corridor_m = corridor_for(pick.color);
    a.servo.reset();
    a.servo.d_area =
        a.st.kind == AgentKind::Uav
            ? area_at_depth(pick.color, config_.servo_camera.focal_px,
                            config_.touchdown_depth_m)
            : face_area_at_range(pick.color, config_.servo_camera.focal_px,
                                 config_.ugv_stop_range_m);
    log_task(t);
    set_mode(a, MissionEvent::TaskAssigned);
}

bool Simulation::try_reserve_drop(AgentRuntime& a) {
    if (a.st.payload < 0) return false;
    const BrickColor held = db_.bricks[a.st.payload].color;
    const SiteKind site =
        a.st.kind == AgentKind::Uav ? SiteKind::UavSite : SiteKind::UgvSite;
    auto drop = choose_drop(db_, held, a.st.id, a.st.kind, a.st.pose.position(),
                            config_.cost, site);
    if (!drop) return false;
    Task& t = tasks_.open(TaskVariant::Place, a.st.id, now_s());
    t.slot = drop->slot_index;
    t.channel = drop->channel_id;
    t.color = held;
    a.place_task = t.id;
    a.target_slot = drop->slot_index;
    a.target_channel = drop->channel_id;
    log_task(t);
    return true;
}

void Simulation::scheduler_stage() {
    const double t = now_s();
    for (auto& a : agents_) {
        if (a.st.mode != MissionMode::Idle || t < a.next_query_s) continue;

        std::array<int, kNumBrickColors> committed{};
        for (const auto& other : agents_) {
            // Only agents serving the same site compete for its demand.
            if (other.st.id == a.st.id || other.st.kind != a.st.kind) continue;
            if (other.pick_task >= 0 &&
                tasks_.tasks[other.pick_task].status == TaskStatus::Engaged)
                committed[static_cast<int>(other.target_color)]++;
            else if (other.st.payload >= 0 && other.target_slot < 0)
                committed[static_cast<int>(db_.bricks[other.st.payload].color)]++;
        }
        bool explore_active = false;
        for (const auto& other : agents_)
            if (other.st.mode == MissionMode::Explore) explore_active = true;

        Allocation alloc =
            allocate_task(db_, score_, points_, a.st.id, a.st.kind,
                          a.st.pose.position(), config_.cost, explore_active, committed);
        switch (alloc.status) {
            case AllocStatus::Ok:
                if (alloc.variant == TaskVariant::Explore) {
                    a.plan = lawnmower_plan(scenario_.bounds, config_.explore_altitude_m,
                                            config_.explore_fov_rad);
                    a.waypoint = 0;
                    Task& t = tasks_.open(TaskVariant::Explore, a.st.id, now_s());
                    a.explore_task = t.id;
                    log_task(t);
                    set_mode(a, MissionEvent::ExploreAssigned);
                } else {
                    open_pick(a, *alloc.pick);
                }
                break;
            case AllocStatus::NothingToDo:
                a.next_query_s = t + 5.0;
                break;
            default:
                a.next_query_s = t + 1.0;
                break;
        }
    }
}

Twist Simulation::goto_point(const AgentRuntime& a, const Vec3& target) const {
    const Vec3 d = target - a.st.pose.position();
    // Altitude has priority: a deadbeat vertical command reaches the target
    // height exactly (no asymptotic tail), so cruising vehicles sit exactly
    // on their corridor heights. The horizontal component is trimmed to the
    // remaining speed budget, otherwise the saturation in step_kinematics
    // would rescale vz and break the altitude capture.
    Twist cmd{1.2 * d.x, 1.2 * d.y, 0.0, 0.0};
    cmd.vz = std::clamp(d.z / config_.dt, -2.0, 2.0);
    const double h_budget = std::sqrt(
        std::max(0.0, a.st.speed_limit_mps * a.st.speed_limit_mps - cmd.vz * cmd.vz));
    const double h = std::hypot(cmd.vx, cmd.vy);
    if (h > h_budget && h > 0.0) {
        cmd.vx *= h_budget / h;
        cmd.vy *= h_budget / h;
    }
    return cmd;
}

Twist Simulation::ugv_drive(const AgentRuntime& a, const Vec3& target) const {
    const double dx = target.x - a.st.pose.x;
    const double dy = target.y - a.st.pose.y;
    const double dist = std::hypot(dx, dy);
    const double bearing_err = wrap_pi(std::atan2(dy, dx) - a.st.pose.yaw);
    const double fwd = std::min(a.st.speed_limit_mps, 0.8 * dist) *
                       std::max(0.0, std::cos(bearing_err));
    return {fwd * std::cos(a.st.pose.yaw), fwd * std::sin(a.st.pose.yaw), 0.0,
            1.5 * bearing_err};
}

void Simulation::apply_observation_noise(BrickObservation& obs) {
    if (config_.noise_sigma_px <= 0.0) return;
    std::normal_distribution<double> n(0.0, config_.noise_sigma_px);
    obs.center_x_px += n(rng_);
    obs.center_y_px += n(rng_);
    obs.yaw_rad += n(rng_) * 1e-3;
    obs.area_px2 = std::max(1.0, obs.area_px2 + n(rng_) * 10.0);
}

void Simulation::grip_attempt(AgentRuntime& a) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) < config_.faults.p_pick_fail) {
        metrics_.pick_fails++;
        FaultEvent ev{FaultType::PickFail, a.st.id};
        ev.spot = a.target_spot;
        raise_fault(a, FaultKind::PickFail, ev, true);
        return;
    }
    BrickInstance& brick = db_.bricks[a.target_brick];
    PickupSpot& spot = db_.spots[a.target_spot];
    brick.state = BrickState::Held;
    brick.held_by = a.st.id;
    spot.remaining--;
    spot.targeted_by = -1;
    spot.status = spot.remaining > 0 ? SpotStatus::Free : SpotStatus::Depleted;
    if (spot.owner == PileOwner::UavPile) reset_cost(score_, spot.row, spot.col);
    a.st.payload = brick.id;
    close_task(a.pick_task, TaskStatus::Completed);
    a.pick_task = -1;
    a.target_spot = -1;
    set_mode(a, MissionEvent::GripConfirmed);
    a.action_timer_s = config_.manip_action_s;  // UGV arm stow
    try_reserve_drop(a);
}

void Simulation::release_attempt(AgentRuntime& a) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) < config_.faults.p_place_fail) {
        metrics_.place_fails++;
        FaultEvent ev{FaultType::PlaceFail, a.st.id};
        ev.slot = a.target_slot;
        raise_fault(a, FaultKind::PlaceFail, ev, true);
        return;
    }
    BrickInstance& brick = db_.bricks[a.st.payload];
    BrickSlot& slot = db_.slots[a.target_slot];
    if (!db_.slot_reachable(slot.index)) metrics_.invariant_violations++;
    brick.state = BrickState::Placed;
    brick.held_by = -1;
    brick.slot_index = slot.index;
    brick.pose = slot.target;
    slot.status = SlotStatus::Filled;
    slot.filled_brick = brick.id;
    slot.reserved_by = -1;
    release_channel(db_, a.target_channel, a.st.id);
    metrics_.bricks_placed++;
    metrics_.total_points += points_.row_values[static_cast<int>(brick.color)];
    last_place_s_ = now_s();
    close_task(a.place_task, TaskStatus::Completed);
    a.place_task = -1;
    a.target_slot = a.target_channel = -1;
    a.target_brick = -1;
    a.st.payload = -1;
    a.st.corridor_m.reset();
    set_mode(a, MissionEvent::Released);
    a.next_query_s = now_s();
}

void Simulation::control_uav(AgentRuntime& a) {
    const CameraModel& cam = config_.servo_camera;
    switch (a.st.mode) {
        case MissionMode::Idle:
            // Nothing assigned: return to the staging position and land so an
            // idle vehicle never loiters over a pile spot or the wall, where
            // it would hold up whoever still has work there.
            if ((a.home - a.st.pose.position()).norm() > config_.arrival_xy_m)
                a.command = goto_point(a, a.home);
            break;
        case MissionMode::Explore: {
            if (db_.all_discovered() || a.waypoint >= a.plan.waypoints.size()) {
                close_task(a.explore_task, TaskStatus::Completed);
                a.explore_task = -1;
                set_mode(a, MissionEvent::Released);
                a.next_query_s = now_s();
                break;
            }
            const Vec3 wp = a.plan.waypoints[a.waypoint];
            a.command = goto_point(a, wp);
            const Vec3 d = wp - a.st.pose.position();
            if (d.norm2d() < config_.arrival_xy_m && std::abs(d.z) < config_.arrival_z_m)
                a.waypoint++;
            break;
        }
        case MissionMode::TravelToPick: {
            const PickupSpot& spot = db_.spots[a.target_spot];
            a.target_brick = top_brick(a.target_spot);
            if (a.target_brick < 0) {  // pile ran dry under us
                FaultEvent ev{FaultType::PickFail, a.st.id};
                ev.spot = a.target_spot;
                metrics_.pick_fails++;
                raise_fault(a, FaultKind::PickFail, ev, true);
                break;
            }
            const BrickInstance& brick = db_.bricks[a.target_brick];
            const double brick_top =
                brick.pose.z + brick_kind(brick.color).height_m / 2.0;
            const double align_z = brick_top + config_.align_altitude_m;
            const double dist_xy = std::hypot(spot.pose.x - a.st.pose.x,
                                              spot.pose.y - a.st.pose.y);
            const double target_z = dist_xy > 1.0 ? *a.st.corridor_m : align_z;
            a.command = goto_point(a, {spot.pose.x, spot.pose.y, target_z});
            if (dist_xy < config_.arrival_xy_m &&
                std::abs(a.st.pose.z - align_z) < config_.arrival_z_m) {
                a.servo.reset();
                set_mode(a, MissionEvent::ArrivedAtPick);
            }
            break;
        }
        case MissionMode::AlignOverBrick:
        case MissionMode::Descend: {
            const BrickInstance& brick = db_.bricks[a.target_brick];
            auto obs = observe_brick(cam, a.st.pose, brick);
            if (!obs) {
                const double brick_top =
                    brick.pose.z + brick_kind(brick.color).height_m / 2.0;
                a.command = goto_point(a, {brick.pose.x, brick.pose.y,
                                           brick_top + config_.align_altitude_m});
                break;
            }
            apply_observation_noise(*obs);
            const double e_cx = obs->center_x_px - cam.width_px / 2.0;
            const double e_cy = obs->center_y_px - cam.height_px / 2.0;
            const bool centered = std::abs(e_cx) <= config_.tol.center_px &&
                                  std::abs(e_cy) <= config_.tol.center_px;
            const bool aligned = std::abs(obs->yaw_rad) <= config_.tol.yaw_rad;

            const PlanarCommand pc = centering_command(*obs, cam, config_.gains, a.servo);
            const double wz = yaw_command(*obs, config_.gains, a.servo);
            const Vec3 v_world = from_frame({pc.vx, pc.vy, 0.0}, a.st.pose.yaw);
            a.command = {v_world.x, v_world.y, 0.0, wz};
            log_servo(a, "center_x", e_cx, pc.vx);
            log_servo(a, "center_y", e_cy, pc.vy);
            log_servo(a, "yaw", obs->yaw_rad, wz);

            if (a.st.mode == MissionMode::AlignOverBrick) {
                const double brick_top =
                    brick.pose.z + brick_kind(brick.color).height_m / 2.0;
                a.command.vz = 1.0 * (brick_top + config_.align_altitude_m - a.st.pose.z);
                if (centered && aligned) set_mode(a, MissionEvent::Centered);
            } else {
                // Descent halts whenever the centering check fails.
                double vz = 0.0;
                if (centered && aligned) {
                    // Keep the final approach slow: with coarse timesteps a
                    // fast descent overshoots the area set-point and the
                    // derivative term bounces the vehicle just above the
                    // touch-down depth.
                    vz = std::clamp(descend_command(*obs, config_.gains, a.servo), -0.2,
                                    0.2);
                    log_servo(a, "area", obs->area_px2 - a.servo.d_area, vz);
                } else if (a.command.vz != 0.0) {
                    metrics_.descent_suppression_errors++;
                }
                a.command.vz = vz;
                if (obs->depth_m <= config_.touchdown_depth_m + 0.02) {
                    a.command = {};
                    a.action_timer_s = config_.manip_action_s;
                    set_mode(a, MissionEvent::TouchedDown);
                }
            }
            break;
        }
        case MissionMode::Grip:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) grip_attempt(a);
            break;
        case MissionMode::Ascend: {
            a.command = goto_point(a, {a.st.pose.x, a.st.pose.y, *a.st.corridor_m});
            if (std::abs(a.st.pose.z - *a.st.corridor_m) < config_.arrival_z_m) {
                if (a.target_slot >= 0 || try_reserve_drop(a))
                    set_mode(a, MissionEvent::AtCorridor);
                // else hover at corridor until a channel frees up
            }
            break;
        }
        case MissionMode::TravelToPlace: {
            const BrickSlot& slot = db_.slots[a.target_slot];
            const double place_z = slot.target.z + config_.carry_offset_m + 0.05;
            const double dist_xy = std::hypot(slot.target.x - a.st.pose.x,
                                              slot.target.y - a.st.pose.y);
            const double target_z = dist_xy > 1.5 ? *a.st.corridor_m : place_z;
            a.command = goto_point(a, {slot.target.x, slot.target.y, target_z});
            if (dist_xy < 0.35 && std::abs(a.st.pose.z - place_z) < config_.arrival_z_m) {
                a.servo.reset();
                set_mode(a, MissionEvent::ArrivedAtPlace);
            }
            break;
        }
        case MissionMode::PlaceAlign: {
            const Channel& ch = db_.channels[a.target_channel];
            Pose tool = a.st.pose;
            tool.z -= config_.carry_offset_m;
            auto edge = observe_edge(tool, ch, db_, config_.sensing_radius_m);
            const BrickColor held = db_.bricks[a.st.payload].color;
            PlaceCommand pc =
                place_alignment(edge, held, config_.gains, a.servo, config_.tol);
            if (pc.edge_lost) {
                const BrickSlot& slot = db_.slots[a.target_slot];
                a.command = goto_point(a, {slot.target.x, slot.target.y,
                                           slot.target.z + config_.carry_offset_m + 0.05});
                break;
            }
            const Vec3 v = from_frame(pc.velocity_local, a.st.pose.yaw);
            a.command = {v.x, v.y, v.z, pc.yaw_rate};
            log_servo(a, "place_xy", a.servo.prev_place_err.norm2d(),
                      pc.velocity_local.norm2d());
            if (pc.release) {
                a.command = {};
                a.action_timer_s = config_.manip_action_s;
                set_mode(a, MissionEvent::EdgeLocked);
            }
            break;
        }
        case MissionMode::Release:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) release_attempt(a);
            break;
        case MissionMode::Fault:
            if (a.fault_until_s >= 0.0 && now_s() >= a.fault_until_s) clear_fault(a);
            break;
    }
}

void Simulation::control_ugv(AgentRuntime& a) {
    const CameraModel& cam = config_.servo_camera;
    switch (a.st.mode) {
        case MissionMode::Idle:
        case MissionMode::Explore:
            break;
        case MissionMode::TravelToPick: {
            a.target_brick = top_brick(a.target_spot);
            if (a.target_brick < 0) {
                FaultEvent ev{FaultType::PickFail, a.st.id};
                ev.spot = a.target_spot;
                metrics_.pick_fails++;
                raise_fault(a, FaultKind::PickFail, ev, true);
                break;
            }
            const BrickInstance& brick = db_.bricks[a.target_brick];
            const double dist = std::hypot(brick.pose.x - a.st.pose.x,
                                           brick.pose.y - a.st.pose.y);
            if (dist <= config_.ugv_reach_m * 0.95) {
                a.command = {};
                a.action_timer_s = config_.manip_action_s;
                set_mode(a, MissionEvent::ArrivedAtPick);
                break;
            }
            if (dist > 8.0) {
                a.command = ugv_drive(a, brick.pose.position());
                break;
            }
            auto obs = observe_brick_forward(cam, a.st.pose, brick);
            if (!obs) {  // outside the forward FoV: rotate toward the brick
                const double bearing =
                    std::atan2(brick.pose.y - a.st.pose.y, brick.pose.x - a.st.pose.x);
                a.command = {0.0, 0.0, 0.0, 1.5 * wrap_pi(bearing - a.st.pose.yaw)};
                break;
            }
            apply_observation_noise(*obs);
            const UgvCommand uc =
                ugv_approach(*obs, cam, config_.gains, a.servo, a.st.speed_limit_mps);
            a.command = {uc.forward * std::cos(a.st.pose.yaw),
                         uc.forward * std::sin(a.st.pose.yaw), 0.0, uc.yaw_rate};
            log_servo(a, "ugv_forward", a.servo.d_area - obs->area_px2, uc.forward);
            log_servo(a, "ugv_yaw", obs->center_x_px - cam.width_px / 2.0, uc.yaw_rate);
            break;
        }
        // Manipulator phases are reach-gated fixed-duration actions.
        case MissionMode::AlignOverBrick:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) {
                a.action_timer_s = config_.manip_action_s;
                set_mode(a, MissionEvent::Centered);
            }
            break;
        case MissionMode::Descend:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) {
                a.action_timer_s = config_.manip_action_s;
                set_mode(a, MissionEvent::TouchedDown);
            }
            break;
        case MissionMode::Grip:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) grip_attempt(a);
            break;
        case MissionMode::Ascend:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) {
                if (a.target_slot >= 0 || try_reserve_drop(a))
                    set_mode(a, MissionEvent::AtCorridor);
                else
                    a.action_timer_s = 1.0;  // retry shortly
            }
            break;
        case MissionMode::TravelToPlace: {
            const BrickSlot& slot = db_.slots[a.target_slot];
            const double dist = std::hypot(slot.target.x - a.st.pose.x,
                                           slot.target.y - a.st.pose.y);
            if (dist <= 1.8) {
                a.servo.reset();
                set_mode(a, MissionEvent::ArrivedAtPlace);
                break;
            }
            a.command = ugv_drive(a, slot.target.position());
            break;
        }
        case MissionMode::PlaceAlign: {
            const Channel& ch = db_.channels[a.target_channel];
            auto edge = observe_edge(a.st.pose, ch, db_, config_.sensing_radius_m);
            const BrickColor held = db_.bricks[a.st.payload].color;
            PlaceCommand pc =
                place_alignment(edge, held, config_.gains, a.servo, config_.tol);
            if (pc.edge_lost) {
                const BrickSlot& slot = db_.slots[a.target_slot];
                a.command = ugv_drive(a, slot.target.position());
                break;
            }
            const Vec3 v = from_frame(pc.velocity_local, a.st.pose.yaw);
            a.command = {v.x, v.y, 0.0, pc.yaw_rate};
            log_servo(a, "place_xy", a.servo.prev_place_err.norm2d(),
                      pc.velocity_local.norm2d());
            if (pc.release) {
                a.command = {};
                a.action_timer_s = config_.manip_action_s;
                set_mode(a, MissionEvent::EdgeLocked);
            }
            break;
        }
        case MissionMode::Release:
            a.action_timer_s -= config_.dt;
            if (a.action_timer_s <= 0.0) release_attempt(a);
            break;
        case MissionMode::Fault:
            if (a.fault_until_s >= 0.0 && now_s() >= a.fault_until_s) clear_fault(a);
            break;
    }
}

void Simulation::control_stage() {
    for (auto& a : agents_) {
        a.command = {};
        a.hold = false;
        // Connectivity-loss clock.
        if (a.next_conn_loss_s >= 0.0 && now_s() >= a.next_conn_loss_s) {
            std::exponential_distribution<double> exp(config_.faults.conn_loss_per_min /
                                                      60.0);
            a.next_conn_loss_s = now_s() + exp(rng_);
            if (a.st.mode != MissionMode::Idle && a.st.mode != MissionMode::Fault) {
                metrics_.conn_losses++;
                raise_fault(a, FaultKind::ConnectivityLoss,
                            {FaultType::ConnectivityLoss, a.st.id}, false);
                continue;
            }
        }
        if (a.st.kind == AgentKind::Uav)
            control_uav(a);
        else
            control_ugv(a);

        // Discovery runs on any airborne UAV.
        if (a.st.kind == AgentKind::Uav && a.st.pose.z > 1.0) {
            for (const auto& ev : discoveries(explore_camera_, a.st.pose, landmarks_)) {
                switch (ev.kind) {
                    case DiscoveryKind::UavPileFound: db_.uav_pile_found = true; break;
                    case DiscoveryKind::UgvPileFound: db_.ugv_pile_found = true; break;
                    case DiscoveryKind::UavSiteFound: db_.uav_site_found = true; break;
                    case DiscoveryKind::UgvSiteFound: db_.ugv_site_found = true; break;
                }
            }
        }
    }
}

void Simulation::separation_hold() {
    // Same-corridor conflicts: one UAV of the pair holds position while the
    // pair is closer than the hold radius. Normally the higher-id one yields;
    // if exactly one of the two is frozen by a fault, the moving one yields.
    constexpr double kHoldHorizontal = 2.0;
    constexpr double kHoldVertical = 2.5;
    for (size_t i = 0; i < agents_.size(); ++i) {
        for (size_t j = i + 1; j < agents_.size(); ++j) {
            AgentRuntime& a = agents_[i];
            AgentRuntime& b = agents_[j];
            if (a.st.kind != AgentKind::Uav || b.st.kind != AgentKind::Uav) continue;
            if (a.st.pose.z < 0.5 && b.st.pose.z < 0.5) continue;
            const double dh = std::hypot(a.st.pose.x - b.st.pose.x,
                                         a.st.pose.y - b.st.pose.y);
            const double dv = std::abs(a.st.pose.z - b.st.pose.z);
            if (dh < kHoldHorizontal && dv < kHoldVertical) {
                const bool a_frozen = a.st.mode == MissionMode::Fault;
                const bool b_frozen = b.st.mode == MissionMode::Fault;
                AgentRuntime& yielding = (b_frozen && !a_frozen) ? a : b;
                yielding.command = {};
                yielding.hold = true;
            }
        }
    }
}

void Simulation::integrate_and_monitor() {
    for (auto& a : agents_) {
        const Pose before = a.st.pose;
        a.st = step_kinematics(a.st, a.command, config_.dt, scenario_.bounds);
        a.distance_m += (a.st.pose.position() - before.position()).norm();
        metrics_.agent_distance_m[&a - agents_.data()] = a.distance_m;
        attach_payload_pose(a);
    }

    auto states = agent_states();
    const auto violations = collision_monitor(states, sep_, service_zones_, tick_);
    for (const auto& v : violations) {
        if (states[v.agent_a].kind == AgentKind::Uav &&
            states[v.agent_b].kind == AgentKind::Uav)
            metrics_.corridor_violations++;
    }
    // Fault the pair only when it enters violation; while the same pair stays
    // inside the thresholds the agents are recovering and moving apart, and
    // re-raising every tick would freeze them there forever.
    std::set<std::pair<int, int>> now_colliding;
    for (const auto& v : violations) {
        const auto key = std::minmax(v.agent_a, v.agent_b);
        now_colliding.insert(key);
        if (colliding_pairs_.count(key)) continue;
        AgentRuntime* pa = nullptr;
        AgentRuntime* pb = nullptr;
        for (auto& a : agents_) {
            if (a.st.id == v.agent_a) pa = &a;
            if (a.st.id == v.agent_b) pb = &a;
        }
        if (pa && pb) {
            metrics_.collisions++;
            FaultEvent ev{FaultType::Collision, v.agent_a};
            ev.other_agent = v.agent_b;
            raise_fault(*pa, FaultKind::Collision, ev, true);
            pb->st.fault = FaultKind::Collision;
            pb->st.mode = MissionMode::Fault;
            pb->fault_until_s = now_s() + config_.fault_recovery_s;
        }
    }
    colliding_pairs_ = std::move(now_colliding);

    // Vertical separation between UAVs transiting distinct corridors.
    for (size_t i = 0; i < agents_.size(); ++i) {
        for (size_t j = i + 1; j < agents_.size(); ++j) {
            const AgentState& a = agents_[i].st;
            const AgentState& b = agents_[j].st;
            if (a.kind != AgentKind::Uav || b.kind != AgentKind::Uav) continue;
            // "Transiting" = cruising exactly at the assigned corridor
            // altitude; climbs and descents in between are not corridor
            // flight and are covered by the collision monitor instead.
            auto transiting = [](const AgentState& s) {
                return s.corridor_m &&
                       (s.mode == MissionMode::TravelToPick ||
                        s.mode == MissionMode::Ascend ||
                        s.mode == MissionMode::TravelToPlace) &&
                       std::abs(s.pose.z - *s.corridor_m) < 1e-6;
            };
            if (!transiting(a) || !transiting(b)) continue;
            if (*a.corridor_m == *b.corridor_m) continue;
            const double dv = std::abs(a.pose.z - b.pose.z);
            if (metrics_.min_transit_vertical_sep_m < 0.0 ||
                dv < metrics_.min_transit_vertical_sep_m)
                metrics_.min_transit_vertical_sep_m = dv;
        }
    }
}

void Simulation::attach_payload_pose(AgentRuntime& a) {
    if (a.st.payload < 0) return;
    BrickInstance& brick = db_.bricks[a.st.payload];
    if (brick.state != BrickState::Held) return;
    brick.pose.x = a.st.pose.x;
    brick.pose.y = a.st.pose.y;
    brick.pose.z = a.st.kind == AgentKind::Uav
                       ? a.st.pose.z - config_.carry_offset_m
                       : 0.3;
    brick.pose.yaw = a.st.pose.yaw;
}

void Simulation::check_invariants() {
    const auto census = db_.state_census();
    for (int k = 0; k < kNumBrickColors; ++k) {
        int sum = 0;
        for (int s = 0; s < 4; ++s) sum += census[k][s];
        if (sum != initial_counts_[k]) metrics_.invariant_violations++;
    }
    for (const auto& spot : db_.spots) {
        if ((spot.status == SpotStatus::Targeted) != (spot.targeted_by != -1))
            metrics_.invariant_violations++;
        if (spot.remaining < 0) metrics_.invariant_violations++;
    }
    for (const auto& slot : db_.slots) {
        if ((slot.status == SlotStatus::Reserved) != (slot.reserved_by != -1))
            metrics_.invariant_violations++;
        if (slot.status == SlotStatus::Filled && slot.filled_brick < 0)
            metrics_.invariant_violations++;
    }
    for (int r = 0; r < ScoreMatrix::kRows; ++r)
        for (int c = 0; c < ScoreMatrix::kCols; ++c)
            if (!(score_.at(r, c) > 0.0)) metrics_.invariant_violations++;
    for (const auto& a : agents_) {
        if (a.st.velocity.linear_norm() > a.st.speed_limit_mps + 1e-9)
            metrics_.invariant_violations++;
        if (a.st.kind == AgentKind::Ugv && a.st.pose.z != 0.0)
            metrics_.invariant_violations++;
    }
}

bool Simulation::step() {
    if (done_) return false;
    if (now_s() >= config_.max_sim_time_s) {
        done_ = true;
        return false;
    }
    const bool paused = paused_at(now_s());
    if (paused) {
        for (auto& a : agents_) a.command = {};
        // Count each scripted pause once, on entry.
        if (tick_ == 0 || !paused_at((tick_ - 1) * config_.dt)) metrics_.reset_pauses++;
    } else {
        scheduler_stage();
        control_stage();
        separation_hold();
    }
    integrate_and_monitor();
    check_invariants();
    log_trajectory();
    ++tick_;
    if (mission_complete()) done_ = true;
    return !done_;
}

Metrics Simulation::run() {
    while (step()) {
    }
    metrics_.mission_complete = mission_complete();
    metrics_.makespan_s = metrics_.mission_complete ? last_place_s_ : now_s();
    metrics_.tasks = tasks_.tasks;
    return metrics_;
}

RunLogs Simulation::finish_logs() {
    nlohmann::json j;
    j["total_points"] = metrics_.total_points;
    j["makespan_s"] = metrics_.makespan_s;
    j["mission_complete"] = metrics_.mission_complete;
    j["bricks_placed"] = metrics_.bricks_placed;
    j["slots_total"] = metrics_.slots_total;
    j["corridor_violations"] = metrics_.corridor_violations;
    j["invariant_violations"] = metrics_.invariant_violations;
    j["min_transit_vertical_sep_m"] = metrics_.min_transit_vertical_sep_m;
    j["faults"] = {{"pick_fails", metrics_.pick_fails},
                   {"place_fails", metrics_.place_fails},
                   {"conn_losses", metrics_.conn_losses},
                   {"collisions", metrics_.collisions},
                   {"reset_pauses", metrics_.reset_pauses}};
    j["agents"] = nlohmann::json::array();
    for (size_t i = 0; i < agents_.size(); ++i)
        j["agents"].push_back({{"id", agents_[i].st.id},
                               {"distance_m", metrics_.agent_distance_m[i]}});
    j["tasks"] = nlohmann::json::array();
    for (const auto& t : tasks_.tasks) {
        const double dur = (t.status == TaskStatus::Engaged ? now_s() : t.end_s) - t.start_s;
        j["tasks"].push_back({{"id", t.id},
                              {"variant", task_variant_name(t.variant)},
                              {"agent", t.agent},
                              {"status", task_status_name(t.status)},
                              {"duration_s", dur}});
    }
    return {traj_log_, servo_log_, task_log_, j.dump(2) + "\n"};
}

void write_outputs(const RunLogs& logs, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(out_dir + "/" + name, std::ios::binary);
        out << content;
    };
    write("trajectory.csv", logs.trajectory_csv);
    write("servo_errors.csv", logs.servo_csv);
    write("tasks.csv", logs.tasks_csv);
    write("metrics.json", logs.metrics_json);
}

}  // namespace bricksim
