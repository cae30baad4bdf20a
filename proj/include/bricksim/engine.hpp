#pragma once

#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bricksim/agents.hpp"
#include "bricksim/scenario.hpp"
#include "bricksim/scheduler.hpp"

namespace bricksim {

struct SeparationThresholds {
    double uav_horizontal_m = 1.5;
    double uav_vertical_m = 2.0;
    double ground_m = 1.5;
    double service_zone_m = 5.0;
};

struct Violation {
    int tick = 0;
    int agent_a = -1;
    int agent_b = -1;
    double horizontal_m = 0.0;
    double vertical_m = 0.0;
};

// UAV pairs closer than 1.5 m horizontally AND 2 m vertically; ground
// proximity below 1.5 m when neither vehicle is inside a pile/site service
// zone.
std::vector<Violation> collision_monitor(const std::vector<AgentState>& agents,
                                         const SeparationThresholds& th,
                                         const std::vector<Vec3>& service_zones,
                                         int tick);

struct Metrics {
    double total_points = 0.0;
    double makespan_s = 0.0;
    bool mission_complete = false;
    int bricks_placed = 0;
    int slots_total = 0;
    std::vector<double> agent_distance_m;
    int pick_fails = 0;
    int place_fails = 0;
    int conn_losses = 0;
    int collisions = 0;
    int reset_pauses = 0;
    int corridor_violations = 0;       // must stay 0
    int invariant_violations = 0;      // internal consistency checks
    int descent_suppression_errors = 0;
    // Smallest vertical gap seen between two UAVs transiting distinct
    // corridors at altitude; negative when never observed.
    double min_transit_vertical_sep_m = -1.0;
    std::vector<Task> tasks;
};

struct RunLogs {
    std::string trajectory_csv;
    std::string servo_csv;
    std::string tasks_csv;
    std::string metrics_json;
};

class Simulation {
public:
    Simulation(SimConfig config, Scenario scenario);

    // Advances one tick; returns false once the mission is complete or time
    // has run out.
    bool step();
    Metrics run();

    double now_s() const { return tick_ * config_.dt; }
    int tick() const { return tick_; }
    const Dashboard& dashboard() const { return db_; }
    const std::vector<AgentState> agent_states() const;
    const Metrics& metrics() const { return metrics_; }
    const ScoreMatrix& score() const { return score_; }
    RunLogs finish_logs();

private:
    struct AgentRuntime {
        AgentState st;
        ServoState servo;
        ExplorationPlan plan;
        size_t waypoint = 0;
        int pick_task = -1, place_task = -1, explore_task = -1;
        int target_spot = -1;
        int target_brick = -1;
        int target_slot = -1;
        int target_channel = -1;
        BrickColor target_color = BrickColor::Red;
        double action_timer_s = -1.0;
        double fault_until_s = -1.0;
        double next_conn_loss_s = -1.0;
        double next_query_s = 0.0;
        double distance_m = 0.0;
        Vec3 home;          // staging position to park at while idle
        bool hold = false;  // separation hold this tick
        Twist command;
    };

    bool paused_at(double t) const;
    bool mission_complete() const;
    void scheduler_stage();
    void control_stage();
    void separation_hold();
    void integrate_and_monitor();
    void check_invariants();
    Twist goto_point(const AgentRuntime& a, const Vec3& target) const;
    Twist ugv_drive(const AgentRuntime& a, const Vec3& target) const;
    int top_brick(int spot_index) const;
    void attach_payload_pose(AgentRuntime& a);
    void raise_fault(AgentRuntime& a, FaultKind kind, const FaultEvent& ev,
                     bool handle_now);
    void clear_fault(AgentRuntime& a);
    void set_mode(AgentRuntime& a, MissionEvent ev);
    void close_task(int task_id, TaskStatus status);
    void open_pick(AgentRuntime& a, const PickChoice& pick);
    bool try_reserve_drop(AgentRuntime& a);
    void control_uav(AgentRuntime& a);
    void control_ugv(AgentRuntime& a);
    void grip_attempt(AgentRuntime& a);
    void release_attempt(AgentRuntime& a);
    void apply_observation_noise(BrickObservation& obs);
    void log_trajectory();
    void log_servo(const AgentRuntime& a, const char* loop, double error,
                   double command);
    void log_task(const Task& t);

    SimConfig config_;
    Scenario scenario_;
    Dashboard db_;
    std::set<std::pair<int, int>> colliding_pairs_;  // pairs currently in violation
    std::vector<Landmark> landmarks_;
    std::vector<AgentRuntime> agents_;
    ScoreMatrix score_;
    PointsMatrix points_;
    TaskBook tasks_;
    std::mt19937_64 rng_;
    SeparationThresholds sep_;
    std::vector<Vec3> service_zones_;
    CameraModel explore_camera_;
    Metrics metrics_;
    std::array<int, kNumBrickColors> initial_counts_{};
    int tick_ = 0;
    bool done_ = false;
    double last_place_s_ = 0.0;

    std::string traj_log_, servo_log_, task_log_;
};

// Writes trajectory.csv, servo_errors.csv, tasks.csv, metrics.json.
void write_outputs(const RunLogs& logs, const std::string& out_dir);

}  // namespace bricksim
