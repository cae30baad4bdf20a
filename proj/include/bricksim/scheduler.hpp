#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bricksim/agents.hpp"
#include "bricksim/geometry.hpp"
#include "bricksim/world.hpp"

namespace bricksim {

struct IndexOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// 4 brick-kind rows x 3 pile arrays of multiplicative hindrance costs.
class ScoreMatrix {
public:
    static constexpr int kRows = 4;
    static constexpr int kCols = 3;

    ScoreMatrix() { data_.fill(1.0); }

    double at(int row, int col) const {
        check(row, col);
        return data_[row * kCols + col];
    }
    double& at(int row, int col) {
        check(row, col);
        return data_[row * kCols + col];
    }

private:
    static void check(int row, int col) {
        if (row < 0 || row >= kRows || col < 0 || col >= kCols)
            throw IndexOutOfRange("score matrix index out of range");
    }
    std::array<double, kRows * kCols> data_;
};

// Kernel multiplier at (kr,kc) for a selection at (row,col): 5 at the cell,
// 3 on the shared row/column, 1 elsewhere.
double kernel_multiplier(int sel_row, int sel_col, int kr, int kc);

// Elementwise multiply by the increase kernel centered on (row, col).
void increase_cost(ScoreMatrix& score, int row, int col);
// Elementwise multiply by the reciprocal kernel; undoes a matching increase.
void reset_cost(ScoreMatrix& score, int row, int col);

// Per-kind completion gain, identical across columns. Row order follows the
// BrickColor enum; the row values are a scenario parameter.
struct PointsMatrix {
    std::array<double, 4> row_values = {10.0, 6.0, 4.0, 3.0};

    double at(int row, int col) const {
        if (row < 0 || row >= 4 || col < 0 || col >= 3)
            throw IndexOutOfRange("points matrix index out of range");
        return row_values[row];
    }
};

struct CostParams {
    double k_tr = 0.2;
    double k_spot = 1.0;
    double k_place = 5.0;
};

double travel_cost(const CostParams& params, const Vec3& target, const Vec3& current);

enum class TaskVariant { Explore, Pick, Place };
enum class TaskStatus { Engaged, Completed, Failed };

const char* task_variant_name(TaskVariant v);
const char* task_status_name(TaskStatus s);

struct Task {
    int id = -1;
    TaskVariant variant = TaskVariant::Explore;
    int agent = -1;
    int spot = -1;     // Pick
    int slot = -1;     // Place
    int channel = -1;  // Place
    BrickColor color = BrickColor::Red;
    TaskStatus status = TaskStatus::Engaged;
    double start_s = 0.0;
    double end_s = 0.0;
};

struct TaskBook {
    std::vector<Task> tasks;

    Task& open(TaskVariant variant, int agent, double now_s) {
        Task t;
        t.id = static_cast<int>(tasks.size());
        t.variant = variant;
        t.agent = agent;
        t.start_s = now_s;
        tasks.push_back(t);
        return tasks.back();
    }
    Task* engaged(int agent, TaskVariant variant) {
        for (auto& t : tasks)
            if (t.agent == agent && t.variant == variant && t.status == TaskStatus::Engaged)
                return &t;
        return nullptr;
    }
};

enum class FaultType { ConnectivityLoss, PickFail, PlaceFail, Collision, ResetPause };

struct FaultEvent {
    FaultType type;
    int agent = -1;
    int other_agent = -1;  // Collision
    int spot = -1;
    int slot = -1;
};

struct PickChoice {
    int spot_index;
    BrickColor color;
};

struct DropChoice {
    int slot_index;
    int channel_id;
};

enum class AllocStatus {
    Ok,
    NothingToDo,               // mission complete
    NoRequiredBrickAvailable,  // pile empty or all candidates hindered
    NoEligibleSlot,            // all matching channels blocked
    Wait,                      // discovery pending or explore underway
};

// Cst_pick = Cst_spot + Cst_tr traded against the points gain: pick the spot
// maximizing Points - (k_spot*Score + Cst_tr). UGV piles skip the score term.
// On success the spot is marked Targeted and (UAV pile) the increase kernel
// is applied.
// `committed` counts agents already working a kind (engaged pick or held
// brick without a slot reservation); a kind stays a candidate only while the
// site demands more of it than is committed.
std::optional<PickChoice> choose_pick(Dashboard& db, ScoreMatrix& score,
                                      const PointsMatrix& points, int agent,
                                      AgentKind agent_kind, const Vec3& agent_pos,
                                      const CostParams& params, PileOwner pile,
                                      SiteKind site,
                                      const std::array<int, kNumBrickColors>& committed = {});

// Cst_drop = Cst_placement + Cst_tr over eligible slots; the winning channel
// is blocked for the agent and the slot reserved.
std::optional<DropChoice> choose_drop(Dashboard& db, BrickColor held, int agent,
                                      AgentKind agent_kind, const Vec3& agent_pos,
                                      const CostParams& params, SiteKind site);

struct Allocation {
    AllocStatus status = AllocStatus::Wait;
    TaskVariant variant = TaskVariant::Explore;
    std::optional<PickChoice> pick;
};

// Task-scheduler query from an idle agent: Explore while locations are
// unknown, then Pick; Place tasks are issued on grip confirmation through
// choose_drop.
Allocation allocate_task(Dashboard& db, ScoreMatrix& score, const PointsMatrix& points,
                         int agent, AgentKind agent_kind, const Vec3& agent_pos,
                         const CostParams& params, bool explore_active,
                         const std::array<int, kNumBrickColors>& committed = {});

// Releases the resources of an agent's failed work: targeted spots (with the
// reset kernel on UAV-pile cells), reserved slots, channel blocks, and any
// held or dropped brick back to its pile.
void handle_fault(const FaultEvent& event, Dashboard& db, TaskBook& tasks,
                  ScoreMatrix& score, double now_s);

}  // namespace bricksim
