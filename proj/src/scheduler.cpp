#include "bricksim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bricksim {

double kernel_multiplier(int sel_row, int sel_col, int kr, int kc) {
    if (sel_row < 0 || sel_row >= ScoreMatrix::kRows || sel_col < 0 ||
        sel_col >= ScoreMatrix::kCols)
        throw IndexOutOfRange("kernel cell out of range");
    if (kr == sel_row && kc == sel_col) return 5.0;
    if (kr == sel_row || kc == sel_col) return 3.0;
    return 1.0;
}

void increase_cost(ScoreMatrix& score, int row, int col) {
    score.at(row, col);  // validates
    for (int r = 0; r < ScoreMatrix::kRows; ++r)
        for (int c = 0; c < ScoreMatrix::kCols; ++c)
            score.at(r, c) *= kernel_multiplier(row, col, r, c);
}

void reset_cost(ScoreMatrix& score, int row, int col) {
    score.at(row, col);
    for (int r = 0; r < ScoreMatrix::kRows; ++r)
        for (int c = 0; c < ScoreMatrix::kCols; ++c)
            score.at(r, c) /= kernel_multiplier(row, col, r, c);
}

double travel_cost(const CostParams& params, const Vec3& target, const Vec3& current) {
    return params.k_tr * (target - current).norm();
}

const char* task_variant_name(TaskVariant v) {
    switch (v) {
        case TaskVariant::Explore: return "Explore";
        case TaskVariant::Pick: return "Pick";
        case TaskVariant::Place: return "Place";
    }
    return "?";
}

const char* task_status_name(TaskStatus s) {
    switch (s) {
        case TaskStatus::Engaged: return "Engaged";
        case TaskStatus::Completed: return "Completed";
        case TaskStatus::Failed: return "Failed";
    }
    return "?";
}

namespace {

// Kinds currently demanded by some reachable, unreserved slot on the site,
// net of the agents already committed to supplying them.
std::array<bool, kNumBrickColors> required_kinds(
    const Dashboard& db, SiteKind site, int agent,
    const std::array<int, kNumBrickColors>& committed) {
    std::array<int, kNumBrickColors> demand{};
    for (const auto& ch : db.channels) {
        if (ch.site != site) continue;
        if (ch.blocked_by != -1 && ch.blocked_by != agent) continue;
        if (auto next = next_required_brick(db, ch.id))
            demand[static_cast<int>(next->second)]++;
    }
    std::array<bool, kNumBrickColors> req{};
    for (int k = 0; k < kNumBrickColors; ++k) req[k] = demand[k] > committed[k];
    return req;
}

}  // namespace

std::optional<PickChoice> choose_pick(Dashboard& db, ScoreMatrix& score,
                                      const PointsMatrix& points, int agent,
                                      AgentKind agent_kind, const Vec3& agent_pos,
                                      const CostParams& params, PileOwner pile,
                                      SiteKind site,
                                      const std::array<int, kNumBrickColors>& committed) {
    const auto req = required_kinds(db, site, agent, committed);
    const bool use_score = (pile == PileOwner::UavPile);

    int best = -1;
    double best_u = -std::numeric_limits<double>::infinity();
    for (const auto& spot : db.spots) {
        if (spot.owner != pile || spot.status != SpotStatus::Free || spot.remaining <= 0)
            continue;
        if (!req[spot.row]) continue;
        Vec3 target = spot.pose.position();
        Vec3 from = agent_pos;
        if (agent_kind == AgentKind::Uav) {
            target.z = corridor_for(spot.color());
        } else {
            target.z = 0.0;
            from.z = 0.0;
        }
        const double cst_spot = use_score ? params.k_spot * score.at(spot.row, spot.col) : 0.0;
        const double u = points.at(spot.row, spot.col) -
                         (cst_spot + travel_cost(params, target, from));
        // Ties broken by (row, col) ascending; spots are stored in that order.
        if (u > best_u + 1e-12) {
            best_u = u;
            best = spot.index;
        }
    }
    if (best < 0) return std::nullopt;

    PickupSpot& spot = db.spots[best];
    spot.status = SpotStatus::Targeted;
    spot.targeted_by = agent;
    if (use_score) increase_cost(score, spot.row, spot.col);
    return PickChoice{best, spot.color()};
}

std::optional<DropChoice> choose_drop(Dashboard& db, BrickColor held, int agent,
                                      AgentKind agent_kind, const Vec3& agent_pos,
                                      const CostParams& params, SiteKind site) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& slot : db.slots) {
        const Channel& ch = db.channels[slot.channel_id];
        if (ch.site != site) continue;
        if (ch.blocked_by != -1 && ch.blocked_by != agent) continue;
        if (slot.status != SlotStatus::Empty || slot.required != held) continue;
        if (!db.slot_reachable(slot.index)) continue;

        double hindrance = 0.0;
        for (const auto& other : db.channels) {
            if (other.site != site || other.id == ch.id) continue;
            if (std::abs(other.id - ch.id) == 1 && other.blocked_by != -1 &&
                other.blocked_by != agent)
                hindrance = 1.0;
        }
        Vec3 target = slot.target.position();
        Vec3 from = agent_pos;
        if (agent_kind == AgentKind::Ugv) {
            target.z = 0.0;
            from.z = 0.0;
        }
        const double cost = params.k_place * hindrance + travel_cost(params, target, from);
        // Ties by (channel, layer, offset) = storage order.
        if (cost < best_cost - 1e-12) {
            best_cost = cost;
            best = slot.index;
        }
    }
    if (best < 0) return std::nullopt;

    BrickSlot& slot = db.slots[best];
    slot.status = SlotStatus::Reserved;
    slot.reserved_by = agent;
    block_channel(db, slot.channel_id, agent);
    return DropChoice{best, slot.channel_id};
}

Allocation allocate_task(Dashboard& db, ScoreMatrix& score, const PointsMatrix& points,
                         int agent, AgentKind agent_kind, const Vec3& agent_pos,
                         const CostParams& params, bool explore_active,
                         const std::array<int, kNumBrickColors>& committed) {
    Allocation alloc;
    const SiteKind site =
        agent_kind == AgentKind::Uav ? SiteKind::UavSite : SiteKind::UgvSite;
    const PileOwner pile =
        agent_kind == AgentKind::Uav ? PileOwner::UavPile : PileOwner::UgvPile;

    if (db.site_complete(site)) {
        alloc.status = AllocStatus::NothingToDo;
        return alloc;
    }
    const bool discovered = agent_kind == AgentKind::Uav
                                ? db.all_discovered()
                                : (db.ugv_pile_found && db.ugv_site_found);
    if (!discovered) {
        if (agent_kind == AgentKind::Uav && !explore_active) {
            alloc.status = AllocStatus::Ok;
            alloc.variant = TaskVariant::Explore;
        } else {
            alloc.status = AllocStatus::Wait;
        }
        return alloc;
    }
    alloc.pick = choose_pick(db, score, points, agent, agent_kind, agent_pos, params,
                             pile, site, committed);
    if (!alloc.pick) {
        alloc.status = AllocStatus::NoRequiredBrickAvailable;
        return alloc;
    }
    alloc.status = AllocStatus::Ok;
    alloc.variant = TaskVariant::Pick;
    return alloc;
}

namespace {

void release_agent_resources(int agent, Dashboard& db, TaskBook& tasks,
                             ScoreMatrix& score, double now_s) {
    for (auto& spot : db.spots) {
        if (spot.targeted_by != agent) continue;
        spot.targeted_by = -1;
        spot.status = spot.remaining > 0 ? SpotStatus::Free : SpotStatus::Depleted;
        if (spot.owner == PileOwner::UavPile) reset_cost(score, spot.row, spot.col);
    }
    for (auto& slot : db.slots) {
        if (slot.reserved_by != agent) continue;
        slot.reserved_by = -1;
        slot.status = SlotStatus::Empty;
    }
    for (auto& ch : db.channels)
        if (ch.blocked_by == agent) ch.blocked_by = -1;
    for (auto& brick : db.bricks) {
        if (brick.state != BrickState::Held || brick.held_by != agent) continue;
        // Dropped where the fault happened, then recovered back into its pile
        // spot as pickable stock.
        brick.state = BrickState::InPile;
        brick.held_by = -1;
        if (brick.spot_index >= 0) {
            PickupSpot& spot = db.spots[brick.spot_index];
            spot.remaining += 1;
            if (spot.status == SpotStatus::Depleted) spot.status = SpotStatus::Free;
            brick.pose = spot.pose;
            brick.pose.z = brick_kind(brick.color).height_m / 2.0;
        }
    }
    for (auto& t : tasks.tasks) {
        if (t.agent == agent && t.status == TaskStatus::Engaged) {
            t.status = TaskStatus::Failed;
            t.end_s = now_s;
        }
    }
}

}  // namespace

void handle_fault(const FaultEvent& event, Dashboard& db, TaskBook& tasks,
                  ScoreMatrix& score, double now_s) {
    switch (event.type) {
        case FaultType::PickFail:
        case FaultType::PlaceFail:
        case FaultType::ConnectivityLoss:
            release_agent_resources(event.agent, db, tasks, score, now_s);
            break;
        case FaultType::Collision:
            release_agent_resources(event.agent, db, tasks, score, now_s);
            release_agent_resources(event.other_agent, db, tasks, score, now_s);
            break;
        case FaultType::ResetPause:
            break;  // halting is the engine's job; the dashboard stays frozen
    }
}

}  // namespace bricksim
