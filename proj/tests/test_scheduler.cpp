#include <cmath>
#include <random>

#include "doctest.h"

#include "bricksim/scenario.hpp"
#include "bricksim/scheduler.hpp"

using namespace bricksim;

namespace {

const auto R = BrickColor::Red;
const auto G = BrickColor::Green;
const auto B = BrickColor::Blue;
const auto O = BrickColor::Orange;

bool matrices_close(const ScoreMatrix& a, const double (&expect)[4][3],
                    double eps = 1e-12) {
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c)
            if (std::abs(a.at(r, c) - expect[r][c]) > eps) return false;
    return true;
}

Dashboard discovered_dashboard(const Scenario& sc) {
    Dashboard db = build_dashboard(sc);
    db.uav_pile_found = db.ugv_pile_found = true;
    db.uav_site_found = db.ugv_site_found = true;
    return db;
}

}  // namespace

TEST_CASE("increase kernel at the middle cell") {
    ScoreMatrix m;
    increase_cost(m, 1, 1);  // second row, second column
    const double expect[4][3] = {{1, 3, 1}, {3, 5, 3}, {1, 3, 1}, {1, 3, 1}};
    CHECK(matrices_close(m, expect));
}

TEST_CASE("increase kernel at the corner cell") {
    ScoreMatrix m;
    increase_cost(m, 0, 0);
    const double expect[4][3] = {{5, 3, 3}, {3, 1, 1}, {3, 1, 1}, {3, 1, 1}};
    CHECK(matrices_close(m, expect));
}

TEST_CASE("reset kernel is the entrywise reciprocal") {
    ScoreMatrix m;
    reset_cost(m, 1, 1);
    const double expect[4][3] = {
        {1, 1.0 / 3, 1}, {1.0 / 3, 1.0 / 5, 1.0 / 3}, {1, 1.0 / 3, 1}, {1, 1.0 / 3, 1}};
    CHECK(matrices_close(m, expect, 1e-9));
}

TEST_CASE("kernel structure: one 5, row and column of 3s, 1 elsewhere") {
    for (int r = 0; r < ScoreMatrix::kRows; ++r) {
        for (int c = 0; c < ScoreMatrix::kCols; ++c) {
            int fives = 0, threes = 0, ones = 0;
            for (int kr = 0; kr < ScoreMatrix::kRows; ++kr) {
                for (int kc = 0; kc < ScoreMatrix::kCols; ++kc) {
                    const double v = kernel_multiplier(r, c, kr, kc);
                    if (v == 5.0) ++fives;
                    else if (v == 3.0) ++threes;
                    else if (v == 1.0) ++ones;
                }
            }
            CHECK(fives == 1);
            CHECK(threes == ScoreMatrix::kRows - 1 + ScoreMatrix::kCols - 1);
            CHECK(ones == 6);
        }
    }
}

TEST_CASE("successive increases commute") {
    ScoreMatrix ab, ba;
    increase_cost(ab, 0, 2);
    increase_cost(ab, 3, 1);
    increase_cost(ba, 3, 1);
    increase_cost(ba, 0, 2);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(ab.at(r, c) == doctest::Approx(ba.at(r, c)).epsilon(1e-12));
}

TEST_CASE("reset undoes increase on random matrices") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> val(0.1, 50.0);
    std::uniform_int_distribution<int> row(0, 3), col(0, 2);
    for (int trial = 0; trial < 1000; ++trial) {
        ScoreMatrix m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c) m.at(r, c) = val(rng);
        const ScoreMatrix before = m;
        const int sr = row(rng), sc = col(rng);
        increase_cost(m, sr, sc);
        reset_cost(m, sr, sc);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(m.at(r, c) == doctest::Approx(before.at(r, c)).epsilon(1e-9));
    }
}

TEST_CASE("kernel index range is validated") {
    ScoreMatrix m;
    CHECK_THROWS_AS(increase_cost(m, 4, 0), IndexOutOfRange);
    CHECK_THROWS_AS(reset_cost(m, 0, 3), IndexOutOfRange);
    CHECK_THROWS_AS(kernel_multiplier(-1, 0, 0, 0), IndexOutOfRange);
    CHECK_THROWS_AS(m.at(0, -1), IndexOutOfRange);
    CHECK_THROWS_AS(PointsMatrix{}.at(4, 0), IndexOutOfRange);
}

TEST_CASE("travel cost is a scaled Euclidean norm") {
    CostParams p;
    p.k_tr = 1.0;
    CHECK(travel_cost(p, {3, 4, 0}, {0, 0, 0}) == doctest::Approx(5.0));
    p.k_tr = 0.0;
    CHECK(travel_cost(p, {17, -4, 2}, {1, 2, 3}) == doctest::Approx(0.0));
    p.k_tr = 2.0;
    CHECK(travel_cost(p, {7, 7, 7}, {7, 7, 7}) == doctest::Approx(0.0));
}

TEST_CASE("choose_drop picks the single eligible slot") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    CostParams p;
    auto drop = choose_drop(db, O, 2, AgentKind::Uav, {34, 20, 3}, p, SiteKind::UavSite);
    REQUIRE(drop.has_value());
    const BrickSlot& slot = db.slots[drop->slot_index];
    CHECK(slot.required == O);
    CHECK(slot.status == SlotStatus::Reserved);
    CHECK(slot.reserved_by == 2);
    CHECK(db.channels[drop->channel_id].blocked_by == 2);
}

TEST_CASE("choose_drop prefers the nearer channel") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    CostParams p;
    // Green is needed first by channel 0 at y=8 and channel 1 at y=14; an
    // agent parked at channel 1 must choose it. (The first slot of channel 0
    // is Red, so fill it to make Green reachable there.)
    db.slots[0].status = SlotStatus::Filled;
    auto drop = choose_drop(db, G, 0, AgentKind::Uav, {34, 14, 7}, p, SiteKind::UavSite);
    REQUIRE(drop.has_value());
    CHECK(drop->channel_id == 1);
}

TEST_CASE("choose_drop fails when the only channel is blocked") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    CostParams p;
    // Orange fits only the reserved channel on the UAV site; block it.
    block_channel(db, 2, 99);
    CHECK_FALSE(
        choose_drop(db, O, 2, AgentKind::Uav, {34, 20, 3}, p, SiteKind::UavSite));
}

TEST_CASE("choose_drop adds a hindrance cost next to a busy channel") {
    // Four channels in one site; 0 and 3 both accept a Green. Channel 1 is
    // busy, so channel 0 carries the adjacency penalty; the agent crosses to
    // channel 3 even though it is farther away.
    Dashboard db;
    for (int i = 0; i < 4; ++i) {
        Channel ch;
        ch.id = i;
        ch.origin = {i == 3 ? 2.0 : (i == 0 ? 0.0 : 1.0),
                     i == 1 ? 5.0 : (i == 2 ? 6.0 : 0.0), 0.0, 0.0};
        ch.layers = (i == 0 || i == 3) ? std::vector<LayerSpec>{{G}}
                                       : std::vector<LayerSpec>{{R}};
        db.channels.push_back(ch);
        for (auto slot : wall_slots(ch)) {
            slot.index = static_cast<int>(db.slots.size());
            db.slots.push_back(slot);
        }
    }
    block_channel(db, 1, 99);
    CostParams p;  // k_place 5 dominates the extra 2 m of travel
    auto drop = choose_drop(db, G, 0, AgentKind::Uav, {0.5, 0.0, 0.0}, p,
                            SiteKind::UavSite);
    REQUIRE(drop.has_value());
    CHECK(drop->channel_id == 3);

    // Without the busy neighbour the nearer channel wins.
    db.slots[drop->slot_index].status = SlotStatus::Empty;
    db.slots[drop->slot_index].reserved_by = -1;
    release_channel(db, 3, 0);
    release_channel(db, 1, 99);
    drop = choose_drop(db, G, 0, AgentKind::Uav, {0.5, 0.0, 0.0}, p,
                       SiteKind::UavSite);
    REQUIRE(drop.has_value());
    CHECK(drop->channel_id == 0);
}

TEST_CASE("choose_pick maximizes points minus costs") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;
    // All kinds equally distant and unhindered: Red pays the most.
    auto pick = choose_pick(db, score, points, 0, AgentKind::Uav, {11.5, 12.5, 0}, p,
                            PileOwner::UavPile, SiteKind::UavSite);
    REQUIRE(pick.has_value());
    CHECK(pick->color == R);
    CHECK(db.spots[pick->spot_index].status == SpotStatus::Targeted);
    // The increase kernel marked the chosen cell.
    const auto& spot = db.spots[pick->spot_index];
    CHECK(score.at(spot.row, spot.col) == doctest::Approx(5.0));
}

TEST_CASE("choose_pick avoids a spot made expensive by another agent") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;
    auto first = choose_pick(db, score, points, 0, AgentKind::Uav, {10, 8, 0}, p,
                             PileOwner::UavPile, SiteKind::UavSite);
    REQUIRE(first.has_value());
    auto second = choose_pick(db, score, points, 1, AgentKind::Uav, {10, 8, 0}, p,
                              PileOwner::UavPile, SiteKind::UavSite);
    REQUIRE(second.has_value());
    CHECK(second->spot_index != first->spot_index);
}

TEST_CASE("choose_pick respects committed supply") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;
    // Demand on the UAV site right now: R (ch 0), G (ch 1), O (ch 2). With R
    // and O already committed, only Green remains.
    std::array<int, kNumBrickColors> committed{};
    committed[static_cast<int>(R)] = 1;
    committed[static_cast<int>(O)] = 1;
    auto pick = choose_pick(db, score, points, 0, AgentKind::Uav, {10, 8, 0}, p,
                            PileOwner::UavPile, SiteKind::UavSite, committed);
    REQUIRE(pick.has_value());
    CHECK(pick->color == G);
}

TEST_CASE("choose_pick fails when every matching spot is depleted") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;
    for (auto& spot : db.spots) {
        spot.remaining = 0;
        spot.status = SpotStatus::Depleted;
    }
    CHECK_FALSE(choose_pick(db, score, points, 0, AgentKind::Uav, {10, 8, 0}, p,
                            PileOwner::UavPile, SiteKind::UavSite));
}

TEST_CASE("allocate_task explores first, then picks, then rests") {
    Scenario sc = default_scenario();
    Dashboard db = build_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;

    auto alloc = allocate_task(db, score, points, 0, AgentKind::Uav, {4, 2, 0}, p,
                               /*explore_active=*/false);
    CHECK(alloc.status == AllocStatus::Ok);
    CHECK(alloc.variant == TaskVariant::Explore);

    // A second UAV waits while exploration is underway.
    alloc = allocate_task(db, score, points, 1, AgentKind::Uav, {4, 5, 0}, p,
                          /*explore_active=*/true);
    CHECK(alloc.status == AllocStatus::Wait);

    db.uav_pile_found = db.ugv_pile_found = true;
    db.uav_site_found = db.ugv_site_found = true;
    alloc = allocate_task(db, score, points, 0, AgentKind::Uav, {4, 2, 0}, p, false);
    CHECK(alloc.status == AllocStatus::Ok);
    CHECK(alloc.variant == TaskVariant::Pick);
    REQUIRE(alloc.pick.has_value());

    for (auto& slot : db.slots) slot.status = SlotStatus::Filled;
    alloc = allocate_task(db, score, points, 1, AgentKind::Uav, {4, 5, 0}, p, false);
    CHECK(alloc.status == AllocStatus::NothingToDo);
}

TEST_CASE("ugv waits for discovery instead of exploring") {
    Scenario sc = default_scenario();
    Dashboard db = build_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;
    auto alloc =
        allocate_task(db, score, points, 3, AgentKind::Ugv, {4, 32, 0}, p, false);
    CHECK(alloc.status == AllocStatus::Wait);

    db.ugv_pile_found = db.ugv_site_found = true;
    alloc = allocate_task(db, score, points, 3, AgentKind::Ugv, {4, 32, 0}, p, false);
    CHECK(alloc.status == AllocStatus::Ok);
    CHECK(alloc.variant == TaskVariant::Pick);
}

TEST_CASE("fault recovery restores the dashboard and score") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    ScoreMatrix score;
    PointsMatrix points;
    CostParams p;
    TaskBook tasks;

    // Snapshot, engage a pick and a drop, then fail the agent.
    const Dashboard before_db = db;
    auto pick = choose_pick(db, score, points, 0, AgentKind::Uav, {10, 8, 0}, p,
                            PileOwner::UavPile, SiteKind::UavSite);
    REQUIRE(pick.has_value());
    auto drop =
        choose_drop(db, pick->color, 0, AgentKind::Uav, {10, 8, 0}, p, SiteKind::UavSite);
    REQUIRE(drop.has_value());
    Task& t = tasks.open(TaskVariant::Pick, 0, 1.0);

    FaultEvent ev{FaultType::PickFail, 0};
    ev.spot = pick->spot_index;
    handle_fault(ev, db, tasks, score, 2.0);

    // Replay oracle: everything the agent held is back to the snapshot.
    CHECK(db.spots[pick->spot_index].status == before_db.spots[pick->spot_index].status);
    CHECK(db.spots[pick->spot_index].targeted_by == -1);
    CHECK(db.slots[drop->slot_index].status == SlotStatus::Empty);
    CHECK(db.channels[drop->channel_id].blocked_by == -1);
    CHECK(tasks.tasks[t.id].status == TaskStatus::Failed);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(score.at(r, c) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fault recovery returns a held brick to its pile") {
    Scenario sc = default_scenario();
    Dashboard db = discovered_dashboard(sc);
    ScoreMatrix score;
    TaskBook tasks;
    // Grab the top brick of spot 0 by hand.
    const int spot = 0;
    int brick_id = -1;
    for (const auto& b : db.bricks)
        if (b.spot_index == spot) brick_id = b.id;
    REQUIRE(brick_id >= 0);
    db.spots[spot].status = SpotStatus::Targeted;
    db.spots[spot].targeted_by = 7;
    db.spots[spot].remaining -= 1;
    db.bricks[brick_id].state = BrickState::Held;
    db.bricks[brick_id].held_by = 7;
    const int remaining_before = db.spots[spot].remaining;

    handle_fault({FaultType::ConnectivityLoss, 7}, db, tasks, score, 3.0);
    CHECK(db.bricks[brick_id].state == BrickState::InPile);
    CHECK(db.bricks[brick_id].held_by == -1);
    CHECK(db.spots[spot].remaining == remaining_before + 1);
    CHECK(db.spots[spot].status == SpotStatus::Free);
    // Conservation: census still accounts for every brick.
    int total = 0;
    for (const auto& row : db.state_census())
        for (int n : row) total += n;
    CHECK(total == static_cast<int>(db.bricks.size()));
}
