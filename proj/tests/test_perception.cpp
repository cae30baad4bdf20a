#include <cmath>
#include <random>

#include "doctest.h"

#include "bricksim/perception.hpp"

using namespace bricksim;

namespace {

const auto R = BrickColor::Red;
const auto G = BrickColor::Green;

CameraModel downward_cam() {
    CameraModel cam;  // focal 500 px, 640x480, downward
    return cam;
}

// Brick whose top face sits depth_m below a camera at agent_z.
BrickInstance brick_below(BrickColor color, double x, double y, double agent_z,
                          double depth_m, double yaw = 0.0) {
    BrickInstance b;
    b.id = 1;
    b.color = color;
    const double h = brick_kind(color).height_m;
    b.pose = {x, y, agent_z - depth_m - h / 2.0, yaw};
    return b;
}

}  // namespace

TEST_CASE("downward projection of a centered brick") {
    const CameraModel cam = downward_cam();
    const Pose agent{5.0, 5.0, 2.2, 0.0};
    const auto obs = observe_brick(cam, agent, brick_below(R, 5.0, 5.0, 2.2, 2.0));
    REQUIRE(obs.has_value());
    CHECK(obs->center_x_px == doctest::Approx(320.0));
    CHECK(obs->center_y_px == doctest::Approx(240.0));
    CHECK(obs->yaw_rad == doctest::Approx(0.0));
    CHECK(obs->area_px2 == doctest::Approx(0.06 * 500.0 * 500.0 / 4.0));  // 3750
    CHECK(obs->depth_m == doctest::Approx(2.0));
}

TEST_CASE("downward projection shifts with lateral offset") {
    const CameraModel cam = downward_cam();
    const Pose agent{5.0, 5.0, 2.2, 0.0};
    const auto obs = observe_brick(cam, agent, brick_below(R, 5.4, 5.0, 2.2, 2.0));
    REQUIRE(obs.has_value());
    CHECK(obs->center_x_px == doctest::Approx(320.0 + 500.0 * 0.4 / 2.0));  // 420
    CHECK(obs->center_y_px == doctest::Approx(240.0));
}

TEST_CASE("brick outside the frustum is not observed") {
    const CameraModel cam = downward_cam();
    const Pose agent{5.0, 5.0, 2.2, 0.0};
    CHECK_FALSE(observe_brick(cam, agent, brick_below(R, 9.0, 5.0, 2.2, 2.0)));
    // A brick above the camera is never visible to a downward camera.
    BrickInstance high = brick_below(R, 5.0, 5.0, 2.2, 2.0);
    high.pose.z = 5.0;
    CHECK_FALSE(observe_brick(cam, agent, high));
}

TEST_CASE("projection matches an independent pinhole oracle") {
    const CameraModel cam = downward_cam();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> off(-0.8, 0.8);
    std::uniform_real_distribution<double> depth(0.5, 6.0);
    std::uniform_real_distribution<double> yaw(-M_PI, M_PI);
    for (int i = 0; i < 200; ++i) {
        const double ax = 10.0, ay = 10.0, ayaw = yaw(rng);
        const double dx = off(rng), dy = off(rng), d = depth(rng);
        const Pose agent{ax, ay, 3.0 + d, ayaw};
        const auto b = brick_below(G, ax + dx, ay + dy, agent.z, d, yaw(rng));
        const auto obs = observe_brick(cam, agent, b);
        if (!obs) continue;

        // Oracle: rotate the offset into the camera frame by hand.
        const double c = std::cos(ayaw), s = std::sin(ayaw);
        const double ex = c * dx + s * dy;
        const double ey = -s * dx + c * dy;
        CHECK(obs->center_x_px == doctest::Approx(320.0 + 500.0 * ex / d).epsilon(1e-9));
        CHECK(obs->center_y_px == doctest::Approx(240.0 + 500.0 * ey / d).epsilon(1e-9));
        CHECK(obs->area_px2 ==
              doctest::Approx(0.12 * 500.0 * 500.0 / (d * d)).epsilon(1e-9));

        // Back-projection recovers the lateral offset.
        const double bx = (obs->center_x_px - 320.0) * obs->depth_m / 500.0;
        const double by = (obs->center_y_px - 240.0) * obs->depth_m / 500.0;
        CHECK(bx == doctest::Approx(ex).epsilon(1e-9));
        CHECK(by == doctest::Approx(ey).epsilon(1e-9));
    }
}

TEST_CASE("projected area scales with inverse depth squared") {
    const CameraModel cam = downward_cam();
    double reference = -1.0;
    for (double d : {1.0, 2.0, 3.5, 5.0}) {
        const Pose agent{5.0, 5.0, 1.0 + d, 0.0};
        const auto obs = observe_brick(cam, agent, brick_below(R, 5.0, 5.0, agent.z, d));
        REQUIRE(obs.has_value());
        const double product = obs->area_px2 * d * d;
        if (reference < 0.0) reference = product;
        CHECK(product == doctest::Approx(reference).epsilon(1e-9));
    }
}

TEST_CASE("observed yaw is wrapped to a half turn") {
    const CameraModel cam = downward_cam();
    const Pose agent{5.0, 5.0, 2.2, 0.0};
    const auto a = observe_brick(cam, agent, brick_below(R, 5.0, 5.0, 2.2, 2.0, 0.3));
    const auto b =
        observe_brick(cam, agent, brick_below(R, 5.0, 5.0, 2.2, 2.0, 0.3 + M_PI));
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->yaw_rad == doctest::Approx(0.3));
    CHECK(b->yaw_rad == doctest::Approx(a->yaw_rad));  // ambiguous by half a turn
    CHECK(a->yaw_rad > -M_PI / 2.0);
    CHECK(a->yaw_rad <= M_PI / 2.0);
}

TEST_CASE("forward camera reports bearing and face area") {
    const CameraModel cam = downward_cam();
    BrickInstance b;
    b.color = G;
    b.pose = {4.0, 0.0, 0.1, 0.0};
    const Pose agent{0.0, 0.0, 0.0, 0.0};
    const auto obs = observe_brick_forward(cam, agent, b);
    REQUIRE(obs.has_value());
    CHECK(obs->center_x_px == doctest::Approx(320.0));
    CHECK(obs->depth_m == doctest::Approx(4.0));
    CHECK(obs->area_px2 == doctest::Approx(0.6 * 0.2 * 500.0 * 500.0 / 16.0));

    // Bearing to the left of the heading lands left of the image center.
    b.pose = {4.0, -1.0, 0.1, 0.0};
    const auto left = observe_brick_forward(cam, agent, b);
    REQUIRE(left.has_value());
    CHECK(left->center_x_px < 320.0);

    // Behind the vehicle: outside the horizontal field of view.
    b.pose = {-4.0, 0.0, 0.1, 0.0};
    CHECK_FALSE(observe_brick_forward(cam, agent, b));
}

namespace {

Dashboard edge_fixture(std::vector<LayerSpec> layers, double heading = 0.0) {
    Channel ch;
    ch.id = 0;
    ch.origin = {10.0, 10.0, 0.0, heading};
    ch.layers = std::move(layers);
    Dashboard db;
    db.channels = {ch};
    for (auto slot : wall_slots(ch)) {
        slot.index = static_cast<int>(db.slots.size());
        db.slots.push_back(slot);
    }
    return db;
}

}  // namespace

TEST_CASE("edge of an empty channel is its origin") {
    Dashboard db = edge_fixture({{R, G}});
    const Pose agent{10.5, 10.5, 1.0, 0.0};
    const auto edge = observe_edge(agent, db.channels[0], db, 6.0);
    REQUIRE(edge.has_value());
    CHECK(edge->along_channel_m == doctest::Approx(0.0));
    CHECK(edge->edge_world.x == doctest::Approx(10.0));
    CHECK(edge->edge_world.y == doctest::Approx(10.0));
    CHECK(edge->layer == 0);
}

TEST_CASE("edge advances past the last laid brick") {
    Dashboard db = edge_fixture({{R, G}});
    db.slots[0].status = SlotStatus::Filled;
    const Pose agent{10.5, 10.5, 1.0, 0.0};
    const auto edge = observe_edge(agent, db.channels[0], db, 6.0);
    REQUIRE(edge.has_value());
    CHECK(edge->along_channel_m == doctest::Approx(0.30));
    CHECK(edge->edge_world.x == doctest::Approx(10.30));

    // Finishing the layer moves the edge back to the start of the next layer.
    Dashboard two = edge_fixture({{R}, {R}});
    two.slots[0].status = SlotStatus::Filled;
    const auto upper = observe_edge(agent, two.channels[0], two, 6.0);
    REQUIRE(upper.has_value());
    CHECK(upper->layer == 1);
    CHECK(upper->along_channel_m == doctest::Approx(0.0));
    CHECK(upper->edge_world.z == doctest::Approx(0.20));
}

TEST_CASE("edge respects sensing radius and completion") {
    Dashboard db = edge_fixture({{R}});
    CHECK_FALSE(observe_edge({40.0, 40.0, 1.0, 0.0}, db.channels[0], db, 6.0));
    db.slots[0].status = SlotStatus::Filled;
    CHECK_FALSE(observe_edge({10.5, 10.5, 1.0, 0.0}, db.channels[0], db, 6.0));
}

TEST_CASE("edge pose is expressed in the agent frame") {
    Dashboard db = edge_fixture({{R, G}}, M_PI / 2.0);
    const Pose agent{10.0, 9.0, 0.5, M_PI / 2.0};
    const auto edge = observe_edge(agent, db.channels[0], db, 6.0);
    REQUIRE(edge.has_value());
    // Channel start is 1 m ahead of the agent along its own heading.
    CHECK(edge->edge_local.x == doctest::Approx(1.0));
    CHECK(edge->edge_local.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(edge->edge_local.yaw == doctest::Approx(0.0));
}

TEST_CASE("discoveries require footprint containment") {
    CameraModel cam;
    cam.width_px = 640;
    cam.height_px = 640;
    cam.focal_px = 320.0;  // half-footprint = altitude
    const std::vector<Landmark> lms = {
        {DiscoveryKind::UgvPileFound, {12.0, 30.0, 0.0, 0.0}},
        {DiscoveryKind::UavSiteFound, {14.0, 30.0, 0.0, 0.0}},
        {DiscoveryKind::UavPileFound, {40.0, 5.0, 0.0, 0.0}},
    };

    // Footprint at 10 m altitude spans +/-10 m: sees the first two landmarks.
    auto events = discoveries(cam, {10.0, 30.0, 10.0, 0.0}, lms);
    REQUIRE(events.size() == 2);
    CHECK(events[0].kind == DiscoveryKind::UgvPileFound);
    CHECK(events[1].kind == DiscoveryKind::UavSiteFound);

    CHECK(discoveries(cam, {10.0, 5.0, 10.0, 0.0}, lms).empty());
    CHECK(discoveries(cam, {10.0, 30.0, 0.0, 0.0}, lms).empty());  // grounded
}
