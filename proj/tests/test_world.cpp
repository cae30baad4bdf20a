#include <random>

#include "doctest.h"

#include "bricksim/world.hpp"

using namespace bricksim;

namespace {

const auto R = BrickColor::Red;
const auto G = BrickColor::Green;
const auto B = BrickColor::Blue;
const auto O = BrickColor::Orange;

Channel make_channel(std::vector<LayerSpec> layers, double length = 4.0) {
    Channel ch;
    ch.id = 0;
    ch.origin = {0.0, 0.0, 1.7, 0.0};
    ch.length_m = length;
    ch.layers = std::move(layers);
    return ch;
}

Dashboard dashboard_for(const Channel& ch) {
    Dashboard db;
    db.channels = {ch};
    for (auto slot : wall_slots(ch)) {
        slot.index = static_cast<int>(db.slots.size());
        db.slots.push_back(slot);
    }
    return db;
}

// Independent expansion: offsets are running sums of the brick lengths.
std::vector<double> prefix_sum_offsets(const LayerSpec& layer) {
    std::vector<double> out;
    double acc = 0.0;
    for (auto c : layer) {
        out.push_back(acc);
        acc += brick_kind(c).length_m;
    }
    return out;
}

}  // namespace

TEST_CASE("brick catalogue matches the four kinds") {
    CHECK(brick_kind(R).length_m == doctest::Approx(0.30));
    CHECK(brick_kind(G).length_m == doctest::Approx(0.60));
    CHECK(brick_kind(B).length_m == doctest::Approx(1.20));
    CHECK(brick_kind(O).length_m == doctest::Approx(1.80));
    for (int i = 0; i < kNumBrickColors; ++i) {
        const auto& k = brick_kind(static_cast<BrickColor>(i));
        CHECK(k.width_m == doctest::Approx(0.20));
        CHECK(k.height_m == doctest::Approx(0.20));
    }
    CHECK(brick_kind(R).mass_kg == doctest::Approx(1.0));
    CHECK(brick_kind(G).mass_kg == doctest::Approx(1.0));
    CHECK(brick_kind(B).mass_kg == doctest::Approx(1.5));
    CHECK(brick_kind(O).mass_kg == doctest::Approx(2.0));
}

TEST_CASE("color names round-trip") {
    for (int i = 0; i < kNumBrickColors; ++i) {
        const auto c = static_cast<BrickColor>(i);
        auto back = color_from_name(color_name(c));
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
    CHECK_FALSE(color_from_name("Purple").has_value());
}

TEST_CASE("wall_slots expands [R,G,B] into prefix-sum offsets") {
    const auto slots = wall_slots(make_channel({{R, G, B}}));
    REQUIRE(slots.size() == 3);
    CHECK(slots[0].offset_m == doctest::Approx(0.0));
    CHECK(slots[1].offset_m == doctest::Approx(0.3));
    CHECK(slots[2].offset_m == doctest::Approx(0.9));
    CHECK(slots[0].target.x == doctest::Approx(0.15));
    CHECK(slots[1].target.x == doctest::Approx(0.60));
    CHECK(slots[2].target.x == doctest::Approx(1.50));
    for (const auto& s : slots) {
        CHECK(s.target.z == doctest::Approx(1.80));  // base 1.7 + half height
        CHECK(s.layer == 0);
    }
}

TEST_CASE("wall_slots empty layer list yields no slots") {
    CHECK(wall_slots(make_channel({})).empty());
}

TEST_CASE("wall_slots rejects a layer longer than the channel") {
    CHECK_THROWS_AS(wall_slots(make_channel({{O, O, O}})), LayerOverflow);
}

TEST_CASE("wall_slots rejects off-kind bricks in a reserved channel") {
    Channel ch = make_channel({{O, R}});
    ch.reserved_kind = O;
    CHECK_THROWS_AS(wall_slots(ch), ReservedKindViolation);
    ch.layers = {{O, O}};
    CHECK_NOTHROW(wall_slots(ch));
}

TEST_CASE("wall_slots layer target z steps by one brick height") {
    const auto slots = wall_slots(make_channel({{R}, {R}, {R}}));
    REQUIRE(slots.size() == 3);
    CHECK(slots[0].target.z == doctest::Approx(1.80));
    CHECK(slots[1].target.z == doctest::Approx(2.00));
    CHECK(slots[2].target.z == doctest::Approx(2.20));
}

TEST_CASE("wall_slots agrees with an independent prefix-sum oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> color(0, kNumBrickColors - 1);
    std::uniform_int_distribution<int> layer_count(0, 5);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<LayerSpec> layers;
        const int n_layers = layer_count(rng);
        for (int l = 0; l < n_layers; ++l) {
            LayerSpec layer;
            double used = 0.0;
            while (true) {
                const auto c = static_cast<BrickColor>(color(rng));
                if (used + brick_kind(c).length_m > 4.0) break;
                layer.push_back(c);
                used += brick_kind(c).length_m;
            }
            layers.push_back(layer);
        }
        const auto slots = wall_slots(make_channel(layers));

        size_t i = 0;
        for (size_t l = 0; l < layers.size(); ++l) {
            const auto offsets = prefix_sum_offsets(layers[l]);
            for (size_t p = 0; p < layers[l].size(); ++p, ++i) {
                REQUIRE(i < slots.size());
                CHECK(slots[i].layer == static_cast<int>(l));
                CHECK(slots[i].layer_pos == static_cast<int>(p));
                CHECK(slots[i].required == layers[l][p]);
                CHECK(slots[i].offset_m == doctest::Approx(offsets[p]).epsilon(1e-12));
            }
        }
        CHECK(i == slots.size());

        // Slots within one layer are non-overlapping, ordered intervals.
        for (size_t a = 1; a < slots.size(); ++a) {
            if (slots[a].layer != slots[a - 1].layer) continue;
            const double prev_end =
                slots[a - 1].offset_m + brick_kind(slots[a - 1].required).length_m;
            CHECK(slots[a].offset_m >= prev_end - 1e-9);
        }
    }
}

TEST_CASE("next_required_brick walks the wall layer-major") {
    Dashboard db = dashboard_for(make_channel({{R, G}, {G, R}}));

    auto next = next_required_brick(db, 0);
    REQUIRE(next.has_value());
    CHECK(next->first == 0);
    CHECK(next->second == R);

    // Fill layer 1; the first slot of layer 2 becomes the requirement.
    db.slots[0].status = SlotStatus::Filled;
    db.slots[1].status = SlotStatus::Filled;
    next = next_required_brick(db, 0);
    REQUIRE(next.has_value());
    CHECK(next->first == 2);
    CHECK(next->second == G);

    db.slots[2].status = SlotStatus::Filled;
    db.slots[3].status = SlotStatus::Filled;
    CHECK_FALSE(next_required_brick(db, 0).has_value());
}

TEST_CASE("next_required_brick pauses while a slot is reserved") {
    Dashboard db = dashboard_for(make_channel({{R, G}}));
    db.slots[0].status = SlotStatus::Reserved;
    CHECK_FALSE(next_required_brick(db, 0).has_value());
}

TEST_CASE("slot_reachable follows fill order") {
    Dashboard db = dashboard_for(make_channel({{R, G}, {G, R}}));
    CHECK(db.slot_reachable(0));
    CHECK_FALSE(db.slot_reachable(1));
    CHECK_FALSE(db.slot_reachable(2));
    db.slots[0].status = SlotStatus::Filled;
    CHECK(db.slot_reachable(1));
    CHECK_FALSE(db.slot_reachable(2));  // layer 1 not complete yet
    db.slots[1].status = SlotStatus::Filled;
    CHECK(db.slot_reachable(2));
}

TEST_CASE("channel blocking is exclusive and owner-checked") {
    Dashboard db = dashboard_for(make_channel({{R}}));
    CHECK(block_channel(db, 0, 1) == ChannelOpResult::Ok);
    CHECK(db.channels[0].blocked_by == 1);
    CHECK(block_channel(db, 0, 2) == ChannelOpResult::AlreadyBlocked);
    CHECK(block_channel(db, 0, 1) == ChannelOpResult::Ok);  // re-entrant for owner
    CHECK(release_channel(db, 0, 2) == ChannelOpResult::NotOwner);
    CHECK(db.channels[0].blocked_by == 1);
    CHECK(release_channel(db, 0, 1) == ChannelOpResult::Ok);
    CHECK(db.channels[0].blocked_by == -1);
}

TEST_CASE("channel and site completion") {
    Dashboard db = dashboard_for(make_channel({{R, G}}));
    CHECK_FALSE(db.channel_complete(0));
    CHECK_FALSE(db.site_complete(SiteKind::UavSite));
    CHECK(db.site_complete(SiteKind::UgvSite));  // no channels there
    db.slots[0].status = SlotStatus::Filled;
    db.slots[1].status = SlotStatus::Filled;
    CHECK(db.channel_complete(0));
    CHECK(db.site_complete(SiteKind::UavSite));
}

TEST_CASE("state census counts every brick exactly once") {
    Dashboard db;
    for (int i = 0; i < 10; ++i) {
        BrickInstance b;
        b.id = i;
        b.color = static_cast<BrickColor>(i % kNumBrickColors);
        b.state = static_cast<BrickState>(i % 4);
        db.bricks.push_back(b);
    }
    const auto census = db.state_census();
    int total = 0;
    for (const auto& row : census)
        for (int n : row) total += n;
    CHECK(total == 10);
}
