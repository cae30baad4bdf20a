#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bricksim/geometry.hpp"

namespace bricksim {

enum class BrickColor { Red = 0, Green = 1, Blue = 2, Orange = 3 };
constexpr int kNumBrickColors = 4;

struct BrickKind {
    BrickColor color;
    double length_m;
    double width_m;
    double height_m;
    double mass_kg;

    double top_area_m2() const { return length_m * width_m; }
    double face_area_m2() const { return length_m * height_m; }
};

// Fixed catalogue: Red 0.30x0.20x0.20/1kg, Green 0.60/1kg, Blue 1.20/1.5kg,
// Orange 1.80/2kg.
const BrickKind& brick_kind(BrickColor color);
const char* color_name(BrickColor color);
std::optional<BrickColor> color_from_name(const std::string& name);

enum class BrickState { InPile, Held, Placed, Dropped };

struct BrickInstance {
    int id = -1;
    BrickColor color = BrickColor::Red;
    Pose pose;
    BrickState state = BrickState::InPile;
    int spot_index = -1;   // InPile: owning pickup spot
    int held_by = -1;      // Held: agent id
    int slot_index = -1;   // Placed: slot id
};

enum class PileOwner { UavPile, UgvPile };
enum class SpotStatus { Free, Targeted, Depleted };

struct PickupSpot {
    int index = -1;
    int row = 0;  // brick-kind row, 0..3
    int col = 0;  // pile array, 0..2 (UGV pile uses col 0)
    Pose pose;
    PileOwner owner = PileOwner::UavPile;
    SpotStatus status = SpotStatus::Free;
    int targeted_by = -1;
    int remaining = 0;

    BrickColor color() const { return static_cast<BrickColor>(row); }
};

enum class SiteKind { UavSite, UgvSite };

using LayerSpec = std::vector<BrickColor>;

struct Channel {
    int id = -1;
    Pose origin;  // origin.yaw is the along-channel heading; origin.z the base
    double length_m = 4.0;
    std::optional<BrickColor> reserved_kind;
    int blocked_by = -1;
    SiteKind site = SiteKind::UavSite;
    std::vector<LayerSpec> layers;
};

enum class SlotStatus { Empty, Reserved, Filled };

struct BrickSlot {
    int index = -1;
    int channel_id = -1;
    int layer = 0;
    int layer_pos = 0;   // position within the layer
    double offset_m = 0.0;
    Pose target;         // world-frame center of the brick once placed
    BrickColor required = BrickColor::Red;
    SlotStatus status = SlotStatus::Empty;
    int reserved_by = -1;
    int filled_brick = -1;
};

struct LayerOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ReservedKindViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expands a channel's layer spec into placement slots. Offsets are prefix
// sums of the preceding brick lengths (zero inter-brick gap); ordering is
// layer-major then offset. Target z = base + layer*0.20 + 0.10.
std::vector<BrickSlot> wall_slots(const Channel& channel);

struct Dashboard {
    std::vector<PickupSpot> spots;
    std::vector<Channel> channels;
    std::vector<BrickSlot> slots;
    std::vector<BrickInstance> bricks;

    bool uav_pile_found = false;
    bool ugv_pile_found = false;
    bool uav_site_found = false;
    bool ugv_site_found = false;

    bool all_discovered() const {
        return uav_pile_found && ugv_pile_found && uav_site_found && ugv_site_found;
    }

    // Slot indices of a channel, layer-major order (they are stored that way).
    std::vector<int> channel_slots(int channel_id) const;

    // True when every slot preceding this one in its layer is Filled and all
    // lower layers are complete.
    bool slot_reachable(int slot_index) const;

    bool channel_complete(int channel_id) const;
    bool site_complete(SiteKind site) const;

    // Per-color counts over the four lifecycle states, for conservation checks.
    std::array<std::array<int, 4>, kNumBrickColors> state_census() const;
};

// Lowest unfilled, unreserved slot of the channel in layer-major order.
// Layer n+1 becomes eligible only once layer n is fully Filled.
std::optional<std::pair<int, BrickColor>> next_required_brick(const Dashboard& db,
                                                              int channel_id);

enum class ChannelOpResult { Ok, AlreadyBlocked, NotOwner };

ChannelOpResult block_channel(Dashboard& db, int channel_id, int agent);
ChannelOpResult release_channel(Dashboard& db, int channel_id, int agent);

}  // namespace bricksim
