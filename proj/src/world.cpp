#include "bricksim/world.hpp"

#include <algorithm>

namespace bricksim {

namespace {
constexpr double kBrickHeight = 0.20;

const std::array<BrickKind, kNumBrickColors> kCatalogue = {{
    {BrickColor::Red, 0.30, 0.20, 0.20, 1.0},
    {BrickColor::Green, 0.60, 0.20, 0.20, 1.0},
    {BrickColor::Blue, 1.20, 0.20, 0.20, 1.5},
    {BrickColor::Orange, 1.80, 0.20, 0.20, 2.0},
}};
}  // namespace

const BrickKind& brick_kind(BrickColor color) {
    return kCatalogue[static_cast<int>(color)];
}

const char* color_name(BrickColor color) {
    switch (color) {
        case BrickColor::Red: return "Red";
        case BrickColor::Green: return "Green";
        case BrickColor::Blue: return "Blue";
        case BrickColor::Orange: return "Orange";
    }
    return "?";
}

std::optional<BrickColor> color_from_name(const std::string& name) {
    for (int i = 0; i < kNumBrickColors; ++i) {
        auto c = static_cast<BrickColor>(i);
        if (name == color_name(c)) return c;
    }
    return std::nullopt;
}

std::vector<BrickSlot> wall_slots(const Channel& channel) {
    std::vector<BrickSlot> out;
    for (size_t layer = 0; layer < channel.layers.size(); ++layer) {
        const auto& spec = channel.layers[layer];
        double offset = 0.0;
        for (size_t pos = 0; pos < spec.size(); ++pos) {
            const BrickKind& kind = brick_kind(spec[pos]);
            if (channel.reserved_kind && spec[pos] != *channel.reserved_kind) {
                throw ReservedKindViolation(
                    "channel " + std::to_string(channel.id) + " is reserved for " +
                    color_name(*channel.reserved_kind));
            }
            if (offset + kind.length_m > channel.length_m + 1e-9) {
                throw LayerOverflow("layer " + std::to_string(layer) + " of channel " +
                                    std::to_string(channel.id) + " exceeds " +
                                    std::to_string(channel.length_m) + " m");
            }
            BrickSlot slot;
            slot.channel_id = channel.id;
            slot.layer = static_cast<int>(layer);
            slot.layer_pos = static_cast<int>(pos);
            slot.offset_m = offset;
            slot.required = spec[pos];
            const double along = offset + kind.length_m / 2.0;
            slot.target.x = channel.origin.x + along * std::cos(channel.origin.yaw);
            slot.target.y = channel.origin.y + along * std::sin(channel.origin.yaw);
            slot.target.z = channel.origin.z + layer * kBrickHeight + kBrickHeight / 2.0;
            slot.target.yaw = channel.origin.yaw;
            out.push_back(slot);
            offset += kind.length_m;
        }
    }
    return out;
}

std::vector<int> Dashboard::channel_slots(int channel_id) const {
    std::vector<int> out;
    for (const auto& s : slots)
        if (s.channel_id == channel_id) out.push_back(s.index);
    return out;
}

bool Dashboard::slot_reachable(int slot_index) const {
    const BrickSlot& slot = slots[slot_index];
    for (const auto& s : slots) {
        if (s.channel_id != slot.channel_id) continue;
        const bool earlier = s.layer < slot.layer ||
                             (s.layer == slot.layer && s.layer_pos < slot.layer_pos);
        if (earlier && s.status != SlotStatus::Filled) return false;
    }
    return true;
}

bool Dashboard::channel_complete(int channel_id) const {
    for (const auto& s : slots)
        if (s.channel_id == channel_id && s.status != SlotStatus::Filled) return false;
    return true;
}

bool Dashboard::site_complete(SiteKind site) const {
    for (const auto& ch : channels)
        if (ch.site == site && !channel_complete(ch.id)) return false;
    return true;
}

std::array<std::array<int, 4>, kNumBrickColors> Dashboard::state_census() const {
    std::array<std::array<int, 4>, kNumBrickColors> census{};
    for (const auto& b : bricks)
        census[static_cast<int>(b.color)][static_cast<int>(b.state)]++;
    return census;
}

std::optional<std::pair<int, BrickColor>> next_required_brick(const Dashboard& db,
                                                              int channel_id) {
    for (const auto& s : db.slots) {
        if (s.channel_id != channel_id) continue;
        if (s.status == SlotStatus::Filled) continue;
        if (s.status == SlotStatus::Reserved) return std::nullopt;  // in progress
        if (!db.slot_reachable(s.index)) return std::nullopt;
        return std::make_pair(s.index, s.required);
    }
    return std::nullopt;
}

ChannelOpResult block_channel(Dashboard& db, int channel_id, int agent) {
    Channel& ch = db.channels[channel_id];
    if (ch.blocked_by != -1 && ch.blocked_by != agent)
        return ChannelOpResult::AlreadyBlocked;
    ch.blocked_by = agent;
    return ChannelOpResult::Ok;
}

ChannelOpResult release_channel(Dashboard& db, int channel_id, int agent) {
    Channel& ch = db.channels[channel_id];
    if (ch.blocked_by != agent) return ChannelOpResult::NotOwner;
    ch.blocked_by = -1;
    return ChannelOpResult::Ok;
}

}  // namespace bricksim
