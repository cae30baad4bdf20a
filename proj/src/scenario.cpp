#include "bricksim/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bricksim {

using nlohmann::json;

Scenario default_scenario() {
    Scenario sc;
    sc.uav_pile.origin = {10.0, 8.0, 0.0};
    sc.ugv_pile.origin = {10.0, 30.0, 0.0};
    sc.ugv_pile.cols = 1;

    const auto R = BrickColor::Red, G = BrickColor::Green, B = BrickColor::Blue,
               O = BrickColor::Orange;

    ChannelConfig uav0;
    uav0.origin = {34.0, 8.0, 1.7};
    uav0.layers = {{R, G, B, G, R}, {R, G, B, G, R}};
    ChannelConfig uav1;
    uav1.origin = {34.0, 14.0, 1.7};
    uav1.layers = {{G, B, G, R}, {G, B, G, R}};
    ChannelConfig uav2;
    uav2.origin = {34.0, 20.0, 1.7};
    uav2.reserved_kind = O;
    uav2.layers = {{O, O}, {O, O}};

    // The L-wall: two orthogonal 4 m arms, 5 layers each; the corner brick
    // belongs to the first arm. One arm is the orange-reserved channel.
    ChannelConfig arm1;
    arm1.origin = {36.0, 26.0, 0.0};
    arm1.site = SiteKind::UgvSite;
    arm1.reserved_kind = O;
    arm1.layers.assign(5, {O, O});
    ChannelConfig arm2;
    arm2.origin = {36.0, 26.2, 0.0};
    arm2.heading = M_PI / 2.0;
    arm2.site = SiteKind::UgvSite;
    arm2.layers.assign(5, {B, B, G, R});

    sc.channels = {uav0, uav1, uav2, arm1, arm2};
    sc.agents = {{0, AgentKind::Uav, {4.0, 2.0, 0.0, 0.0}},
                 {1, AgentKind::Uav, {4.0, 5.0, 0.0, 0.0}},
                 {2, AgentKind::Uav, {4.0, 8.0, 0.0, 0.0}},
                 {3, AgentKind::Ugv, {4.0, 32.0, 0.0, 0.0}}};
    return sc;
}

namespace {

BrickColor parse_color(const json& j, const std::string& where) {
    if (!j.is_string())
        throw ScenarioError(where + ": brick color must be a string");
    auto c = color_from_name(j.get<std::string>());
    if (!c) throw ScenarioError(where + ": unknown brick color '" +
                                j.get<std::string>() + "'");
    return *c;
}

Vec3 parse_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() < 2 || j.size() > 3)
        throw ScenarioError(where + ": expected [x, y] or [x, y, z]");
    Vec3 v{j[0].get<double>(), j[1].get<double>(), 0.0};
    if (j.size() == 3) v.z = j[2].get<double>();
    return v;
}

PileConfig parse_pile(const json& j, const std::string& where) {
    PileConfig p;
    p.origin = parse_vec3(j.at("origin"), where + ".origin");
    p.row_spacing_m = j.value("row_spacing", p.row_spacing_m);
    p.col_spacing_m = j.value("col_spacing", p.col_spacing_m);
    p.cols = j.value("cols", p.cols);
    p.yaw = j.value("yaw", p.yaw);
    p.bricks_per_spot = j.value("bricks_per_spot", p.bricks_per_spot);
    if (p.cols < 1 || p.cols > 3)
        throw ScenarioError(where + ".cols: must be 1..3");
    if (p.bricks_per_spot < 0)
        throw ScenarioError(where + ".bricks_per_spot: must be >= 0");
    return p;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    Scenario sc;
    if (j.contains("arena")) {
        const auto& a = j["arena"];
        sc.bounds.min = parse_vec3(a.at("min"), "arena.min");
        sc.bounds.max = parse_vec3(a.at("max"), "arena.max");
        if (sc.bounds.max.x <= sc.bounds.min.x || sc.bounds.max.y <= sc.bounds.min.y)
            throw ScenarioError("arena: max must exceed min");
    }
    sc.uav_pile = parse_pile(j.at("uav_pile"), "uav_pile");
    sc.ugv_pile = parse_pile(j.at("ugv_pile"), "ugv_pile");

    int ch_idx = 0;
    for (const auto& cj : j.at("channels")) {
        const std::string where = "channels[" + std::to_string(ch_idx++) + "]";
        ChannelConfig ch;
        ch.origin = parse_vec3(cj.at("origin"), where + ".origin");
        ch.heading = cj.value("heading", 0.0);
        ch.length_m = cj.value("length", 4.0);
        const std::string site = cj.value("site", "uav");
        if (site == "uav") ch.site = SiteKind::UavSite;
        else if (site == "ugv") ch.site = SiteKind::UgvSite;
        else throw ScenarioError(where + ".site: expected 'uav' or 'ugv'");
        if (cj.contains("reserved_kind") && !cj["reserved_kind"].is_null())
            ch.reserved_kind = parse_color(cj["reserved_kind"], where + ".reserved_kind");
        if (!cj.contains("layers") || !cj["layers"].is_array())
            throw ScenarioError(where + ".layers: required array of layers");
        for (const auto& lj : cj["layers"]) {
            LayerSpec layer;
            for (const auto& bj : lj) layer.push_back(parse_color(bj, where + ".layers"));
            ch.layers.push_back(layer);
        }
        sc.channels.push_back(ch);
    }

    int ag_idx = 0;
    for (const auto& aj : j.at("agents")) {
        const std::string where = "agents[" + std::to_string(ag_idx) + "]";
        AgentConfig ag;
        ag.id = aj.value("id", ag_idx);
        const std::string kind = aj.at("kind").get<std::string>();
        if (kind == "uav") ag.kind = AgentKind::Uav;
        else if (kind == "ugv") ag.kind = AgentKind::Ugv;
        else throw ScenarioError(where + ".kind: expected 'uav' or 'ugv'");
        const Vec3 s = parse_vec3(aj.at("start"), where + ".start");
        ag.start = {s.x, s.y, s.z, aj.value("yaw", 0.0)};
        if (!sc.bounds.contains(s))
            throw ScenarioError(where + ".start: outside arena bounds");
        sc.agents.push_back(ag);
        ++ag_idx;
    }
    if (sc.agents.empty()) throw ScenarioError("agents: at least one agent required");

    for (const auto& pj : j.value("pauses", json::array())) {
        PauseEvent p;
        p.time_s = pj.at("time").get<double>();
        p.duration_s = pj.at("duration").get<double>();
        if (p.time_s < 0.0 || p.duration_s < 0.0)
            throw ScenarioError("pauses: time and duration must be >= 0");
        sc.pauses.push_back(p);
    }
    if (j.contains("points_rows")) {
        const auto& pr = j["points_rows"];
        if (!pr.is_array() || pr.size() != 4)
            throw ScenarioError("points_rows: expected 4 values");
        for (int i = 0; i < 4; ++i) sc.points_rows[i] = pr[i].get<double>();
    }

    // Validate the wall specs up front so `validate` catches overflows.
    Dashboard probe = build_dashboard(sc);
    (void)probe;
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& sc) {
    json j;
    j["arena"]["min"] = {sc.bounds.min.x, sc.bounds.min.y, sc.bounds.min.z};
    j["arena"]["max"] = {sc.bounds.max.x, sc.bounds.max.y, sc.bounds.max.z};
    auto pile_json = [](const PileConfig& p) {
        json pj;
        pj["origin"] = {p.origin.x, p.origin.y, p.origin.z};
        pj["row_spacing"] = p.row_spacing_m;
        pj["col_spacing"] = p.col_spacing_m;
        pj["cols"] = p.cols;
        pj["yaw"] = p.yaw;
        pj["bricks_per_spot"] = p.bricks_per_spot;
        return pj;
    };
    j["uav_pile"] = pile_json(sc.uav_pile);
    j["ugv_pile"] = pile_json(sc.ugv_pile);
    j["channels"] = json::array();
    for (const auto& ch : sc.channels) {
        json cj;
        cj["origin"] = {ch.origin.x, ch.origin.y, ch.origin.z};
        cj["heading"] = ch.heading;
        cj["length"] = ch.length_m;
        cj["site"] = ch.site == SiteKind::UavSite ? "uav" : "ugv";
        if (ch.reserved_kind) cj["reserved_kind"] = color_name(*ch.reserved_kind);
        cj["layers"] = json::array();
        for (const auto& layer : ch.layers) {
            json lj = json::array();
            for (auto c : layer) lj.push_back(color_name(c));
            cj["layers"].push_back(lj);
        }
        j["channels"].push_back(cj);
    }
    j["agents"] = json::array();
    for (const auto& ag : sc.agents) {
        json aj;
        aj["id"] = ag.id;
        aj["kind"] = ag.kind == AgentKind::Uav ? "uav" : "ugv";
        aj["start"] = {ag.start.x, ag.start.y, ag.start.z};
        aj["yaw"] = ag.start.yaw;
        j["agents"].push_back(aj);
    }
    if (!sc.pauses.empty()) {
        j["pauses"] = json::array();
        for (const auto& p : sc.pauses)
            j["pauses"].push_back({{"time", p.time_s}, {"duration", p.duration_s}});
    }
    j["points_rows"] = sc.points_rows;
    return j.dump(2);
}

Dashboard build_dashboard(const Scenario& sc) {
    Dashboard db;
    int brick_id = 0;

    auto add_pile = [&](const PileConfig& pile, PileOwner owner) {
        for (int r = 0; r < kNumBrickColors; ++r) {
            for (int c = 0; c < pile.cols; ++c) {
                PickupSpot spot;
                spot.index = static_cast<int>(db.spots.size());
                spot.row = r;
                spot.col = c;
                spot.owner = owner;
                spot.remaining = pile.bricks_per_spot;
                spot.status = pile.bricks_per_spot > 0 ? SpotStatus::Free
                                                       : SpotStatus::Depleted;
                const Vec3 local{r * pile.row_spacing_m, c * pile.col_spacing_m, 0.0};
                const Vec3 world = from_frame(local, pile.yaw) + pile.origin;
                spot.pose = {world.x, world.y, 0.0, pile.yaw};
                if (!sc.bounds.contains(world))
                    throw ScenarioError("pile spot outside arena bounds");
                db.spots.push_back(spot);

                const double h = brick_kind(spot.color()).height_m;
                for (int k = 0; k < pile.bricks_per_spot; ++k) {
                    BrickInstance b;
                    b.id = brick_id++;
                    b.color = spot.color();
                    b.state = BrickState::InPile;
                    b.spot_index = spot.index;
                    b.pose = {spot.pose.x, spot.pose.y, (k + 0.5) * h, pile.yaw};
                    db.bricks.push_back(b);
                }
            }
        }
    };
    add_pile(sc.uav_pile, PileOwner::UavPile);
    add_pile(sc.ugv_pile, PileOwner::UgvPile);

    for (size_t i = 0; i < sc.channels.size(); ++i) {
        const auto& cfg = sc.channels[i];
        Channel ch;
        ch.id = static_cast<int>(i);
        ch.origin = {cfg.origin.x, cfg.origin.y, cfg.origin.z, cfg.heading};
        ch.length_m = cfg.length_m;
        ch.reserved_kind = cfg.reserved_kind;
        ch.site = cfg.site;
        ch.layers = cfg.layers;
        db.channels.push_back(ch);
        for (auto slot : wall_slots(ch)) {
            slot.index = static_cast<int>(db.slots.size());
            db.slots.push_back(slot);
        }
    }
    return db;
}

std::vector<Landmark> scenario_landmarks(const Scenario& sc) {
    auto pile_center = [](const PileConfig& p) {
        const Vec3 local{(kNumBrickColors - 1) * p.row_spacing_m / 2.0,
                         (p.cols - 1) * p.col_spacing_m / 2.0, 0.0};
        return from_frame(local, p.yaw) + p.origin;
    };
    std::vector<Landmark> out;
    Vec3 c = pile_center(sc.uav_pile);
    out.push_back({DiscoveryKind::UavPileFound, {c.x, c.y, 0.0, 0.0}});
    c = pile_center(sc.ugv_pile);
    out.push_back({DiscoveryKind::UgvPileFound, {c.x, c.y, 0.0, 0.0}});

    for (auto site : {SiteKind::UavSite, SiteKind::UgvSite}) {
        Vec3 sum{};
        int n = 0;
        for (const auto& ch : sc.channels) {
            if (ch.site != site) continue;
            sum = sum + ch.origin +
                  from_frame({ch.length_m / 2.0, 0.0, 0.0}, ch.heading);
            ++n;
        }
        if (n == 0) continue;
        const Vec3 center = sum * (1.0 / n);
        out.push_back({site == SiteKind::UavSite ? DiscoveryKind::UavSiteFound
                                                 : DiscoveryKind::UgvSiteFound,
                       {center.x, center.y, 0.0, 0.0}});
    }
    return out;
}

void SimConfig::validate() const {
    if (dt <= 0.0) throw ConfigError("dt must be > 0");
    if (max_sim_time_s < 0.0) throw ConfigError("max_sim_time must be >= 0");
    auto prob = [](double p, const char* name) {
        if (p < 0.0 || p > 1.0)
            throw ConfigError(std::string(name) + " must be in [0, 1]");
    };
    prob(faults.p_pick_fail, "p_pick_fail");
    prob(faults.p_place_fail, "p_place_fail");
    if (faults.conn_loss_per_min < 0.0)
        throw ConfigError("conn_loss_per_min must be >= 0");
    if (noise_sigma_px < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (!(explore_fov_rad > 0.0 && explore_fov_rad < M_PI))
        throw ConfigError("explore_fov must be in (0, pi)");
    if (trajectory_every_ticks < 1)
        throw ConfigError("trajectory_every_ticks must be >= 1");
}

}  // namespace bricksim
