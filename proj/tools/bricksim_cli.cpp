#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "bricksim/engine.hpp"
#include "bricksim/scenario.hpp"

namespace {

using namespace bricksim;

// --faults pick=0.3,place=0.1,conn=0.5 (conn in events per minute)
FaultConfig parse_faults(const std::string& spec) {
    FaultConfig fc;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad --faults entry '" + item + "', expected key=value");
        const std::string key = item.substr(0, eq);
        const double val = std::stod(item.substr(eq + 1));
        if (key == "pick") fc.p_pick_fail = val;
        else if (key == "place") fc.p_place_fail = val;
        else if (key == "conn") fc.conn_loss_per_min = val;
        else if (key == "conn_timeout") fc.conn_timeout_s = val;
        else throw ConfigError("unknown --faults key '" + key + "'");
    }
    return fc;
}

int cmd_run(const std::string& scenario_path, const SimConfig& cfg,
            const std::string& out_dir) {
    Scenario sc = load_scenario(scenario_path);
    Simulation sim(cfg, sc);
    Metrics m = sim.run();
    write_outputs(sim.finish_logs(), out_dir);
    std::printf("mission %s  points %.1f  placed %d/%d  makespan %.1f s\n",
                m.mission_complete ? "complete" : "INCOMPLETE", m.total_points,
                m.bricks_placed, m.slots_total, m.makespan_s);
    std::printf("faults: pick %d  place %d  conn %d  collisions %d\n", m.pick_fails,
                m.place_fails, m.conn_losses, m.collisions);
    std::printf("corridor violations: %d\n", m.corridor_violations);
    std::printf("outputs written to %s\n", out_dir.c_str());
    return m.mission_complete ? 0 : 2;
}

int cmd_validate(const std::string& scenario_path) {
    Scenario sc = load_scenario(scenario_path);
    Dashboard db = build_dashboard(sc);
    std::printf("%s: OK (%zu spots, %zu channels, %zu slots, %zu bricks, %zu agents)\n",
                scenario_path.c_str(), db.spots.size(), db.channels.size(),
                db.slots.size(), db.bricks.size(), sc.agents.size());
    return 0;
}

int cmd_slots(const std::string& scenario_path) {
    Scenario sc = load_scenario(scenario_path);
    Dashboard db = build_dashboard(sc);
    std::printf("channel,layer,pos,offset_m,kind,x,y,z,yaw\n");
    for (const auto& s : db.slots)
        std::printf("%d,%d,%d,%.3f,%s,%.3f,%.3f,%.3f,%.3f\n", s.channel_id, s.layer,
                    s.layer_pos, s.offset_m, color_name(s.required), s.target.x,
                    s.target.y, s.target.z, s.target.yaw);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent wall-construction mission simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", faults_spec;
    SimConfig cfg;

    auto* run = app.add_subcommand("run", "Simulate a scenario and write logs");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--seed", cfg.seed, "RNG seed");
    run->add_option("--dt", cfg.dt, "Timestep in seconds");
    run->add_option("--max-time", cfg.max_sim_time_s, "Simulated time budget");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--faults", faults_spec, "pick=P,place=P,conn=RATE_PER_MIN");
    run->add_option("--noise", cfg.noise_sigma_px, "Pixel noise sigma");
    run->add_option("--traj-every", cfg.trajectory_every_ticks,
                    "Log trajectory every N ticks");

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

    auto* slots = app.add_subcommand("slots", "Print the wall slot expansion");
    slots->add_option("scenario", scenario_path, "Scenario JSON file")->required();

    std::string init_path;
    auto* init = app.add_subcommand("init", "Write the default scenario to a file");
    init->add_option("path", init_path, "Destination path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!faults_spec.empty()) cfg.faults = parse_faults(faults_spec);
            return cmd_run(scenario_path, cfg, out_dir);
        }
        if (validate->parsed()) return cmd_validate(scenario_path);
        if (slots->parsed()) return cmd_slots(scenario_path);
        if (init->parsed()) {
            std::ofstream out(init_path);
            if (!out) throw ConfigError("cannot write " + init_path);
            out << scenario_to_json(default_scenario()) << "\n";
            std::printf("wrote %s\n", init_path.c_str());
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
