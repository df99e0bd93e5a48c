// mamr: run parking scenarios and the built-in numerical checks.
//
//   mamr run --scenario s.json --out dir [--dt 1e-3] [--control-hz 100] [--t-max 60]
//   mamr batch --dir scenarios/ --out results/
//   mamr verify [--samples 1000] [--seed 20240601]
//
// Exit status: 0 every run parked, 1 a run timed out or a check failed,
// 2 bad configuration or I/O error.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include "mamr/scenario.hpp"
#include "mamr/verify.hpp"

namespace fs = std::filesystem;
using namespace mamr;

namespace {

struct Overrides {
    std::optional<double> dt;
    std::optional<double> control_hz;
    std::optional<double> t_max;
};

void apply(const Overrides& o, scenario::ParkingScenario& sc) {
    if (o.dt) sc.settings.dt_physics = *o.dt;
    if (o.control_hz) {
        if (!(*o.control_hz > 0.0)) throw ConfigError("--control-hz: must be > 0");
        sc.settings.control_period = 1.0 / *o.control_hz;
    }
    if (o.t_max) sc.settings.t_max = *o.t_max;
    sc.validate();
}

bool run_one(const scenario::ParkingScenario& sc, const fs::path& out) {
    const scenario::RunResult r = scenario::run_scenario(sc);
    scenario::write_outputs(r, sc, out);
    const bool ok = r.summary.outcome == scenario::Outcome::Done;
    std::cout << (ok ? "done    " : "timeout ") << sc.name << "  pos_err=" << r.summary.final_error_pos
              << " m  theta_err=" << rad2deg(r.summary.final_error_theta)
              << " deg  t=" << r.summary.settle_time << " s  -> " << out.string() << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sliding-mode parking simulator for a one-wheel, two-brake robot"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, batch_dir;
    Overrides ov;
    auto* run = app.add_subcommand("run", "Run one scenario file");
    run->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--dt", ov.dt, "Physics step (s)");
    run->add_option("--control-hz", ov.control_hz, "Controller rate (Hz)");
    run->add_option("--t-max", ov.t_max, "Time budget for the whole scenario (s)");

    auto* batch = app.add_subcommand("batch", "Run every *.json in a directory");
    batch->add_option("--dir", batch_dir, "Scenario directory")->required()->check(CLI::ExistingDirectory);
    batch->add_option("--out", out_dir, "Output root; one subdirectory per scenario")->required();

    std::size_t samples = 1000;
    std::uint64_t seed = 20240601;
    auto* verify = app.add_subcommand("verify", "Run the numerical checks and print a report");
    verify->add_option("--samples", samples, "Random samples per check");
    verify->add_option("--seed", seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            scenario::ParkingScenario sc = scenario::load_scenario(scenario_path);
            apply(ov, sc);
            return run_one(sc, out_dir) ? 0 : 1;
        }
        if (*batch) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(batch_dir))
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            std::vector<scenario::ParkingScenario> scs;
            std::set<std::string> names;
            for (const auto& f : files) {
                scenario::ParkingScenario sc = scenario::load_scenario(f);
                if (!names.insert(sc.name).second)
                    throw ConfigError(f.string() + ": duplicate scenario name '" + sc.name + "'");
                scs.push_back(std::move(sc));
            }
            bool all = true;
            for (const auto& sc : scs) all = run_one(sc, fs::path(out_dir) / sc.name) && all;
            return all ? 0 : 1;
        }
        if (*verify) {
            const verify::Report rep = verify::run_all(samples, seed);
            std::cout << rep.to_text();
            return rep.all_passed() ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
