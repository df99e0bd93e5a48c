// Parking scenarios: loading, running leg by leg, summarising and writing
// results to disk.
//
// Scenario files are JSON. Angles are given in degrees (`theta_deg`) or,
// as in the metadata the runner writes back out, radians (`theta_rad`).
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mamr/controller.hpp"
#include "mamr/integrator.hpp"
#include "mamr/types.hpp"

namespace mamr::scenario {

struct ParkingScenario {
    std::string name;
    std::string description;  // free text, carried into metadata
    RobotState initial;
    std::vector<control::TargetConfig> waypoints;
    RobotParams params;
    control::Gains gains;
    control::Thresholds thresholds;
    sim::IntegrationSettings settings;

    /// Throws ConfigError with the offending field name.
    void validate() const;
};

enum class Outcome { Done, Timeout };

struct RunSummary {
    double final_error_pos = 0.0;    // m, to the last waypoint
    double final_error_theta = 0.0;  // rad, wrapped
    double settle_time = 0.0;        // s since the initial state
    int brake_switch_count = 0;
    std::map<control::Phase, double> phase_durations;
    Outcome outcome = Outcome::Done;
};

struct RunResult {
    sim::SimulationLog log;
    /// Index into log.records where each leg starts.
    std::vector<std::size_t> leg_starts;
    RunSummary summary;
};

/// Default friction level of the 1-D stopping model, mean(mu) m g / 3.
double default_stopping_gamma1(const RobotParams& p);

/// A missing name defaults to the file stem of `source`, or "unnamed".
ParkingScenario parse_scenario(const std::string& text, const std::string& source = "<string>");
ParkingScenario load_scenario(const std::filesystem::path& path);

/// Fully resolved scenario, angles in radians. Loading it back yields a
/// scenario that runs bit-identically.
std::string scenario_to_json(const ParkingScenario& sc);

/// Runs every waypoint in turn; each leg starts from the exact final state of
/// the previous one with a fresh supervisor. The time budget t_max covers the
/// whole scenario.
RunResult run_scenario(const ParkingScenario& sc);

RunSummary summarize(const sim::SimulationLog& log, const ParkingScenario& sc);

inline constexpr const char* kCsvHeader =
    "t,x,y,theta,xdot,ydot,thetadot,F_d,F1,F2,phase,S1,S2,e_c";

std::string trajectory_csv(const sim::SimulationLog& log);
std::string summary_text(const RunSummary& summary, const std::string& name);

/// Writes trajectory.csv, summary.txt and metadata.json into out_dir
/// (created if needed). Throws std::runtime_error naming the path on I/O
/// failure.
void write_outputs(const RunResult& result, const ParkingScenario& sc,
                   const std::filesystem::path& out_dir);

}  // namespace mamr::scenario
