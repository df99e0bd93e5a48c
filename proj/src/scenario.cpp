#include "mamr/scenario.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mamr::scenario {

using nlohmann::json;
using control::Phase;

namespace {

// Reads one JSON object, tracking which keys were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return required_number(key);
    }

    double required_number(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) throw ConfigError(field(key) + ": required field missing");
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(field(key) + ": must be finite");
        return d;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        seen_.insert(key);
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        seen_.insert(key);
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
        return v.get<std::string>();
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double read_angle(Section& sec) {
    const bool deg = sec.has("theta_deg");
    const bool rad = sec.has("theta_rad");
    if (deg && rad)
        throw ConfigError(sec.field("theta_deg") + ": give either theta_deg or theta_rad");
    if (rad) return sec.required_number("theta_rad");
    return deg2rad(sec.required_number("theta_deg"));
}

RobotState read_pose(const json& j, const std::string& path) {
    Section sec(j, path);
    RobotState s;
    s.x = sec.required_number("x");
    s.y = sec.required_number("y");
    s.theta = wrap_angle(read_angle(sec));
    sec.finish();
    return s;
}

void read_params(const json& j, RobotParams& p) {
    Section sec(j, "params");
    p.mass = sec.number("mass", p.mass);
    p.inertia = sec.number("inertia", p.inertia);
    p.gravity = sec.number("gravity", p.gravity);
    p.v_eps = sec.number("v_eps", p.v_eps);
    if (sec.has("mu_k")) {
        const json& mu = sec.child("mu_k");
        if (mu.is_number()) {
            p.mu_k = {mu.get<double>(), mu.get<double>()};
        } else if (mu.is_array() && mu.size() == 2 && mu[0].is_number() && mu[1].is_number()) {
            p.mu_k = {mu[0].get<double>(), mu[1].get<double>()};
        } else {
            throw ConfigError("params.mu_k: expected a number or a pair of numbers");
        }
    }
    if (sec.has("brakes")) {
        const json& b = sec.child("brakes");
        if (!b.is_array() || b.size() != 2)
            throw ConfigError("params.brakes: expected an array of two brake positions");
        for (std::size_t i = 0; i < 2; ++i) {
            Section bs(b[i], "params.brakes[" + std::to_string(i) + "]");
            p.brakes[i].x_r = bs.required_number("x_r");
            p.brakes[i].y_r = bs.required_number("y_r");
            bs.finish();
        }
    }
    sec.finish();
}

void read_gains(const json& j, control::Gains& g) {
    Section sec(j, "gains");
    g.lambda1 = sec.number("lambda1", g.lambda1);
    g.lambda2 = sec.number("lambda2", g.lambda2);
    g.kp = sec.number("kp", g.kp);
    g.kd = sec.number("kd", g.kd);
    g.k1 = sec.number("k1", g.k1);
    g.k2 = sec.number("k2", g.k2);
    g.gamma2 = sec.number("gamma2", g.gamma2);
    g.f_max = sec.number("f_max", g.f_max);
    g.f_min = sec.number("f_min", g.f_min);
    sec.finish();
}

void read_thresholds(const json& j, control::Thresholds& t) {
    Section sec(j, "thresholds");
    t.reach_band = sec.number("reach_band", t.reach_band);
    t.near_dist = sec.number("near_dist", t.near_dist);
    t.near_speed = sec.number("near_speed", t.near_speed);
    t.done_pos = sec.number("done_pos", t.done_pos);
    t.done_vel = sec.number("done_vel", t.done_vel);
    t.deadband = sec.number("deadband", t.deadband);
    t.align_tol = sec.number("align_tol", t.align_tol);
    sec.finish();
}

sim::ModelKind parse_model(const std::string& s) {
    if (s == "full_global") return sim::ModelKind::FullGlobal;
    if (s == "fixed_axis") return sim::ModelKind::FixedAxis;
    if (s == "stopping_1d") return sim::ModelKind::Stopping1D;
    throw ConfigError("settings.model: expected full_global, fixed_axis or stopping_1d, got '" +
                      s + "'");
}

sim::Method parse_method(const std::string& s) {
    if (s == "rk4") return sim::Method::RK4;
    if (s == "euler") return sim::Method::Euler;
    throw ConfigError("settings.method: expected rk4 or euler, got '" + s + "'");
}

// Stopping-model friction depends on params, so it is resolved afterwards
// unless given explicitly.
bool read_settings(const json& j, sim::IntegrationSettings& st) {
    Section sec(j, "settings");
    st.dt_physics = sec.number("dt", st.dt_physics);
    if (sec.has("control_hz") && sec.has("control_period"))
        throw ConfigError("settings.control_hz: give either control_hz or control_period");
    if (sec.has("control_hz")) {
        const double hz = sec.required_number("control_hz");
        if (!(hz > 0.0)) throw ConfigError("settings.control_hz: must be > 0");
        st.control_period = 1.0 / hz;
    }
    st.control_period = sec.number("control_period", st.control_period);
    st.t_max = sec.number("t_max", st.t_max);
    st.model.kind = parse_model(sec.string("model", std::string(sim::model_name(st.model.kind))));
    st.method = parse_method(sec.string("method", std::string(sim::method_name(st.method))));
    st.stiction_snap = sec.boolean("stiction_snap", st.stiction_snap);
    const bool explicit_gamma1 = sec.has("stopping_gamma1");
    st.model.gamma1 = sec.number("stopping_gamma1", st.model.gamma1);
    st.model.gamma2 = sec.number("stopping_gamma2", st.model.gamma2);
    sec.finish();
    return explicit_gamma1;
}

json pose_json(const RobotState& s) { return {{"x", s.x}, {"y", s.y}, {"theta_rad", s.theta}}; }

void append_log(sim::SimulationLog& into, const sim::SimulationLog& leg) {
    // The previous leg ends on the state the next leg starts from; keep only
    // the next leg's record for that instant.
    if (!into.records.empty() && !leg.records.empty() &&
        into.records.back().state.t == leg.records.front().state.t)
        into.records.pop_back();
    into.records.insert(into.records.end(), leg.records.begin(), leg.records.end());
    into.timed_out = leg.timed_out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << contents;
    os.flush();
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

double default_stopping_gamma1(const RobotParams& p) {
    return 0.5 * (p.mu_k[0] + p.mu_k[1]) * p.mass * p.gravity / 3.0;
}

void ParkingScenario::validate() const {
    if (name.empty()) throw ConfigError("name: must not be empty");
    if (waypoints.empty()) throw ConfigError("waypoints: at least one waypoint required");
    if (!initial.finite()) throw ConfigError("initial: must be finite");
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const auto& w = waypoints[i];
        if (!std::isfinite(w.x_f) || !std::isfinite(w.y_f) || !std::isfinite(w.theta_f))
            throw ConfigError("waypoints[" + std::to_string(i) + "]: must be finite");
    }
    params.validate();
    gains.validate();
    thresholds.validate();
    settings.validate();
}

ParkingScenario parse_scenario(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    try {
        ParkingScenario sc;
        Section root(j, "");
        const std::filesystem::path src(source);
        sc.name = root.string("name", src.extension() == ".json" ? src.stem().string() : "unnamed");
        sc.description = root.string("description", "");
        if (!root.has("initial")) throw ConfigError("initial: required field missing");
        sc.initial = read_pose(root.child("initial"), "initial");
        if (!root.has("waypoints")) throw ConfigError("waypoints: at least one waypoint required");
        const json& wps = root.child("waypoints");
        if (!wps.is_array()) throw ConfigError("waypoints: expected an array");
        for (std::size_t i = 0; i < wps.size(); ++i) {
            const RobotState w = read_pose(wps[i], "waypoints[" + std::to_string(i) + "]");
            sc.waypoints.push_back({w.x, w.y, w.theta});
        }
        if (root.has("params")) read_params(root.child("params"), sc.params);
        if (root.has("gains")) read_gains(root.child("gains"), sc.gains);
        if (root.has("thresholds")) read_thresholds(root.child("thresholds"), sc.thresholds);
        bool explicit_gamma1 = false;
        if (root.has("settings")) explicit_gamma1 = read_settings(root.child("settings"), sc.settings);
        if (!explicit_gamma1) sc.settings.model.gamma1 = default_stopping_gamma1(sc.params);
        if (!root.has("settings") || !root.child("settings").contains("stopping_gamma2"))
            sc.settings.model.gamma2 = sc.gains.gamma2;
        root.finish();
        sc.validate();
        return sc;
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

ParkingScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError(path.string() + ": cannot open scenario file");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

std::string scenario_to_json(const ParkingScenario& sc) {
    json j;
    j["name"] = sc.name;
    if (!sc.description.empty()) j["description"] = sc.description;
    j["initial"] = pose_json(sc.initial);
    j["waypoints"] = json::array();
    for (const auto& w : sc.waypoints)
        j["waypoints"].push_back({{"x", w.x_f}, {"y", w.y_f}, {"theta_rad", w.theta_f}});
    const RobotParams& p = sc.params;
    j["params"] = {{"mass", p.mass},
                   {"inertia", p.inertia},
                   {"gravity", p.gravity},
                   {"mu_k", {p.mu_k[0], p.mu_k[1]}},
                   {"brakes",
                    {{{"x_r", p.brakes[0].x_r}, {"y_r", p.brakes[0].y_r}},
                     {{"x_r", p.brakes[1].x_r}, {"y_r", p.brakes[1].y_r}}}},
                   {"v_eps", p.v_eps}};
    const control::Gains& g = sc.gains;
    j["gains"] = {{"lambda1", g.lambda1}, {"lambda2", g.lambda2}, {"kp", g.kp},
                  {"kd", g.kd},           {"k1", g.k1},           {"k2", g.k2},
                  {"gamma2", g.gamma2},   {"f_max", g.f_max},     {"f_min", g.f_min}};
    const control::Thresholds& t = sc.thresholds;
    j["thresholds"] = {{"reach_band", t.reach_band}, {"near_dist", t.near_dist},
                       {"near_speed", t.near_speed}, {"done_pos", t.done_pos},
                       {"done_vel", t.done_vel},     {"deadband", t.deadband},
                       {"align_tol", t.align_tol}};
    const sim::IntegrationSettings& st = sc.settings;
    j["settings"] = {{"dt", st.dt_physics},
                     {"control_period", st.control_period},
                     {"t_max", st.t_max},
                     {"model", sim::model_name(st.model.kind)},
                     {"method", sim::method_name(st.method)},
                     {"stiction_snap", st.stiction_snap},
                     {"stopping_gamma1", st.model.gamma1},
                     {"stopping_gamma2", st.model.gamma2}};
    return j.dump(2) + "\n";
}

RunResult run_scenario(const ParkingScenario& sc) {
    sc.validate();
    RunResult result;
    RobotState state = sc.initial;
    const double t_end = sc.initial.t + sc.settings.t_max;

    for (const control::TargetConfig& target : sc.waypoints) {
        sim::IntegrationSettings leg_settings = sc.settings;
        leg_settings.t_max = t_end - state.t;
        if (leg_settings.t_max < sc.settings.dt_physics) {
            result.log.timed_out = true;
            break;
        }
        control::SupervisorMemory mem;
        mem.phase = control::initial_phase(state, target, sc.thresholds, sc.params);
        const double dt_control = sc.settings.control_period;
        auto hook = [&](const RobotState& s) {
            const control::SupervisorOutput out =
                control::supervisor(s, target, mem, sc.gains, sc.thresholds, sc.params, dt_control);
            mem = out.next;
            return sim::ControlSample{out.input, out.next.phase, out.s1.s, out.s2.s, out.e_c};
        };
        const sim::SimulationLog leg = sim::simulate(state, sc.params, leg_settings, hook);
        append_log(result.log, leg);
        result.leg_starts.push_back(result.log.records.size() - leg.records.size());
        state = leg.records.back().state;
        if (leg.timed_out) break;
    }
    result.summary = summarize(result.log, sc);
    return result;
}

RunSummary summarize(const sim::SimulationLog& log, const ParkingScenario& sc) {
    RunSummary sum;
    sum.outcome = log.timed_out ? Outcome::Timeout : Outcome::Done;
    for (Phase ph : {Phase::Reach1, Phase::Slide1, Phase::Reach2, Phase::Slide2Stop, Phase::Done})
        sum.phase_durations[ph] = 0.0;
    if (log.records.empty()) return sum;

    const auto& recs = log.records;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        sum.phase_durations[recs[i].phase] += recs[i + 1].state.t - recs[i].state.t;
        if (recs[i + 1].input.f1 != recs[i].input.f1 || recs[i + 1].input.f2 != recs[i].input.f2)
            ++sum.brake_switch_count;
    }
    const RobotState& last = recs.back().state;
    const control::TargetConfig& goal = sc.waypoints.back();
    sum.final_error_pos = std::hypot(goal.x_f - last.x, goal.y_f - last.y);
    sum.final_error_theta = wrap_angle(goal.theta_f - last.theta);
    sum.settle_time = last.t - sc.initial.t;
    return sum;
}

std::string trajectory_csv(const sim::SimulationLog& log) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const sim::StepRecord& r : log.records) {
        const RobotState& s = r.state;
        out += fmt::format("{},{},{},{},{},{},{},{},{:d},{:d},{},{},{},{}\n", s.t, s.x, s.y,
                           s.theta, s.xdot, s.ydot, s.thetadot, r.input.f_d, int(r.input.f1),
                           int(r.input.f2), control::phase_name(r.phase), r.s1, r.s2, r.e_c);
    }
    return out;
}

std::string summary_text(const RunSummary& s, const std::string& name) {
    std::string out;
    out += fmt::format("name={}\n", name);
    out += fmt::format("outcome={}\n", s.outcome == Outcome::Done ? "done" : "timeout");
    out += fmt::format("final_error_pos={}\n", s.final_error_pos);
    out += fmt::format("final_error_theta={}\n", s.final_error_theta);
    out += fmt::format("final_error_theta_deg={}\n", rad2deg(s.final_error_theta));
    out += fmt::format("settle_time={}\n", s.settle_time);
    out += fmt::format("brake_switch_count={}\n", s.brake_switch_count);
    for (const auto& [ph, dur] : s.phase_durations)
        out += fmt::format("phase_duration.{}={}\n", control::phase_name(ph), dur);
    return out;
}

void write_outputs(const RunResult& result, const ParkingScenario& sc,
                   const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    write_file(out_dir / "trajectory.csv", trajectory_csv(result.log));
    write_file(out_dir / "summary.txt", summary_text(result.summary, sc.name));
    write_file(out_dir / "metadata.json", scenario_to_json(sc));
}

}  // namespace mamr::scenario
