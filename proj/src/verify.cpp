#include "mamr/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mamr/dynamics.hpp"

namespace mamr::verify {

namespace {

using control::Phase;
using control::TargetConfig;

RobotState random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_real_distribution<double> vel(-1.0, 1.0);
    std::uniform_real_distribution<double> rate(-2.0, 2.0);
    RobotState s;
    s.x = pos(rng);
    s.y = pos(rng);
    s.theta = ang(rng);
    s.xdot = vel(rng);
    s.ydot = vel(rng);
    s.thetadot = rate(rng);
    return s;
}

ControlInput random_input(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> force(-5.0, 5.0);
    std::bernoulli_distribution coin(0.5);
    return {force(rng), coin(rng), coin(rng)};
}

CheckResult at_most(std::string name, double value, double threshold, std::string detail = {}) {
    return {std::move(name), value <= threshold, value, threshold, std::move(detail)};
}

CheckResult at_least(std::string name, double value, double threshold, std::string detail = {}) {
    return {std::move(name), value >= threshold, value, threshold, std::move(detail)};
}

}  // namespace

FrameConsistencyReport check_frame_consistency(std::size_t n, std::uint64_t seed,
                                               double alpha_perturbation, bool zero_velocity) {
    std::mt19937_64 rng(seed);
    const RobotParams p;
    RobotParams p_local = p;
    p_local.brakes[0].x_r += alpha_perturbation;

    FrameConsistencyReport rep;
    rep.samples = n;
    for (std::size_t k = 0; k < n; ++k) {
        RobotState s = random_state(rng);
        ControlInput u = random_input(rng);
        if (zero_velocity) {
            s.xdot = s.ydot = s.thetadot = 0.0;
            u.f1 = u.f2 = false;
        }
        const Accel g = dynamics::accel_global(s, u, p);
        const LocalState ls = dynamics::to_local(s);
        const Accel l = dynamics::accel_local(ls, u, p_local);
        const Eigen::Vector3d rotated =
            dynamics::local_to_global(dynamics::local_accel_vector(ls, l), s.theta);
        const Eigen::Vector3d diff = rotated - Eigen::Vector3d{g.xddot, g.yddot, g.thetaddot};
        rep.max_residual = std::max(rep.max_residual, diff.cwiseAbs().maxCoeff());
    }
    return rep;
}

double sliding_derivative_reduced(double ex, double ey, double xd, double yd, double f_d,
                                  double m, double theta_d) {
    const double r = ey * ey / (ex * ex) + 1.0;
    const double ex2 = ex * ex;
    const double ex3 = ex2 * ex;
    const double ex4 = ex3 * ex;
    const double ex5 = ex4 * ex;
    const double t1 = -yd * (-2.0 * ey * ey * xd / (ex4 * r * r) + xd / (ex2 * r) +
                             2.0 * ey * yd / (ex3 * r * r));
    const double t2 = -xd * (yd / (ex2 * r) + 2.0 * ey * ey * ey * xd / (ex5 * r * r) -
                             2.0 * ey * ey * yd / (ex4 * r * r) - 2.0 * ey * xd / (ex3 * r));
    const double t3 = -f_d * std::sin(theta_d) / (ex * m * r) +
                      f_d * ey * std::cos(theta_d) / (ex2 * m * r);
    return t1 + t2 + t3;
}

double sliding_derivative_direct(const RobotState& s, const TargetConfig& target,
                                 const ControlInput& u, const RobotParams& p, double lambda1) {
    const Accel a = dynamics::accel_global(s, u, p);
    const double ex = target.x_f - s.x;
    const double ey = target.y_f - s.y;
    const double exd = -s.xdot;
    const double eyd = -s.ydot;
    const double exdd = -a.xddot;
    const double eydd = -a.yddot;
    const double r2 = ex * ex + ey * ey;
    const double num = ex * eyd - ey * exd;
    const double bearing_rate = num / r2;
    const double bearing_acc = (ex * eydd - ey * exdd) / r2 - 2.0 * num * (ex * exd + ey * eyd) / (r2 * r2);
    return (bearing_acc - a.thetaddot) + lambda1 * (bearing_rate - s.thetadot);
}

SlidingResidualReport check_sliding_residual(std::size_t n, std::uint64_t seed,
                                             SurfaceSampling mode) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> dist(0.1, 3.0);
    std::uniform_real_distribution<double> vel(-1.0, 1.0);
    std::uniform_real_distribution<double> force(-5.0, 5.0);
    const RobotParams p;
    const control::Gains g;

    SlidingResidualReport rep;
    while (rep.samples < n) {
        const double theta_d = ang(rng);
        if (std::abs(std::cos(theta_d)) < 0.1) continue;  // e_x must stay away from 0
        const double d = dist(rng);
        const double speed = vel(rng);
        TargetConfig target{pos(rng), pos(rng), 0.0};
        RobotState s;
        const double c = std::cos(theta_d);
        const double sn = std::sin(theta_d);
        s.x = target.x_f - d * c;
        s.y = target.y_f - d * sn;
        s.theta = theta_d;
        s.xdot = speed * c;
        s.ydot = speed * sn;
        if (mode == SurfaceSampling::LateralVelocity) {
            const double lateral = 0.2 + 0.8 * std::abs(vel(rng));
            s.xdot += -lateral * sn;
            s.ydot += lateral * c;
        } else if (mode == SurfaceSampling::NonzeroRate) {
            s.thetadot = 0.2 + std::abs(vel(rng));
        }
        const ControlInput u{force(rng), false, false};
        const double scale = 1.0 + std::abs(u.f_d);
        const double ex = target.x_f - s.x;
        const double ey = target.y_f - s.y;
        rep.max_reduced = std::max(
            rep.max_reduced,
            std::abs(sliding_derivative_reduced(ex, ey, s.xdot, s.ydot, u.f_d, p.mass, theta_d)) / scale);
        rep.max_direct = std::max(
            rep.max_direct, std::abs(sliding_derivative_direct(s, target, u, p, g.lambda1)) / scale);
        ++rep.samples;
    }
    return rep;
}

double lyapunov_value(double e_c, double e_c_dot, double k1, double mass) {
    return 0.5 * (k1 / mass) * e_c * e_c + 0.5 * e_c_dot * e_c_dot;
}

LyapunovReport check_lyapunov(std::span<const StopSample> traj, double k1, double mass,
                              double step_tol, double settle_ratio) {
    LyapunovReport rep;
    rep.samples = traj.size();
    if (traj.empty()) {
        rep.monotone = rep.converged = true;
        return rep;
    }
    rep.v0 = lyapunov_value(traj.front().e_c, traj.front().e_c_dot, k1, mass);
    double prev = rep.v0;
    rep.max_increase = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double v = lyapunov_value(traj[i].e_c, traj[i].e_c_dot, k1, mass);
        rep.max_increase = std::max(rep.max_increase, v - prev);
        prev = v;
    }
    rep.v_final = prev;
    rep.monotone = rep.max_increase <= step_tol * rep.v0;
    rep.converged = rep.v_final <= settle_ratio * rep.v0;
    return rep;
}

std::vector<StopSample> stop_samples(std::span<const sim::StepRecord> records,
                                     const TargetConfig& target) {
    std::vector<StopSample> out;
    out.reserve(records.size());
    for (const sim::StepRecord& r : records) {
        const auto [e, ed] = control::signed_path_error(r.state, target, target.theta_f);
        out.push_back({r.state.t, e, ed});
    }
    return out;
}

std::vector<StopSample> stopping_1d_trajectory(double e0, double e_dot0, double k1, double k2,
                                               double gamma1, double gamma2,
                                               const RobotParams& p, double control_period,
                                               double duration, double dt) {
    // Motion along +x with the target at the origin, so e_c = x.
    sim::DynamicsModel model{sim::ModelKind::Stopping1D, gamma1, gamma2};
    RobotState s;
    s.x = e0;
    s.xdot = e_dot0;
    const int n_sub = int(std::lround(control_period / dt));
    const int n_ctrl = int(std::lround(duration / control_period));
    std::vector<StopSample> out;
    long long k = 0;
    for (int c = 0; c <= n_ctrl; ++c) {
        out.push_back({s.t, s.x, s.xdot});
        const ControlInput u{-(k1 * s.x + k2 * s.xdot), false, false};
        for (int i = 0; i < n_sub; ++i) {
            s = sim::step(s, u, p, dt, model);
            s.t = double(++k) * dt;
        }
    }
    return out;
}

std::vector<StopSample> stopping_leg(const scenario::ParkingScenario& sc, double horizon) {
    const scenario::RunResult run = scenario::run_scenario(sc);
    const std::size_t leg = run.leg_starts.back();
    const auto& recs = run.log.records;
    std::size_t start = recs.size();
    for (std::size_t i = leg; i < recs.size(); ++i) {
        if (recs[i].phase == Phase::Slide2Stop) {
            start = i;
            break;
        }
    }
    if (start == recs.size()) return {};

    const TargetConfig target = sc.waypoints.back();
    control::Thresholds hold = sc.thresholds;
    hold.done_pos = 0.0;
    hold.done_vel = 0.0;
    control::SupervisorMemory mem;
    mem.phase = Phase::Slide2Stop;
    auto hook = [&](const RobotState& s) {
        const auto out = control::supervisor(s, target, mem, sc.gains, hold, sc.params,
                                             sc.settings.control_period);
        mem = out.next;
        return sim::ControlSample{out.input, out.next.phase, out.s1.s, out.s2.s, out.e_c};
    };
    sim::IntegrationSettings st = sc.settings;
    st.t_max = horizon;
    const sim::SimulationLog log = sim::simulate(recs[start].state, sc.params, st, hook);
    return stop_samples(log.records, target);
}

ControllabilityReport check_controllability(const RobotParams& p, double gamma1, double gamma2) {
    const double m = p.mass;
    Eigen::Matrix2d a;
    a << 0.0, 1.0, 0.0, -gamma1 * gamma2 / m;
    const Eigen::Vector2d b{0.0, 1.0 / m};
    Eigen::Matrix2d ctrb;
    ctrb.col(0) = b;
    ctrb.col(1) = a * b;
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(ctrb);
    const Eigen::Vector2d sv = svd.singularValues();
    ControllabilityReport rep;
    rep.sigma_max = sv(0);
    rep.sigma_min = sv(1);
    rep.rank = 0;
    for (int i = 0; i < 2; ++i)
        if (sv(i) > 1e-12 * std::max(rep.sigma_max, 1e-300)) ++rep.rank;
    return rep;
}

std::array<double, 2> closed_loop_eigenvalues(const RobotParams& p, double gamma1,
                                              double gamma2, double k1, double k2) {
    const double m = p.mass;
    Eigen::Matrix2d a;
    a << 0.0, 1.0, 0.0, -gamma1 * gamma2 / m;
    const Eigen::Vector2d b{0.0, 1.0 / m};
    const Eigen::RowVector2d k{k1, k2};
    const Eigen::Matrix2d cl = a - b * k;
    const Eigen::EigenSolver<Eigen::Matrix2d> es(cl);
    std::array<double, 2> ev{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::vector<RobotState> pivot_trajectory(const RobotParams& p, sim::ModelKind model,
                                         double f_d, int brake, double duration, double dt) {
    const ControlInput u{f_d, brake == 1, brake == 2};
    const sim::DynamicsModel dm{model, 0.0, 1.0};
    RobotState s;
    std::vector<RobotState> out{s};
    const long long n = std::llround(duration / dt);
    for (long long k = 1; k <= n; ++k) {
        s = sim::step(s, u, p, dt, dm);
        s.t = double(k) * dt;
        out.push_back(s);
    }
    return out;
}

PivotReport check_fixed_axis_pivot(std::span<const RobotState> traj, const RobotParams& p,
                                   int brake) {
    PivotReport rep;
    rep.samples = traj.size();
    if (traj.empty()) return rep;
    const Eigen::Vector2d origin = dynamics::brake_point_world(traj.front(), p, brake);
    for (const RobotState& s : traj)
        rep.max_drift =
            std::max(rep.max_drift, (dynamics::brake_point_world(s, p, brake) - origin).norm());
    return rep;
}

int reaching_sign_changes(const RobotParams& p, int brake, double kp, double kd, double e0,
                          double horizon, double dt) {
    const double arm_sign = p.brake(brake).y_r < 0.0 ? -1.0 : 1.0;
    const sim::DynamicsModel dm{sim::ModelKind::FixedAxis, 0.0, 1.0};
    RobotState s;
    s.theta = -e0;  // desired heading 0, so e = -theta
    int changes = 0;
    int last_sign = e0 > 0.0 ? 1 : -1;
    const long long n = std::llround(horizon / dt);
    for (long long k = 0; k < n; ++k) {
        const double e = -s.theta;
        const double e_dot = -s.thetadot;
        const ControlInput u{arm_sign * (kp * e + kd * e_dot), brake == 1, brake == 2};
        s = sim::step(s, u, p, dt, dm);
        const double e_next = -s.theta;
        if (e_next != 0.0) {
            const int sg = e_next > 0.0 ? 1 : -1;
            if (sg != last_sign) ++changes;
            last_sign = sg;
        }
    }
    return changes;
}

scenario::ParkingScenario canonical_scenario() {
    scenario::ParkingScenario sc;
    sc.name = "canonical";
    sc.initial = {0.0, 1.0, deg2rad(30.0), 0.0, 0.0, 0.0, 0.0};
    sc.waypoints = {{2.0, 0.0, 0.0}};
    sc.settings.model.gamma1 = scenario::default_stopping_gamma1(sc.params);
    sc.settings.model.gamma2 = sc.gains.gamma2;
    return sc;
}

bool Report::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string Report::to_text() const {
    std::string out = fmt::format("verify report  seed={}  samples={}\n", seed, samples);
    std::size_t width = 0;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    for (const auto& c : checks) {
        out += fmt::format("{:<4} {:<{}}  value={:<12.4e} threshold={:<10.3e}", c.passed ? "PASS" : "FAIL",
                           c.name, width, c.value, c.threshold);
        if (!c.detail.empty()) out += "  " + c.detail;
        out += "\n";
    }
    out += fmt::format("{} of {} checks passed\n",
                       std::count_if(checks.begin(), checks.end(),
                                     [](const CheckResult& c) { return c.passed; }),
                       checks.size());
    return out;
}

Report run_all(std::size_t n, std::uint64_t seed) {
    Report rep;
    rep.seed = seed;
    rep.samples = n;
    auto& out = rep.checks;
    const RobotParams p;

    const auto frame = check_frame_consistency(n, seed);
    out.push_back(at_most("frame_consistency", frame.max_residual, 1e-9, "max |a_global - R a_local|"));
    const auto frame_rest = check_frame_consistency(n, seed, 0.0, true);
    out.push_back(at_most("frame_consistency.at_rest", frame_rest.max_residual, 1e-15));
    const auto frame_fault = check_frame_consistency(n, seed, 0.01);
    out.push_back(at_least("frame_consistency.negative_control", frame_fault.max_residual, 1e-6,
                           "alpha perturbed on one side; residual must be large"));

    const auto slide = check_sliding_residual(n, seed);
    out.push_back(at_most("sliding_residual.reduced", slide.max_reduced, 1e-9,
                          "|dS1/dt|/(1+|F_d|), reduced expression"));
    out.push_back(at_most("sliding_residual.direct", slide.max_direct, 1e-9,
                          "|dS1/dt|/(1+|F_d|), from the equations of motion"));
    const auto slide_lat = check_sliding_residual(n, seed, SurfaceSampling::LateralVelocity);
    out.push_back(at_least("sliding_residual.negative_control.lateral", slide_lat.max_reduced, 1e-3,
                           "velocity across the line"));
    const auto slide_rate = check_sliding_residual(n, seed, SurfaceSampling::NonzeroRate);
    out.push_back(at_least("sliding_residual.negative_control.rate", slide_rate.max_direct, 1e-3,
                           "thetadot != 0"));

    const control::Gains g;
    const double gamma1_max = p.mass * p.gravity / 3.0;  // mu at its upper bound
    for (const double gamma1 : {0.0, gamma1_max}) {
        const auto traj = stopping_1d_trajectory(-2.0, 0.0, g.k1, g.k2, gamma1, g.gamma2, p, 0.01, 20.0);
        const auto ly = check_lyapunov(traj, g.k1, p.mass);
        out.push_back({fmt::format("lyapunov.stopping_1d.gamma1={:.3g}", gamma1), ly.passed(),
                       ly.max_increase, 1e-6 * ly.v0,
                       fmt::format("V0={:.3e} V_end/V0={:.3e}", ly.v0, ly.v_final / ly.v0)});
    }
    {
        const auto leg = stopping_leg(canonical_scenario(), 20.0);
        const auto ly = check_lyapunov(leg, g.k1, p.mass);
        out.push_back({"lyapunov.canonical_stopping_leg", ly.passed(), ly.max_increase, 1e-6 * ly.v0,
                       fmt::format("V0={:.3e} V_end/V0={:.3e} samples={}", ly.v0,
                                   ly.v0 > 0 ? ly.v_final / ly.v0 : 0.0, ly.samples)});
        const auto bad = stopping_1d_trajectory(-0.5, 0.0, g.k1, -1.0, 0.0, g.gamma2, p, 0.01, 5.0);
        const auto lb = check_lyapunov(bad, g.k1, p.mass);
        out.push_back({"lyapunov.negative_control.k2<0", !lb.monotone, lb.max_increase, 1e-6 * lb.v0,
                       "violation must be detected"});
    }

    const auto c_default = check_controllability(p, scenario::default_stopping_gamma1(p), g.gamma2);
    out.push_back(at_least("controllability.default", c_default.rank, 2,
                           fmt::format("sigma_min={:.3e}", c_default.sigma_min)));
    const auto c_free = check_controllability(p, 0.0, g.gamma2);
    out.push_back(at_least("controllability.frictionless", c_free.rank, 2));
    RobotParams heavy = p;
    heavy.mass = 1e6;
    const auto c_heavy = check_controllability(heavy, scenario::default_stopping_gamma1(heavy), g.gamma2);
    out.push_back(at_least("controllability.heavy", c_heavy.rank, 2));
    {
        // A deliberately singular pair: B = 0 must be reported rank-deficient.
        RobotParams p_inf = p;
        p_inf.mass = std::numeric_limits<double>::infinity();
        const auto c_bad = check_controllability(p_inf, 0.0, g.gamma2);
        out.push_back({"controllability.negative_control", c_bad.rank < 2, double(c_bad.rank), 2.0,
                       "B = 0 must give rank < 2"});
    }

    {
        const auto k = control::design_stopping_gains(p, 0.0, g.gamma2, {-1.0, -2.0});
        const auto ev = closed_loop_eigenvalues(p, 0.0, g.gamma2, k.k1, k.k2);
        const double err = std::max(std::abs(ev[0] + 2.0), std::abs(ev[1] + 1.0));
        out.push_back(at_most("pole_placement", err, 1e-10,
                              fmt::format("k1={:.6g} k2={:.6g}", k.k1, k.k2)));
        bool rejected = false;
        try {
            control::design_stopping_gains(p, gamma1_max, 10.0, {-1.0, -2.0});
        } catch (const std::invalid_argument&) {
            rejected = true;
        }
        out.push_back({"pole_placement.negative_control", rejected, 0.0, 0.0,
                       "non-positive k2 must be rejected"});
    }

    const double c = dynamics::pivot_gain(p, 1);
    const double kd_bound = control::kd_overdamped_bound(g.kp, c);
    const int crit = reaching_sign_changes(p, 1, g.kp, kd_bound, 1.0, 20.0);
    out.push_back(at_most("overdamping.at_bound", crit, 0, fmt::format("kd={:.6g}", kd_bound)));
    const int under = reaching_sign_changes(p, 1, g.kp, 0.5 * kd_bound, 1.0, 20.0);
    out.push_back(at_least("overdamping.negative_control.half_bound", under, 1));

    const auto still = pivot_trajectory(p, sim::ModelKind::FixedAxis, 0.0, 1, 1.0);
    out.push_back(at_most("fixed_axis_pivot.zero_drive", check_fixed_axis_pivot(still, p, 1).max_drift, 0.0));
    const auto spin = pivot_trajectory(p, sim::ModelKind::FixedAxis, 0.5, 2, 2.0);
    out.push_back(at_most("fixed_axis_pivot.spin_up", check_fixed_axis_pivot(spin, p, 2).max_drift, 1e-6));
    const auto spin_full = pivot_trajectory(p, sim::ModelKind::FullGlobal, 0.5, 2, 2.0);
    const double gap = check_fixed_axis_pivot(spin_full, p, 2).max_drift;
    out.push_back({"fixed_axis_pivot.full_model_gap", true, gap, 0.0, "reported, not asserted"});
    {
        // Unlocked brake: the nominal pivot point must be seen to move.
        const auto free = pivot_trajectory(p, sim::ModelKind::FullGlobal, 0.5, 2, 2.0);
        const double drift = check_fixed_axis_pivot(free, p, 1).max_drift;
        out.push_back(at_least("fixed_axis_pivot.negative_control", drift, 1e-3,
                               "drift of the unlocked brake point"));
    }
    return rep;
}

}  // namespace mamr::verify
