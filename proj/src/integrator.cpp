#include "mamr/integrator.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "mamr/dynamics.hpp"

namespace mamr::sim {

namespace {

using Vec6 = std::array<double, 6>;

Vec6 pack(const RobotState& s) { return {s.x, s.y, s.theta, s.xdot, s.ydot, s.thetadot}; }

RobotState unpack(const Vec6& v, double t) { return {v[0], v[1], v[2], v[3], v[4], v[5], t}; }

Vec6 derivative(const Vec6& v, const ControlInput& u, const RobotParams& p,
                const DynamicsModel& model) {
    const Accel a = evaluate_model(unpack(v, 0.0), u, p, model);
    return {v[3], v[4], v[5], a.xddot, a.yddot, a.thetaddot};
}

Vec6 axpy(const Vec6& x, double h, const Vec6& k) {
    Vec6 r;
    for (std::size_t i = 0; i < 6; ++i) r[i] = x[i] + h * k[i];
    return r;
}

std::string describe(const RobotState& s) {
    std::ostringstream os;
    os.precision(17);
    os << "t=" << s.t << " x=" << s.x << " y=" << s.y << " theta=" << s.theta
       << " xdot=" << s.xdot << " ydot=" << s.ydot << " thetadot=" << s.thetadot;
    return os.str();
}

}  // namespace

std::string_view model_name(ModelKind k) {
    switch (k) {
        case ModelKind::FullGlobal: return "full_global";
        case ModelKind::FixedAxis: return "fixed_axis";
        case ModelKind::Stopping1D: return "stopping_1d";
    }
    return "?";
}

std::string_view method_name(Method m) { return m == Method::RK4 ? "rk4" : "euler"; }

int IntegrationSettings::substeps() const {
    return int(std::lround(control_period / dt_physics));
}

void IntegrationSettings::validate() const {
    if (!(dt_physics > 0.0)) throw ConfigError("settings.dt: must be > 0");
    if (!(control_period >= dt_physics))
        throw ConfigError("settings.control_hz: control period must be >= dt");
    const int n = substeps();
    if (std::abs(n * dt_physics - control_period) > 1e-9 * control_period)
        throw ConfigError("settings.control_hz: control period must be an integer multiple of dt");
    if (!(t_max > 0.0)) throw ConfigError("settings.t_max: must be > 0");
    if (model.gamma1 < 0.0 || !(model.gamma2 > 0.0))
        throw ConfigError("settings.model: gamma1 must be >= 0 and gamma2 > 0");
}

Accel evaluate_model(const RobotState& s, const ControlInput& u, const RobotParams& p,
                     const DynamicsModel& model) {
    switch (model.kind) {
        case ModelKind::FullGlobal:
            return dynamics::accel_global(s, u, p);
        case ModelKind::FixedAxis: {
            if (u.active_count() != 1)
                throw std::invalid_argument("fixed-axis model needs exactly one active brake");
            return dynamics::fixed_axis_accel(s, u.f_d, u.f1 ? 1 : 2, p);
        }
        case ModelKind::Stopping1D: {
            const double c = std::cos(s.theta);
            const double sn = std::sin(s.theta);
            const double a = dynamics::stopping_accel(s.xdot * c + s.ydot * sn, u.f_d,
                                                      model.gamma1, model.gamma2, p);
            return {a * c, a * sn, 0.0};
        }
    }
    return {};
}

RobotState apply_stiction_snap(const RobotState& before, const RobotState& after,
                               const ControlInput& u, const RobotParams& p) {
    RobotState out = after;
    for (int i = 1; i <= 2; ++i) {
        if (!u.brake(i)) continue;
        if (std::abs(u.f_d) >= dynamics::brake_friction_force(p, i)) continue;
        const LocalState lb = dynamics::to_local(before);
        const LocalState la = dynamics::to_local(out);
        const double w_before = dynamics::brake_velocity_local(lb, p, i).x();
        const double w_after = dynamics::brake_velocity_local(la, p, i).x();
        if (!(w_before * w_after < 0.0)) continue;

        const double y = p.brake(i).y_r;
        const double alpha = p.alpha();
        const double j = p.inertia + p.mass * alpha * alpha;
        const double k = w_after / (1.0 / p.mass + y * y / j);
        const double u_new = la.xdot_r - k / p.mass;
        const double w_new = la.thetadot + k * y / j;
        const double v_new = la.ydot_r - alpha * (w_new - la.thetadot);
        const Eigen::Vector3d g = dynamics::local_to_global({u_new, v_new, w_new}, out.theta);
        out.xdot = g.x();
        out.ydot = g.y();
        out.thetadot = g.z();
    }
    return out;
}

RobotState step(const RobotState& s, const ControlInput& u, const RobotParams& p, double dt,
                const DynamicsModel& model, Method method, bool stiction_snap) {
    const Vec6 y0 = pack(s);
    Vec6 y1;
    if (method == Method::Euler) {
        y1 = axpy(y0, dt, derivative(y0, u, p, model));
    } else {
        const Vec6 k1 = derivative(y0, u, p, model);
        const Vec6 k2 = derivative(axpy(y0, 0.5 * dt, k1), u, p, model);
        const Vec6 k3 = derivative(axpy(y0, 0.5 * dt, k2), u, p, model);
        const Vec6 k4 = derivative(axpy(y0, dt, k3), u, p, model);
        for (std::size_t i = 0; i < 6; ++i)
            y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    RobotState out = unpack(y1, s.t + dt);
    if (stiction_snap && model.kind == ModelKind::FullGlobal)
        out = apply_stiction_snap(s, out, u, p);
    out.theta = wrap_angle(out.theta);
    if (!out.finite())
        throw NumericalError("non-finite state after step from " + describe(s) +
                             " with f_d=" + std::to_string(u.f_d) + " dt=" + std::to_string(dt));
    return out;
}

SimulationLog simulate(const RobotState& initial, const RobotParams& p,
                       const IntegrationSettings& settings, const ControlHook& hook) {
    settings.validate();
    SimulationLog log;
    const int n_sub = settings.substeps();
    const double t0 = initial.t;
    RobotState state = initial;
    long long k = 0;
    for (;;) {
        const ControlSample sample = hook(state);
        StepRecord rec;
        rec.state = state;
        rec.input = sample.input;
        rec.phase = sample.phase;
        rec.s1 = sample.s1;
        rec.s2 = sample.s2;
        rec.e_c = sample.e_c;
        rec.accel = evaluate_model(state, sample.input, p, settings.model);
        log.records.push_back(rec);
        if (sample.phase == control::Phase::Done) break;
        if (state.t - t0 >= settings.t_max - 0.5 * settings.dt_physics) {
            log.timed_out = true;
            break;
        }
        for (int i = 0; i < n_sub; ++i) {
            state = step(state, sample.input, p, settings.dt_physics, settings.model,
                         settings.method, settings.stiction_snap);
            state.t = t0 + double(++k) * settings.dt_physics;
        }
    }
    return log;
}

}  // namespace mamr::sim
