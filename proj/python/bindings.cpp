#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mamr/controller.hpp"
#include "mamr/dynamics.hpp"
#include "mamr/integrator.hpp"
#include "mamr/scenario.hpp"
#include "mamr/verify.hpp"

namespace py = pybind11;
using namespace mamr;

namespace {

py::dict summary_dict(const scenario::RunSummary& s) {
    py::dict d;
    d["final_error_pos"] = s.final_error_pos;
    d["final_error_theta"] = s.final_error_theta;
    d["settle_time"] = s.settle_time;
    d["brake_switch_count"] = s.brake_switch_count;
    d["outcome"] = s.outcome == scenario::Outcome::Done ? "done" : "timeout";
    py::dict phases;
    for (const auto& [ph, dur] : s.phase_durations) phases[py::str(std::string(control::phase_name(ph)))] = dur;
    d["phase_durations"] = phases;
    return d;
}

py::dict run_dict(const scenario::RunResult& r) {
    py::dict d;
    const auto& recs = r.log.records;
    std::vector<double> t, x, y, th, f;
    std::vector<std::string> phase;
    for (const auto& rec : recs) {
        t.push_back(rec.state.t);
        x.push_back(rec.state.x);
        y.push_back(rec.state.y);
        th.push_back(rec.state.theta);
        f.push_back(rec.input.f_d);
        phase.emplace_back(control::phase_name(rec.phase));
    }
    d["t"] = t;
    d["x"] = x;
    d["y"] = y;
    d["theta"] = th;
    d["f_d"] = f;
    d["phase"] = phase;
    d["leg_starts"] = r.leg_starts;
    d["summary"] = summary_dict(r.summary);
    d["csv"] = scenario::trajectory_csv(r.log);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Planar sliding-mode parking simulator for a one-wheel, two-brake robot";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<RobotParams>(m, "RobotParams")
        .def(py::init<>())
        .def_readwrite("mass", &RobotParams::mass)
        .def_readwrite("inertia", &RobotParams::inertia)
        .def_readwrite("gravity", &RobotParams::gravity)
        .def_readwrite("mu_k", &RobotParams::mu_k)
        .def_readwrite("v_eps", &RobotParams::v_eps)
        .def_property_readonly("alpha", &RobotParams::alpha)
        .def_property(
            "brakes",
            [](const RobotParams& p) {
                return std::vector<std::pair<double, double>>{{p.brakes[0].x_r, p.brakes[0].y_r},
                                                              {p.brakes[1].x_r, p.brakes[1].y_r}};
            },
            [](RobotParams& p, const std::array<std::pair<double, double>, 2>& b) {
                for (int i = 0; i < 2; ++i) p.brakes[i] = {b[i].first, b[i].second};
            })
        .def("validate", &RobotParams::validate);

    py::class_<RobotState>(m, "RobotState")
        .def(py::init<>())
        .def(py::init([](double x, double y, double theta, double xdot, double ydot, double thetadot,
                         double t) { return RobotState{x, y, theta, xdot, ydot, thetadot, t}; }),
             py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("theta") = 0.0, py::arg("xdot") = 0.0,
             py::arg("ydot") = 0.0, py::arg("thetadot") = 0.0, py::arg("t") = 0.0)
        .def_readwrite("x", &RobotState::x)
        .def_readwrite("y", &RobotState::y)
        .def_readwrite("theta", &RobotState::theta)
        .def_readwrite("xdot", &RobotState::xdot)
        .def_readwrite("ydot", &RobotState::ydot)
        .def_readwrite("thetadot", &RobotState::thetadot)
        .def_readwrite("t", &RobotState::t)
        .def("__repr__", [](const RobotState& s) {
            return py::str("RobotState(x={}, y={}, theta={}, xdot={}, ydot={}, thetadot={}, t={})")
                .format(s.x, s.y, s.theta, s.xdot, s.ydot, s.thetadot, s.t);
        });

    py::class_<ControlInput>(m, "ControlInput")
        .def(py::init([](double f_d, bool f1, bool f2) { return ControlInput{f_d, f1, f2}; }),
             py::arg("f_d") = 0.0, py::arg("f1") = false, py::arg("f2") = false)
        .def_readwrite("f_d", &ControlInput::f_d)
        .def_readwrite("f1", &ControlInput::f1)
        .def_readwrite("f2", &ControlInput::f2);

    py::class_<Accel>(m, "Accel")
        .def_readonly("xddot", &Accel::xddot)
        .def_readonly("yddot", &Accel::yddot)
        .def_readonly("thetaddot", &Accel::thetaddot)
        .def("__iter__", [](const Accel& a) {
            return py::iter(py::make_tuple(a.xddot, a.yddot, a.thetaddot));
        });

    py::class_<control::TargetConfig>(m, "TargetConfig")
        .def(py::init([](double x, double y, double theta) { return control::TargetConfig{x, y, theta}; }),
             py::arg("x_f"), py::arg("y_f"), py::arg("theta_f") = 0.0)
        .def_readwrite("x_f", &control::TargetConfig::x_f)
        .def_readwrite("y_f", &control::TargetConfig::y_f)
        .def_readwrite("theta_f", &control::TargetConfig::theta_f);

    py::class_<control::Gains>(m, "Gains")
        .def(py::init<>())
        .def_readwrite("lambda1", &control::Gains::lambda1)
        .def_readwrite("lambda2", &control::Gains::lambda2)
        .def_readwrite("kp", &control::Gains::kp)
        .def_readwrite("kd", &control::Gains::kd)
        .def_readwrite("k1", &control::Gains::k1)
        .def_readwrite("k2", &control::Gains::k2)
        .def_readwrite("gamma2", &control::Gains::gamma2)
        .def_readwrite("f_max", &control::Gains::f_max)
        .def_readwrite("f_min", &control::Gains::f_min);

    py::class_<control::SurfaceEval>(m, "SurfaceEval")
        .def_readonly("s", &control::SurfaceEval::s)
        .def_readonly("theta_d", &control::SurfaceEval::theta_d)
        .def_readonly("e_theta", &control::SurfaceEval::e_theta)
        .def_readonly("e_theta_dot", &control::SurfaceEval::e_theta_dot)
        .def_readonly("e_c", &control::SurfaceEval::e_c)
        .def_readonly("e_c_dot", &control::SurfaceEval::e_c_dot);

    py::enum_<sim::ModelKind>(m, "ModelKind")
        .value("FullGlobal", sim::ModelKind::FullGlobal)
        .value("FixedAxis", sim::ModelKind::FixedAxis)
        .value("Stopping1D", sim::ModelKind::Stopping1D);

    m.def("accel_global", &dynamics::accel_global, py::arg("state"), py::arg("u"), py::arg("params"));
    m.def("fixed_axis_accel", &dynamics::fixed_axis_accel, py::arg("state"), py::arg("f_d"),
          py::arg("brake"), py::arg("params"));
    m.def("pivot_gain", &dynamics::pivot_gain, py::arg("params"), py::arg("brake"));
    m.def("kinetic_energy", &dynamics::kinetic_energy, py::arg("state"), py::arg("params"));

    m.def("theta_d1", &control::theta_d1, py::arg("state"), py::arg("target"));
    m.def("eval_s1", &control::eval_s1, py::arg("state"), py::arg("target"), py::arg("gains"),
          py::arg("theta_d_prev") = std::nullopt, py::arg("dt") = 0.01);
    m.def("eval_s2", &control::eval_s2, py::arg("state"), py::arg("theta_f"), py::arg("gains"));
    m.def("kd_overdamped_bound", &control::kd_overdamped_bound, py::arg("kp"), py::arg("c"));
    m.def(
        "design_stopping_gains",
        [](const RobotParams& p, double gamma1, double gamma2, std::array<double, 2> poles) {
            const auto k = control::design_stopping_gains(p, gamma1, gamma2, poles);
            return py::make_tuple(k.k1, k.k2);
        },
        py::arg("params"), py::arg("gamma1"), py::arg("gamma2"), py::arg("poles"));

    m.def(
        "step",
        [](const RobotState& s, const ControlInput& u, const RobotParams& p, double dt, sim::ModelKind kind,
           double gamma1, double gamma2) { return sim::step(s, u, p, dt, {kind, gamma1, gamma2}); },
        py::arg("state"), py::arg("u"), py::arg("params"), py::arg("dt") = 1e-3,
        py::arg("model") = sim::ModelKind::FullGlobal, py::arg("gamma1") = 0.0, py::arg("gamma2") = 1.0);

    m.def(
        "run_scenario_json",
        [](const std::string& text) {
            const auto sc = scenario::parse_scenario(text);
            scenario::RunResult r;
            {
                py::gil_scoped_release release;
                r = scenario::run_scenario(sc);
            }
            return run_dict(r);
        },
        py::arg("text"), "Run a scenario given as JSON text; returns traces, summary and CSV.");
    m.def(
        "run_scenario_file",
        [](const std::string& path) { return run_dict(scenario::run_scenario(scenario::load_scenario(path))); },
        py::arg("path"));
    m.def(
        "resolve_scenario",
        [](const std::string& text) { return scenario::scenario_to_json(scenario::parse_scenario(text)); },
        py::arg("text"), "Fully resolved scenario JSON with defaults filled in.");

    m.def(
        "verify",
        [](std::size_t samples, std::uint64_t seed) {
            const auto rep = verify::run_all(samples, seed);
            py::list checks;
            for (const auto& c : rep.checks) {
                py::dict d;
                d["name"] = c.name;
                d["passed"] = c.passed;
                d["value"] = c.value;
                d["threshold"] = c.threshold;
                d["detail"] = c.detail;
                checks.append(d);
            }
            py::dict out;
            out["passed"] = rep.all_passed();
            out["checks"] = checks;
            out["text"] = rep.to_text();
            return out;
        },
        py::arg("samples") = 1000, py::arg("seed") = 20240601);
}
