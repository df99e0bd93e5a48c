#include <doctest.h>

#include <cmath>

#include "mamr/controller.hpp"
#include "mamr/dynamics.hpp"

using namespace mamr;
using namespace mamr::control;
using doctest::Approx;

namespace {
RobotState at(double x, double y, double theta = 0.0) {
    RobotState s;
    s.x = x;
    s.y = y;
    s.theta = theta;
    return s;
}
}  // namespace

TEST_CASE("bearing to target") {
    CHECK(theta_d1(at(0, 0), {2, 0, 0}) == 0.0);
    CHECK(theta_d1(at(0, 1), {2, 0, 0}) == Approx(-0.4636476090008061).epsilon(1e-12));
    CHECK(theta_d1(at(2, 0), {0, 0, 0}) == Approx(kPi));
    CHECK_THROWS_AS(theta_d1(at(1, 1), {1, 1, 0}), BearingUndefined);
}

TEST_CASE("S1 surface") {
    Gains g;
    g.lambda1 = 2.0;
    const TargetConfig tgt{2, 0, 0};
    RobotState s = at(0, 0, 0.0);
    CHECK(eval_s1(s, tgt, g, 0.0, 0.01).s == 0.0);
    s.theta = -0.1;
    const SurfaceEval se = eval_s1(s, tgt, g, 0.0, 0.01);
    CHECK(se.e_theta == Approx(0.1));
    CHECK(se.s == Approx(0.2));
    s.theta = 0.1;
    CHECK(eval_s1(s, tgt, g, 0.0, 0.01).s == Approx(-0.2));
    // Bearing rate by finite difference across a control period.
    s.theta = 0.0;
    CHECK(eval_s1(s, tgt, g, -0.001, 0.01).e_theta_dot == Approx(0.1));
    CHECK_THROWS(eval_s1(s, tgt, g, std::nullopt, 0.0));
}

TEST_CASE("S2 surface") {
    Gains g;
    g.lambda2 = 2.0;
    RobotState s = at(0, 0, 0.3);
    CHECK(eval_s2(s, 0.3, g).s == 0.0);
    s.theta = 0.1;
    CHECK(eval_s2(s, 0.0, g).s == Approx(-0.2));
}

TEST_CASE("surfaces are unchanged by a full turn of theta") {
    const Gains g;
    const TargetConfig tgt{1.5, -0.7, 0.4};
    RobotState s = at(0.2, 0.3, 0.8);
    s.thetadot = 0.05;
    RobotState t = s;
    t.theta += 2 * kPi;
    CHECK(eval_s1(s, tgt, g, 0.1, 0.01).s == Approx(eval_s1(t, tgt, g, 0.1, 0.01).s).epsilon(1e-12));
    CHECK(eval_s2(s, tgt.theta_f, g).s == Approx(eval_s2(t, tgt.theta_f, g).s).epsilon(1e-12));
    CHECK(theta_d1(s, tgt) == theta_d1(t, tgt));
}

TEST_CASE("signed path error") {
    const auto [e, ed] = signed_path_error(at(0, 0), {2, 0, 0}, 0.0);
    CHECK(e == Approx(-2.0));
    CHECK(ed == 0.0);
    RobotState s = at(2, 0);
    s.xdot = 0.3;
    const auto [e2, ed2] = signed_path_error(s, {2, 0, 0}, 0.0);
    CHECK(e2 == 0.0);
    CHECK(ed2 == Approx(0.3));
}

TEST_CASE("reaching law") {
    Gains g;
    g.kp = 10.0;
    g.kd = 2.0;
    g.f_max = 100.0;
    CHECK(pd_force(0.5, -0.1, g) == Approx(4.8));
    const RobotParams p;
    SurfaceEval se;
    ControlInput u = reaching_control(se, g, 1, p);
    CHECK(u.f_d == 0.0);
    CHECK(u.f1);
    CHECK_FALSE(u.f2);
    se.e_theta = 0.5;
    se.e_theta_dot = -0.1;
    u = reaching_control(se, g, -1, p);
    // Brake 2 sits at negative y_r, so the force flips to turn the same way.
    CHECK(u.f2);
    CHECK(u.f_d == Approx(-4.8));
    CHECK(dynamics::pivot_gain(p, 2) * u.f_d > 0.0);
    g.f_max = 2.0;
    CHECK(reaching_control(se, g, 1, p).f_d == 2.0);
}

TEST_CASE("overdamping bound") {
    CHECK(kd_overdamped_bound(1.0, 4.0) == Approx(1.0));
    CHECK(kd_overdamped_bound(10.0, 1.0 / 0.6) == Approx(4.898979485566356).epsilon(1e-12));
    CHECK_THROWS_AS(kd_overdamped_bound(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("sliding brakes") {
    CHECK(sliding_brakes(0.5) == std::pair{true, false});
    CHECK(sliding_brakes(-0.5) == std::pair{false, true});
    CHECK(sliding_brakes(0.0) == std::pair{false, false});
    CHECK(sliding_brakes(0.005, 0.01) == std::pair{false, false});
    CHECK(sliding_brakes(0.5, 0.01, -1) == std::pair{false, true});
}

TEST_CASE("stopping law") {
    Gains g;
    g.k1 = 5.0;
    g.k2 = 3.0;
    g.f_max = 100.0;
    CHECK(stopping_force(0.0, 0.0, g) == 0.0);
    CHECK(stopping_force(-2.0, 0.0, g) == Approx(10.0));
    g.f_max = 2.0;
    CHECK(stopping_force(-2.0, 0.0, g) == 2.0);
    g.f_min = 0.5;
    CHECK(limit_force(0.1, g) == 0.5);
    CHECK(limit_force(-0.1, g) == -0.5);
    CHECK(limit_force(0.0, g) == 0.0);
}

TEST_CASE("stopping gain design") {
    RobotParams p;
    p.mass = 1.0;
    const auto k = design_stopping_gains(p, 0.0, 1.0, {-1.0, -2.0});
    CHECK(k.k1 == Approx(2.0));
    CHECK(k.k2 == Approx(3.0));
    CHECK_THROWS_AS(design_stopping_gains(p, 0.0, 1.0, {1.0, -2.0}), std::invalid_argument);
    CHECK_THROWS_AS(design_stopping_gains(p, 5.0, 1.0, {-1.0, -2.0}), std::invalid_argument);
}

TEST_CASE("gain and threshold validation") {
    Gains g;
    CHECK_NOTHROW(g.validate());
    g.k2 = 0.0;
    CHECK_THROWS(g.validate());
    g = {};
    g.f_min = g.f_max;
    CHECK_THROWS(g.validate());
    Thresholds t;
    CHECK_NOTHROW(t.validate());
    t.done_pos = -1.0;
    CHECK_THROWS(t.validate());
}

TEST_CASE("pivot standoff puts the centre on the final line") {
    const RobotParams p;
    for (double thf : {0.0, deg2rad(45.0), deg2rad(75.0)}) {
        const TargetConfig tgt{2.0, 1.0, thf};
        const double thd = theta_d1(at(0, 0), tgt);
        const int side = wrap_angle(thf - thd) > 0 ? 1 : -1;
        const int brake = reaching_brake(side, p);
        const double d = pivot_standoff(thd, thf, p, brake);
        RobotState s = at(tgt.x_f - d * std::cos(thd), tgt.y_f - d * std::sin(thd), thd);
        const Eigen::Vector2d c = pivot_endpoint(s, thf, p, brake);
        RobotState after = at(c.x(), c.y(), thf);
        CHECK(lateral_offset(after, tgt) <= 1e-12);
    }
    CHECK(pivot_standoff(0.3, 0.3, p, 1) == 0.0);
}

TEST_CASE("supervisor") {
    const RobotParams p;
    const Gains g;
    const Thresholds th;
    SUBCASE("at target and at rest ends the leg with zero input") {
        SupervisorMemory mem;
        mem.phase = Phase::Slide2Stop;
        const auto out = supervisor(at(2, 0), {2, 0, 0}, mem, g, th, p, 0.01);
        CHECK(out.next.phase == Phase::Done);
        CHECK(out.input == ControlInput{});
        CHECK(initial_phase(at(2, 0), {2, 0, 0}, th, p) == Phase::Done);
    }
    SUBCASE("canonical start reaches with brake 2 and forward drive") {
        const RobotState s = at(0, 1, deg2rad(30.0));
        const TargetConfig tgt{2, 0, 0};
        SupervisorMemory mem;
        mem.phase = initial_phase(s, tgt, th, p);
        CHECK(mem.phase == Phase::Reach1);
        const auto out = supervisor(s, tgt, mem, g, th, p, 0.01);
        CHECK(out.next.phase == Phase::Reach1);
        CHECK(out.input.f2);
        CHECK_FALSE(out.input.f1);
        CHECK(out.input.f_d > 0.0);
    }
    SUBCASE("on the final line the leg starts at Reach2") {
        CHECK(initial_phase(at(0, 0), {2, 0, 0}, th, p) == Phase::Reach2);
        CHECK(initial_phase(at(0, 0.5), {2, 0, 0}, th, p) == Phase::Reach1);
    }
    SUBCASE("deterministic") {
        const RobotState s = at(0.3, 0.8, 0.2);
        SupervisorMemory mem;
        mem.theta_d_prev = -0.3;
        const auto a = supervisor(s, {2, 0, 0}, mem, g, th, p, 0.01);
        const auto b = supervisor(s, {2, 0, 0}, mem, g, th, p, 0.01);
        CHECK(a.input == b.input);
        CHECK(a.next.phase == b.next.phase);
    }
}
