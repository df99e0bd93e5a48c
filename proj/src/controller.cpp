#include "mamr/controller.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mamr/dynamics.hpp"

namespace mamr::control {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
}

int sign_of(double v) { return v < 0.0 ? -1 : 1; }

// Forward speed decides which way a dragging brake turns the body. Near rest
// the commanded force is the best predictor of the coming motion.
int motion_direction(const RobotState& s, double f_d) {
    const double forward = s.xdot * std::cos(s.theta) + s.ydot * std::sin(s.theta);
    if (std::abs(forward) > 1e-6) return sign_of(forward);
    return sign_of(f_d);
}

ControlInput sliding_control(double f_d, double s, const RobotState& state,
                             const Thresholds& th) {
    const auto [b1, b2] = sliding_brakes(s, th.deadband, motion_direction(state, f_d));
    return {f_d, b1, b2};
}

}  // namespace

void Gains::validate() const {
    require(lambda1 > 0.0, "gains.lambda1", "must be > 0");
    require(lambda2 > 0.0, "gains.lambda2", "must be > 0");
    require(kp > 0.0, "gains.kp", "must be > 0");
    require(kd > 0.0, "gains.kd", "must be > 0");
    require(k1 > 0.0, "gains.k1", "must be > 0");
    require(k2 > 0.0, "gains.k2", "must be > 0");
    require(gamma2 > 0.0, "gains.gamma2", "must be > 0");
    require(f_min >= 0.0, "gains.f_min", "must be >= 0");
    require(f_max > f_min, "gains.f_max", "must exceed f_min");
}

void Thresholds::validate() const {
    require(reach_band > 0.0, "thresholds.reach_band", "must be > 0");
    require(near_dist > 0.0, "thresholds.near_dist", "must be > 0");
    require(near_speed > 0.0, "thresholds.near_speed", "must be > 0");
    require(done_pos > 0.0, "thresholds.done_pos", "must be > 0");
    require(done_vel > 0.0, "thresholds.done_vel", "must be > 0");
    require(deadband >= 0.0, "thresholds.deadband", "must be >= 0");
    require(align_tol >= 0.0, "thresholds.align_tol", "must be >= 0");
}

std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::Reach1: return "Reach1";
        case Phase::Slide1: return "Slide1";
        case Phase::Reach2: return "Reach2";
        case Phase::Slide2Stop: return "Slide2Stop";
        case Phase::Done: return "Done";
    }
    return "?";
}

double theta_d1(const RobotState& s, const TargetConfig& target) {
    const double ex = target.x_f - s.x;
    const double ey = target.y_f - s.y;
    if (ex == 0.0 && ey == 0.0) throw BearingUndefined();
    return std::atan2(ey, ex);
}

SurfaceEval eval_s1(const RobotState& s, const TargetConfig& target, const Gains& g,
                    std::optional<double> theta_d_prev, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("eval_s1: dt must be > 0");
    SurfaceEval se;
    se.theta_d = theta_d1(s, target);
    const double bearing_rate =
        theta_d_prev ? wrap_angle(se.theta_d - *theta_d_prev) / dt : 0.0;
    se.e_theta = wrap_angle(se.theta_d - s.theta);
    se.e_theta_dot = bearing_rate - s.thetadot;
    se.s = se.e_theta_dot + g.lambda1 * se.e_theta;
    std::tie(se.e_c, se.e_c_dot) = signed_path_error(s, target, se.theta_d);
    return se;
}

SurfaceEval eval_s2(const RobotState& s, double theta_f, const Gains& g) {
    SurfaceEval se;
    se.theta_d = theta_f;
    se.e_theta = wrap_angle(theta_f - s.theta);
    se.e_theta_dot = -s.thetadot;
    se.s = se.e_theta_dot + g.lambda2 * se.e_theta;
    return se;
}

std::pair<double, double> signed_path_error(const RobotState& s, const TargetConfig& target,
                                            double theta_d) {
    const double c = std::cos(theta_d);
    const double sn = std::sin(theta_d);
    const double ex = target.x_f - s.x;
    const double ey = target.y_f - s.y;
    return {-(ex * c + ey * sn), s.xdot * c + s.ydot * sn};
}

double limit_force(double f, const Gains& g) {
    f = std::clamp(f, -g.f_max, g.f_max);
    if (f != 0.0 && std::abs(f) < g.f_min) f = std::copysign(g.f_min, f);
    return f;
}

double pd_force(double e, double e_dot, const Gains& g) { return g.kp * e + g.kd * e_dot; }

int reaching_brake(int target_side, const RobotParams& p) {
    const bool first_is_left = p.brakes[0].y_r > p.brakes[1].y_r;
    if (target_side > 0) return first_is_left ? 1 : 2;
    return first_is_left ? 2 : 1;
}

ControlInput reaching_control(const SurfaceEval& se, const Gains& g, int target_side,
                              const RobotParams& p) {
    const int brake = reaching_brake(target_side, p);
    const double arm_sign = p.brake(brake).y_r < 0.0 ? -1.0 : 1.0;
    ControlInput u;
    u.f_d = limit_force(arm_sign * pd_force(se.e_theta, se.e_theta_dot, g), g);
    u.f1 = brake == 1;
    u.f2 = brake == 2;
    return u;
}

double kd_overdamped_bound(double kp, double c) {
    if (!(kp > 0.0) || !(c > 0.0))
        throw std::invalid_argument("kd_overdamped_bound: kp and c must be > 0");
    return std::sqrt(4.0 * kp / c);
}

std::pair<bool, bool> sliding_brakes(double s, double deadband, int direction) {
    if (direction < 0) s = -s;
    if (s > deadband) return {true, false};
    if (s < -deadband) return {false, true};
    return {false, false};
}

double stopping_force(double e_c, double e_c_dot, const Gains& g) {
    return limit_force(-(g.k1 * e_c + g.k2 * e_c_dot), g);
}

ControlInput stopping_control(double e_c, double e_c_dot, const Gains& g, double s2,
                              double deadband, int direction) {
    const auto [b1, b2] = sliding_brakes(s2, deadband, direction);
    return {stopping_force(e_c, e_c_dot, g), b1, b2};
}

StoppingGains design_stopping_gains(const RobotParams& p, double gamma1, double gamma2,
                                    std::array<double, 2> poles) {
    if (!(poles[0] < 0.0) || !(poles[1] < 0.0))
        throw std::invalid_argument("design_stopping_gains: poles must be strictly negative");
    if (gamma1 < 0.0 || gamma2 < 0.0)
        throw std::invalid_argument("design_stopping_gains: gamma1, gamma2 must be >= 0");
    // det(sI - (A - BK)) = s^2 + (gamma1 gamma2 + k2)/m s + k1/m
    //                   = s^2 - (p1 + p2) s + p1 p2
    const double m = p.mass;
    StoppingGains k;
    k.k1 = m * poles[0] * poles[1];
    k.k2 = -m * (poles[0] + poles[1]) - gamma1 * gamma2;
    if (!(k.k1 > 0.0) || !(k.k2 > 0.0))
        throw std::invalid_argument("design_stopping_gains: poles yield non-positive gain");
    return k;
}

double pivot_standoff(double theta_d, double theta_f, const RobotParams& p, int brake,
                      double max_dist) {
    const double denom = std::sin(theta_d - theta_f);
    if (std::abs(denom) < 1e-6) return 0.0;
    const BrakePoint& b = p.brake(brake);
    const Eigen::Vector2d arm{b.x_r, b.y_r};
    const Eigen::Vector2d before = dynamics::rotation_matrix(theta_d).topLeftCorner<2, 2>() * arm;
    const Eigen::Vector2d after = dynamics::rotation_matrix(theta_f).topLeftCorner<2, 2>() * arm;
    const Eigen::Vector2d normal{-std::sin(theta_f), std::cos(theta_f)};
    const double d = normal.dot(before - after) / denom;
    return std::clamp(d, 0.0, max_dist);
}

double lateral_offset(const RobotState& s, const TargetConfig& target) {
    return std::abs(-std::sin(target.theta_f) * (s.x - target.x_f) +
                    std::cos(target.theta_f) * (s.y - target.y_f));
}

Eigen::Vector2d pivot_endpoint(const RobotState& s, double theta_f, const RobotParams& p, int brake) {
    const BrakePoint& b = p.brake(brake);
    const Eigen::Vector2d arm{b.x_r, b.y_r};
    const Eigen::Vector2d anchor = dynamics::brake_point_world(s, p, brake);
    return anchor - dynamics::rotation_matrix(theta_f).topLeftCorner<2, 2>() * arm;
}

Phase initial_phase(const RobotState& s, const TargetConfig& target, const Thresholds& th,
                    const RobotParams& p) {
    const double dist = std::hypot(target.x_f - s.x, target.y_f - s.y);
    if (dist < th.done_pos && s.speed() < th.done_vel) return Phase::Done;
    const int side = sign_of(wrap_angle(target.theta_f - s.theta));
    RobotState after = s;
    if (side != 0) {
        const Eigen::Vector2d c = pivot_endpoint(s, target.theta_f, p, reaching_brake(side, p));
        after.x = c.x();
        after.y = c.y();
    }
    if (lateral_offset(after, target) <= th.align_tol) return Phase::Reach2;
    return Phase::Reach1;
}

SupervisorOutput supervisor(const RobotState& s, const TargetConfig& target,
                            const SupervisorMemory& mem, const Gains& g,
                            const Thresholds& th, const RobotParams& p, double dt_control) {
    SupervisorOutput out;
    out.next = mem;
    SupervisorMemory& next = out.next;

    const double dist = std::hypot(target.x_f - s.x, target.y_f - s.y);
    const bool bearing_defined = dist > 1e-9;
    if (bearing_defined) {
        out.s1 = eval_s1(s, target, g, mem.theta_d_prev, dt_control);
        next.theta_d_prev = out.s1.theta_d;
    }
    out.s2 = eval_s2(s, target.theta_f, g);
    std::tie(out.s2.e_c, out.s2.e_c_dot) = signed_path_error(s, target, target.theta_f);

    auto enter = [&](Phase ph) {
        next.phase = ph;
        next.reach_side = 0;
    };

    // Transitions only move forward, so this settles in at most four passes.
    for (int pass = 0; pass < 5; ++pass) {
        const Phase before = next.phase;
        switch (next.phase) {
            case Phase::Reach1:
                if (!bearing_defined) enter(Phase::Reach2);
                else if (std::abs(out.s1.s) <= th.reach_band) enter(Phase::Slide1);
                break;
            case Phase::Slide1: {
                if (!bearing_defined || dist <= th.near_dist) {
                    enter(Phase::Reach2);
                    break;
                }
                const double turn = wrap_angle(target.theta_f - out.s1.theta_d);
                const double standoff = pivot_standoff(out.s1.theta_d, target.theta_f, p,
                                                       reaching_brake(sign_of(turn), p));
                if (std::abs(out.s1.e_c + standoff) <= th.near_dist &&
                    std::abs(out.s1.e_c_dot) <= th.near_speed)
                    enter(Phase::Reach2);
                break;
            }
            case Phase::Reach2:
                if (std::abs(out.s2.s) <= th.reach_band) enter(Phase::Slide2Stop);
                break;
            case Phase::Slide2Stop:
                if (std::abs(out.s2.e_c) < th.done_pos && s.speed() < th.done_vel)
                    enter(Phase::Done);
                break;
            case Phase::Done:
                break;
        }
        if (next.phase == before) break;
    }

    switch (next.phase) {
        case Phase::Reach1:
        case Phase::Reach2: {
            const SurfaceEval& se = next.phase == Phase::Reach1 ? out.s1 : out.s2;
            if (next.reach_side == 0) next.reach_side = sign_of(se.e_theta);
            out.input = reaching_control(se, g, next.reach_side, p);
            break;
        }
        case Phase::Slide1: {
            const double turn = wrap_angle(target.theta_f - out.s1.theta_d);
            const double standoff = pivot_standoff(out.s1.theta_d, target.theta_f, p,
                                                   reaching_brake(sign_of(turn), p));
            const double f_d = stopping_force(out.s1.e_c + standoff, out.s1.e_c_dot, g);
            out.input = sliding_control(f_d, out.s1.s, s, th);
            break;
        }
        case Phase::Slide2Stop: {
            const double f_d = stopping_force(out.s2.e_c, out.s2.e_c_dot, g);
            out.input = sliding_control(f_d, out.s2.s, s, th);
            break;
        }
        case Phase::Done:
            out.input = {};
            break;
    }

    const bool on_s1 = next.phase == Phase::Reach1 || next.phase == Phase::Slide1;
    out.e_c = on_s1 ? out.s1.e_c : out.s2.e_c;
    out.e_c_dot = on_s1 ? out.s1.e_c_dot : out.s2.e_c_dot;
    return out;
}

}  // namespace mamr::control
