#include "mamr/dynamics.hpp"

#include <algorithm>

namespace mamr::dynamics {

Eigen::Matrix3d rotation_matrix(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix3d r;
    r << c, -s, 0.0,
         s,  c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

Eigen::Vector3d local_to_global(const Eigen::Vector3d& q_r, double theta) {
    return rotation_matrix(theta) * q_r;
}

Eigen::Vector3d global_to_local(const Eigen::Vector3d& q, double theta) {
    return rotation_matrix(theta).transpose() * q;
}

LocalState to_local(const RobotState& s) {
    const Eigen::Vector3d v = global_to_local({s.xdot, s.ydot, s.thetadot}, s.theta);
    return {s.theta, v.x(), v.y(), v.z()};
}

Eigen::Vector2d brake_offset_global(double theta, const RobotParams& p, int i) {
    const BrakePoint& b = p.brake(i);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {b.x_r * c - b.y_r * s, b.x_r * s + b.y_r * c};
}

Eigen::Vector2d brake_point_world(const RobotState& s, const RobotParams& p, int i) {
    return Eigen::Vector2d{s.x, s.y} + brake_offset_global(s.theta, p, i);
}

Eigen::Vector2d brake_velocity_local(const LocalState& s, const RobotParams& p, int i) {
    return {s.xdot_r - p.brake(i).y_r * s.thetadot, 0.0};
}

Eigen::Vector2d brake_velocity_global(const RobotState& s, const RobotParams& p, int i) {
    const double y_r = p.brake(i).y_r;
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    return {s.xdot * c * c + s.ydot * c * sn - y_r * s.thetadot * c,
            s.xdot * c * sn + s.ydot * sn * sn - y_r * s.thetadot * sn};
}

double brake_friction_force(const RobotParams& p, int i) {
    return p.mu(i) * p.mass * p.gravity / 3.0;
}

Accel accel_global(const RobotState& s, const ControlInput& u, const RobotParams& p) {
    const double m = p.mass;
    const double alpha = p.alpha();
    const double j = p.inertia + m * alpha * alpha;
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double forward = s.xdot * c + s.ydot * sn;

    double torque_sum = 0.0;
    double fx = 0.0;
    double fy = 0.0;
    for (int i = 1; i <= 2; ++i) {
        if (!u.brake(i)) continue;
        const Eigen::Vector2d v = brake_velocity_global(s, p, i);
        const Eigen::Vector2d r = brake_offset_global(s.theta, p, i);
        const double k = p.gravity * p.mu(i) / (3.0 * std::max(v.norm(), p.v_eps));
        torque_sum += m * k * (r.x() * v.y() - r.y() * v.x());
        fx += k * v.x();
        fy += k * v.y();
    }

    Accel a;
    a.thetaddot = -torque_sum / j + m * alpha * s.thetadot * forward / j;
    a.xddot = u.f_d * c / m - fx + alpha * a.thetaddot * sn - s.thetadot * sn * forward;
    a.yddot = u.f_d * sn / m - fy - alpha * a.thetaddot * c + s.thetadot * c * forward;
    return a;
}

Accel accel_local(const LocalState& s, const ControlInput& u, const RobotParams& p) {
    const double m = p.mass;
    const double alpha = p.alpha();
    const double j = p.inertia + m * alpha * alpha;

    double friction = 0.0;
    double torque = 0.0;
    for (int i = 1; i <= 2; ++i) {
        if (!u.brake(i)) continue;
        const double y_r = p.brake(i).y_r;
        const double w = s.xdot_r - y_r * s.thetadot;
        const double k = p.gravity * p.mu(i) / (3.0 * std::max(std::abs(w), p.v_eps));
        friction += k * w;
        torque += m * k * (y_r * s.xdot_r - y_r * y_r * s.thetadot);
    }

    Accel a;
    a.thetaddot = torque / j + m * alpha * s.xdot_r * s.thetadot / j;
    a.xddot = u.f_d / m - friction + s.ydot_r * s.thetadot;
    a.yddot = -alpha * a.thetaddot;
    return a;
}

Eigen::Vector3d local_accel_vector(const LocalState& s, const Accel& a) {
    return {a.xddot - s.ydot_r * s.thetadot, a.yddot + s.xdot_r * s.thetadot, a.thetaddot};
}

double pivot_inertia(const RobotParams& p, int brake) {
    const BrakePoint& b = p.brake(brake);
    return p.inertia + p.mass * (b.x_r * b.x_r + b.y_r * b.y_r);
}

double pivot_gain(const RobotParams& p, int brake) {
    return p.brake(brake).y_r / pivot_inertia(p, brake);
}

Accel fixed_axis_accel(const RobotState& s, double f_d, int brake, const RobotParams& p) {
    const double thetaddot = pivot_gain(p, brake) * f_d;
    const Eigen::Vector2d r = brake_offset_global(s.theta, p, brake);
    const double w2 = s.thetadot * s.thetadot;
    // The contact point is stationary, so the center of mass sits at -r from
    // it and accelerates as -(thetaddot k x r - thetadot^2 r).
    return {thetaddot * r.y() + w2 * r.x(),
            -thetaddot * r.x() + w2 * r.y(),
            thetaddot};
}

double stopping_accel(double e_c_dot, double f_d, double gamma1, double gamma2,
                      const RobotParams& p) {
    return f_d / p.mass - (gamma1 / p.mass) * std::tanh(gamma2 * e_c_dot);
}

double kinetic_energy(const RobotState& s, const RobotParams& p) {
    return 0.5 * p.mass * (s.xdot * s.xdot + s.ydot * s.ydot) +
           0.5 * p.inertia * s.thetadot * s.thetadot;
}

}  // namespace mamr::dynamics
