// Equations of motion for the mixed drive/brake robot.
//
// Four models are provided: the body-frame equations, the same equations
// expressed in the world frame, the fixed-axis (pivot about a locked brake)
// approximation, and the 1-D tanh-friction model of motion along a line.
// Everything here is a pure function of its arguments.
#pragma once

#include <Eigen/Dense>

#include "mamr/types.hpp"

namespace mamr::dynamics {

/// Planar rotation embedded in 3x3, acting on (x, y, theta) triples.
Eigen::Matrix3d rotation_matrix(double theta);

/// q = R(theta) q_r. Works for positions, velocities or accelerations, as
/// long as the local acceleration is the one from local_accel_vector().
Eigen::Vector3d local_to_global(const Eigen::Vector3d& q_r, double theta);
Eigen::Vector3d global_to_local(const Eigen::Vector3d& q, double theta);

LocalState to_local(const RobotState& s);

/// Position of brake i relative to the center of mass, world axes.
Eigen::Vector2d brake_offset_global(double theta, const RobotParams& p, int i);

/// World position of the brake contact point.
Eigen::Vector2d brake_point_world(const RobotState& s, const RobotParams& p, int i);

/// Contact velocity of brake i in the body frame; the lateral component is
/// always zero because the braked wheel cannot slide sideways.
Eigen::Vector2d brake_velocity_local(const LocalState& s, const RobotParams& p, int i);

/// Contact velocity of brake i in world axes.
Eigen::Vector2d brake_velocity_global(const RobotState& s, const RobotParams& p, int i);

/// World-frame accelerations. The angular equation is evaluated first and
/// substituted into the linear ones.
Accel accel_global(const RobotState& s, const ControlInput& u, const RobotParams& p);

/// Body-frame accelerations (xddot_r, yddot_r, thetaddot). yddot_r is always
/// exactly -alpha * thetaddot.
Accel accel_local(const LocalState& s, const ControlInput& u, const RobotParams& p);

/// [xddot_r - ydot_r thetadot, yddot_r + xdot_r thetadot, thetaddot]: the
/// body-frame acceleration vector that rotates into the world frame.
Eigen::Vector3d local_accel_vector(const LocalState& s, const Accel& a_local);

/// Moment of inertia about brake p: I + m (x_p^2 + y_p^2).
double pivot_inertia(const RobotParams& p, int brake);

/// Angular gain of the pivot model, y_p / I_p. Negative for a brake on the
/// right-hand side.
double pivot_gain(const RobotParams& p, int brake);

/// Rigid rotation about locked brake `brake`; thetaddot = (y_p / I_p) f_d and
/// the center of mass follows the circle around the brake contact.
Accel fixed_axis_accel(const RobotState& s, double f_d, int brake, const RobotParams& p);

/// e_c'' = f_d/m - (gamma1/m) tanh(gamma2 e_c').
double stopping_accel(double e_c_dot, double f_d, double gamma1, double gamma2,
                      const RobotParams& p);

/// mu * m * g / 3 for brake i.
double brake_friction_force(const RobotParams& p, int i);

double kinetic_energy(const RobotState& s, const RobotParams& p);

}  // namespace mamr::dynamics
