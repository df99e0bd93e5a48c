// Sliding-mode parking controller.
//
// Two straight-line sliding surfaces are used per leg: S1 steers the heading
// onto the bearing of the target point, S2 onto the requested final heading.
// Each surface has a reaching law (one brake locked, PD on the heading error
// through the drive force) and a sliding law (brakes switched on the sign of
// the surface). On S2 the drive force additionally regulates the signed
// along-line error to zero. The supervisor sequences
// Reach1 -> Slide1 -> Reach2 -> Slide2Stop -> Done.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>

#include <Eigen/Core>

#include "mamr/types.hpp"

namespace mamr::control {

inline constexpr double kDefaultDeadband = 0.01;  // rad/s

struct Gains {
    double lambda1 = 3.0;  // 1/s
    double lambda2 = 20.0;  // 1/s
    double kp = 2.0;       // N/rad
    double kd = 2.5;       // N s/rad
    double k1 = 4.0;       // N/m
    double k2 = 6.0;       // N s/m
    double gamma2 = 1.0;   // s/m, tanh sharpness of the 1-D friction model
    double f_max = 2.0;    // N
    double f_min = 0.0;    // N, drive deadzone floor

    void validate() const;
};

struct Thresholds {
    double reach_band = 0.02;  // |S| below which a surface counts as reached (rad/s)
    double near_dist = 0.002;  // distance to the S1 hand-over point ending Slide1 (m)
    double near_speed = 0.005; // speed along S1 required for the hand-over (m/s)
    double done_pos = 0.001;   // m
    double done_vel = 0.001;   // m/s
    double deadband = kDefaultDeadband;  // |S| inside which both brakes stay off
    double align_tol = 0.02;   // lateral offset under which S1 is skipped (m)

    void validate() const;
};

struct TargetConfig {
    double x_f = 0.0;
    double y_f = 0.0;
    double theta_f = 0.0;  // rad
};

struct SurfaceEval {
    double s = 0.0;
    double theta_d = 0.0;
    double e_theta = 0.0;
    double e_theta_dot = 0.0;
    double e_c = 0.0;
    double e_c_dot = 0.0;
};

enum class Phase { Reach1, Slide1, Reach2, Slide2Stop, Done };

std::string_view phase_name(Phase p);

/// Thrown by theta_d1 when the robot sits on the target point.
class BearingUndefined : public std::domain_error {
public:
    BearingUndefined() : std::domain_error("bearing undefined: robot is at the target point") {}
};

/// Bearing of the target point from the robot, full-quadrant.
double theta_d1(const RobotState& s, const TargetConfig& target);

/// S1 = e' + lambda1 e with e = wrap(theta_d1 - theta). The bearing rate is a
/// backward difference against theta_d_prev; pass nullopt on the first
/// control step to treat the bearing as constant.
SurfaceEval eval_s1(const RobotState& s, const TargetConfig& target, const Gains& g,
                    std::optional<double> theta_d_prev, double dt);

/// S2 = -thetadot + lambda2 wrap(theta_f - theta).
SurfaceEval eval_s2(const RobotState& s, double theta_f, const Gains& g);

/// Signed error along the line through the target with direction theta_d.
/// Negative while the target lies ahead of the robot along that direction.
std::pair<double, double> signed_path_error(const RobotState& s, const TargetConfig& target,
                                            double theta_d);

/// Clamp to [-f_max, f_max]; nonzero magnitudes are raised to at least f_min.
double limit_force(double f, const Gains& g);

/// Kp e + Kd e' (unclamped).
double pd_force(double e, double e_dot, const Gains& g);

/// Brake on the side of the target: the one with the largest y_r for
/// target_side > 0, the smallest y_r otherwise.
int reaching_brake(int target_side, const RobotParams& p);

/// Reaching law: lock the brake on the target side and drive with the PD law.
/// The force sign follows y_r of the locked brake so the pivot turns towards
/// the target for either brake.
ControlInput reaching_control(const SurfaceEval& se, const Gains& g, int target_side,
                              const RobotParams& p);

/// sqrt(4 kp / c): the smallest derivative gain for which the pivot error
/// dynamics e'' + c kd e' + c kp e = 0 are not underdamped.
double kd_overdamped_bound(double kp, double c);

/// Brake 1 for s > deadband, brake 2 for s < -deadband, both off in between.
/// direction < 0 (moving backwards) swaps the pair, since the friction torque
/// of a dragging brake reverses with the contact velocity.
std::pair<bool, bool> sliding_brakes(double s, double deadband = kDefaultDeadband,
                                     int direction = 1);

/// -(k1 e_c + k2 e_c'), limited.
double stopping_force(double e_c, double e_c_dot, const Gains& g);

/// Stopping regulator with the S2 brake law running alongside.
ControlInput stopping_control(double e_c, double e_c_dot, const Gains& g, double s2 = 0.0,
                              double deadband = kDefaultDeadband, int direction = 1);

struct StoppingGains {
    double k1 = 0.0;
    double k2 = 0.0;
};

/// Pole placement for the linearized stopping model
/// A = [[0, 1], [0, -gamma1 gamma2 / m]], B = [0, 1/m]^T.
/// Throws std::invalid_argument if a pole is not strictly negative or the
/// resulting gains are not both positive.
StoppingGains design_stopping_gains(const RobotParams& p, double gamma1, double gamma2,
                                    std::array<double, 2> poles);

/// Distance before the target, along the line of bearing theta_d, at which a
/// pivot about `brake` from theta_d to theta_f leaves the center of mass on
/// the line through the target with heading theta_f. Clamped to [0, max_dist];
/// zero when the two headings are (anti)parallel.
double pivot_standoff(double theta_d, double theta_f, const RobotParams& p, int brake,
                      double max_dist = 0.5);

/// Perpendicular distance from the robot to the line through the target
/// with heading theta_f.
double lateral_offset(const RobotState& s, const TargetConfig& target);

struct SupervisorMemory {
    Phase phase = Phase::Reach1;
    std::optional<double> theta_d_prev;
    int reach_side = 0;  // latched target side during a reach phase, 0 = unset
};

struct SupervisorOutput {
    SupervisorMemory next;
    ControlInput input;
    SurfaceEval s1;  // zeros when the bearing is undefined
    SurfaceEval s2;
    double e_c = 0.0;  // along the surface line that is active in `next.phase`
    double e_c_dot = 0.0;
};

/// Centre position after pivoting from s to heading theta_f about `brake`.
Eigen::Vector2d pivot_endpoint(const RobotState& s, double theta_f, const RobotParams& p, int brake);

/// Phase a leg starts in: Done when already parked, Reach2 when pivoting to
/// theta_f in place leaves the robot on the final line (S1 unnecessary),
/// Reach1 otherwise.
Phase initial_phase(const RobotState& s, const TargetConfig& target, const Thresholds& th,
                    const RobotParams& p);

/// One control step. Deterministic; all memory is carried in `mem` and the
/// returned `next`. Several transitions may fire in one call, after which the
/// control law of the resulting phase is emitted.
SupervisorOutput supervisor(const RobotState& s, const TargetConfig& target,
                            const SupervisorMemory& mem, const Gains& g,
                            const Thresholds& th, const RobotParams& p, double dt_control);

}  // namespace mamr::control
