// Core value types shared by every module: robot parameters, planar state,
// actuator command and acceleration triples.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mamr {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Raised when a configuration or parameter set violates its invariants.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when integration produces a non-finite state.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Position of a brake contact in the body frame (m).
struct BrakePoint {
    double x_r = 0.0;
    double y_r = 0.0;
};

/// Physical constants and brake geometry.
///
/// The longitudinal brake offset used by the nonholonomic coupling is the
/// x_r coordinate of brake 1 (see alpha()). Friction at each active brake is
/// mu_k * m * g / 3, i.e. the weight is split evenly over three contacts.
struct RobotParams {
    double mass = 2.0;      // kg
    double inertia = 0.02;  // kg m^2, about the center of mass
    double gravity = 9.81;  // m/s^2
    std::array<double, 2> mu_k{0.5, 0.5};
    std::array<BrakePoint, 2> brakes{{{0.1, 0.1}, {0.1, -0.1}}};
    double v_eps = 1e-3;  // m/s, floor on the contact speed in the Coulomb term

    double alpha() const { return brakes[0].x_r; }
    const BrakePoint& brake(int i) const;
    double mu(int i) const;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

/// Global pose and velocity of the center of mass.
struct RobotState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double xdot = 0.0;
    double ydot = 0.0;
    double thetadot = 0.0;
    double t = 0.0;

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) &&
               std::isfinite(xdot) && std::isfinite(ydot) &&
               std::isfinite(thetadot) && std::isfinite(t);
    }
    double speed() const { return std::hypot(xdot, ydot); }
};

/// Body-frame velocities (u along x_r, v along y_r) plus heading.
struct LocalState {
    double theta = 0.0;
    double xdot_r = 0.0;
    double ydot_r = 0.0;
    double thetadot = 0.0;
};

/// Drive force along x_r plus the two binary brake states.
struct ControlInput {
    double f_d = 0.0;
    bool f1 = false;
    bool f2 = false;

    bool brake(int i) const { return i == 1 ? f1 : f2; }
    int active_count() const { return int(f1) + int(f2); }
    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct Accel {
    double xddot = 0.0;
    double yddot = 0.0;
    double thetaddot = 0.0;
};

inline void check_brake_index(int i) {
    if (i != 1 && i != 2)
        throw std::out_of_range("brake index must be 1 or 2, got " + std::to_string(i));
}

inline const BrakePoint& RobotParams::brake(int i) const {
    check_brake_index(i);
    return brakes[std::size_t(i - 1)];
}

inline double RobotParams::mu(int i) const {
    check_brake_index(i);
    return mu_k[std::size_t(i - 1)];
}

}  // namespace mamr
