// Numerical checks of the model and controller claims.
//
// Each checker returns a small report struct; run_all() bundles them, with a
// negative control for every checker, into a text report. Results that are
// proofs in closed form (global asymptotic stability, surface invariance) are
// checked here only on finite samples and finite horizons.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mamr/controller.hpp"
#include "mamr/integrator.hpp"
#include "mamr/scenario.hpp"
#include "mamr/types.hpp"

namespace mamr::verify {

struct FrameConsistencyReport {
    std::size_t samples = 0;
    double max_residual = 0.0;
};

/// Compares accel_global against R(theta) applied to the body-frame
/// acceleration vector built from accel_local, on random states and inputs.
/// alpha_perturbation shifts alpha on the body-frame side only (fault
/// injection). zero_velocity restricts samples to rest with brakes off.
FrameConsistencyReport check_frame_consistency(std::size_t n, std::uint64_t seed,
                                               double alpha_perturbation = 0.0,
                                               bool zero_velocity = false);

/// The reduced surface-derivative expression with the bearing-rate terms
/// dropped, written out term by term. Vanishes on the surface line.
double sliding_derivative_reduced(double e_x, double e_y, double xdot, double ydot, double f_d,
                                  double mass, double theta_d);

/// dS1/dt evaluated from the world-frame equations of motion: second
/// derivative of the bearing minus thetaddot, plus lambda1 times the error
/// rate.
double sliding_derivative_direct(const RobotState& s, const control::TargetConfig& target,
                                 const ControlInput& u, const RobotParams& p, double lambda1);

enum class SurfaceSampling {
    OnSurface,         // theta = bearing, thetadot = 0, velocity along the line
    LateralVelocity,   // velocity gets a component across the line
    NonzeroRate,       // thetadot != 0
};

struct SlidingResidualReport {
    std::size_t samples = 0;
    double max_reduced = 0.0;  // max |dS1/dt| / (1 + |F_d|), reduced expression
    double max_direct = 0.0;   // same, from the equations of motion
};

SlidingResidualReport check_sliding_residual(std::size_t n, std::uint64_t seed,
                                             SurfaceSampling mode = SurfaceSampling::OnSurface);

struct StopSample {
    double t = 0.0;
    double e_c = 0.0;
    double e_c_dot = 0.0;
};

double lyapunov_value(double e_c, double e_c_dot, double k1, double mass);

struct LyapunovReport {
    std::size_t samples = 0;
    double v0 = 0.0;
    double v_final = 0.0;
    double max_increase = 0.0;  // largest V[k+1] - V[k]
    bool monotone = false;      // every increase <= step_tol * V0
    bool converged = false;     // V_final <= settle_ratio * V0
    bool passed() const { return monotone && converged; }
};

LyapunovReport check_lyapunov(std::span<const StopSample> traj, double k1, double mass,
                              double step_tol = 1e-6, double settle_ratio = 1e-4);

/// Signed along-line error samples (line through target with heading
/// theta_f) for a stretch of records.
std::vector<StopSample> stop_samples(std::span<const sim::StepRecord> records,
                                     const control::TargetConfig& target);

/// Closed loop of the 1-D tanh-friction model under F = -(k1 e + k2 e'),
/// sampled every control period. k1, k2 are not sign-checked so that
/// negative controls can be built with it.
std::vector<StopSample> stopping_1d_trajectory(double e0, double e_dot0, double k1, double k2,
                                               double gamma1, double gamma2,
                                               const RobotParams& p, double control_period,
                                               double duration, double dt = 1e-3);

/// Runs the scenario, then restarts from the first Slide2Stop sample of the
/// final leg and keeps the stopping law running (terminal test disabled) for
/// `horizon` seconds under the scenario's own model.
std::vector<StopSample> stopping_leg(const scenario::ParkingScenario& sc, double horizon);

struct ControllabilityReport {
    int rank = 0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool passed() const { return rank == 2; }
};

/// Rank of [B, AB] for the linearized stopping model.
ControllabilityReport check_controllability(const RobotParams& p, double gamma1, double gamma2);

/// Eigenvalues of A - BK for the linearized stopping model, sorted ascending.
std::array<double, 2> closed_loop_eigenvalues(const RobotParams& p, double gamma1,
                                              double gamma2, double k1, double k2);

/// Integrates a constant-force spin-up from rest with only `brake` locked.
std::vector<RobotState> pivot_trajectory(const RobotParams& p, sim::ModelKind model,
                                         double f_d, int brake, double duration,
                                         double dt = 1e-3);

struct PivotReport {
    std::size_t samples = 0;
    double max_drift = 0.0;  // m, brake contact displacement from its start
};

PivotReport check_fixed_axis_pivot(std::span<const RobotState> traj, const RobotParams& p,
                                   int brake);

/// Pivot closed loop e'' = -c F with F = sign(c) (kp e + kd e'), theta_d
/// fixed, from e(0) = e0 at rest under the fixed-axis model. Returns how many
/// times e changes sign over the horizon.
int reaching_sign_changes(const RobotParams& p, int brake, double kp, double kd, double e0,
                          double horizon, double dt = 1e-3);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct Report {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::vector<CheckResult> checks;

    bool all_passed() const;
    std::string to_text() const;
};

/// Every checker with its negative controls.
Report run_all(std::size_t n_samples = 1000, std::uint64_t seed = 20240601);

/// Canonical single-leg parking run used by the built-in checks.
scenario::ParkingScenario canonical_scenario();

}  // namespace mamr::verify
