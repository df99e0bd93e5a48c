// Fixed-step integration of the hybrid system: continuous rigid-body state,
// control held constant between samples (zero-order hold).
#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "mamr/controller.hpp"
#include "mamr/types.hpp"

namespace mamr::sim {

enum class ModelKind { FullGlobal, FixedAxis, Stopping1D };
enum class Method { RK4, Euler };

std::string_view model_name(ModelKind k);
std::string_view method_name(Method m);

/// Which equations drive the state. gamma1/gamma2 only matter for
/// Stopping1D, which moves the body along its heading with tanh friction.
struct DynamicsModel {
    ModelKind kind = ModelKind::FullGlobal;
    double gamma1 = 0.0;
    double gamma2 = 1.0;
};

struct IntegrationSettings {
    double dt_physics = 1e-3;      // s
    double control_period = 0.01;  // s, integer multiple of dt_physics
    double t_max = 60.0;           // s
    DynamicsModel model;
    Method method = Method::RK4;
    bool stiction_snap = true;

    int substeps() const;
    /// Throws ConfigError.
    void validate() const;
};

struct StepRecord {
    RobotState state;
    ControlInput input;
    control::Phase phase = control::Phase::Reach1;
    double s1 = 0.0;
    double s2 = 0.0;
    double e_c = 0.0;
    Accel accel;
};

struct SimulationLog {
    std::vector<StepRecord> records;
    bool timed_out = false;
};

/// What the control hook returns at each sample.
struct ControlSample {
    ControlInput input;
    control::Phase phase = control::Phase::Reach1;
    double s1 = 0.0;
    double s2 = 0.0;
    double e_c = 0.0;
};

using ControlHook = std::function<ControlSample(const RobotState&)>;

/// State derivative of the selected model.
Accel evaluate_model(const RobotState& s, const ControlInput& u, const RobotParams& p,
                     const DynamicsModel& model);

/// Advances one step with the input held. Re-wraps theta and applies the
/// stiction snap when enabled. Throws NumericalError on a non-finite result.
RobotState step(const RobotState& s, const ControlInput& u, const RobotParams& p, double dt,
                const DynamicsModel& model, Method method = Method::RK4,
                bool stiction_snap = true);

/// If an active brake's contact speed changed sign across the step while the
/// drive force is below that brake's friction level, removes the contact
/// velocity by projecting (u, thetadot) onto the stuck set in the kinetic
/// energy metric. Never increases kinetic energy.
RobotState apply_stiction_snap(const RobotState& before, const RobotState& after,
                               const ControlInput& u, const RobotParams& p);

/// Samples the hook every control period and integrates in between. The log
/// holds one record per control sample. Stops after the first sample whose
/// phase is Done, or flags a timeout once t_max has elapsed.
SimulationLog simulate(const RobotState& initial, const RobotParams& p,
                       const IntegrationSettings& settings, const ControlHook& hook);

}  // namespace mamr::sim
