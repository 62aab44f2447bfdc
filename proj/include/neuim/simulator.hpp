#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "neuim/machine.hpp"

namespace neuim {

enum class ScenarioKind { FreeAcceleration, TorqueChange, Fault };

const char* to_string(ScenarioKind kind);
/// Accepts "free-accel", "tc" and "fault". Throws ConfigError otherwise.
ScenarioKind parse_scenario_kind(const std::string& name);

/// A piecewise-constant schedule entry: `value` holds from `t_start` until the next entry.
struct ScheduleStep {
    double t_start = 0.0;
    double value = 0.0;
};

/// Integrated state: flux linkages, rotor electrical speed and angle.
struct MachineState {
    Qd0 lambda_s;
    Qd0 lambda_r;
    double omega_r = 0.0;
    double theta_r = 0.0;
};

/// An infinite-bus run: source definition, event schedules, time grid and machine.
struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::FreeAcceleration;
    double v_mag = 0.0;  // line-to-neutral peak [V]
    double f_e = 60.0;   // [Hz]
    std::vector<ScheduleStep> torque_schedule{{0.0, 0.0}};
    std::vector<ScheduleStep> sag_schedule;
    double t_end = 1.0;
    double dt = 1e-4;
    MachineParams params;
    std::optional<MachineState> initial_state;

    /// Throws ConfigError on a broken invariant (unsorted schedules, non-integer step count, ...).
    void validate() const;
    /// Number of integration steps, t_end / dt.
    std::size_t steps() const;
    /// Grid time of sample k.
    double time_at(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Uniformly sampled signals of one simulated run. All arrays have the same length.
struct Trajectory {
    std::string name;
    ScenarioKind kind = ScenarioKind::FreeAcceleration;
    MachineParams params;
    double dt = 0.0;
    double v_base = 0.0;  // nominal source peak voltage of the scenario [V]

    std::vector<double> t;
    std::vector<Abc> v_abcs;
    std::vector<Abc> i_abcs;
    std::vector<Qd0> i_qd0s;
    std::vector<Qd0> i_qd0r;
    std::vector<Qd0> lambda_qd0s;
    std::vector<Qd0> lambda_qd0r;
    std::vector<double> theta;
    std::vector<double> omega;
    std::vector<double> omega_r;
    std::vector<double> torque_e;
    std::vector<double> torque_m;

    std::size_t size() const { return t.size(); }
    double t_end() const { return t.empty() ? 0.0 : t.back(); }
    void resize(std::size_t n);
};

/// Balanced three-phase source scaled by the active sag multiplier.
Abc source_voltage(const Scenario& sc, double t);

/// Load torque active at time t.
double mechanical_torque(const Scenario& sc, double t);

/// Frame angle at time t for the integrated rotor angle theta_r.
double frame_angle(const MachineParams& p, double t, double theta_r);

/// Time derivative of the integrated state.
MachineState state_derivative(const Scenario& sc, double t, const MachineState& state);

/// Fixed-step RK4 integration over the scenario grid. Throws NumericError naming
/// the step index when the state stops being finite.
Trajectory simulate(const Scenario& sc);

/// Scenario builders shared by the dataset presets and the CLI.
Scenario free_acceleration_scenario(const MachineParams& p, double v_mag, double t_end, double dt);
Scenario torque_change_scenario(const MachineParams& p, double v_mag, double torque, double dt);
Scenario fault_scenario(const MachineParams& p, double v_mag, double load_torque, double dt);

/// Peak line-to-neutral voltage of a source with the given line-to-line RMS rating.
double phase_peak_from_line_rms(double v_line_rms);

}  // namespace neuim
