#include "neuim/simulator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "neuim/error.hpp"

namespace neuim {

namespace {

// Events are placed on grid points; this absorbs the rounding in k * dt.
constexpr double kEventTolerance = 1e-9;

double schedule_value(const std::vector<ScheduleStep>& schedule, double t, double before_first) {
    double value = before_first;
    for (const auto& step : schedule) {
        if (step.t_start <= t + kEventTolerance) {
            value = step.value;
        } else {
            break;
        }
    }
    return value;
}

void check_schedule(const std::vector<ScheduleStep>& schedule, double t_end, const char* what) {
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& s = schedule[i];
        if (!std::isfinite(s.t_start) || !std::isfinite(s.value) || s.t_start < 0.0 || s.t_start >= t_end) {
            throw ConfigError(std::string(what) + " entry " + std::to_string(i) + " outside [0, t_end)");
        }
        if (i > 0 && !(s.t_start > schedule[i - 1].t_start)) {
            throw ConfigError(std::string(what) + " must be strictly ascending in t_start");
        }
    }
}

MachineState axpy(const MachineState& x, double a, const MachineState& dx) {
    auto add = [a](const Qd0& u, const Qd0& v) { return Qd0{u.q + a * v.q, u.d + a * v.d, u.z + a * v.z}; };
    return {add(x.lambda_s, dx.lambda_s), add(x.lambda_r, dx.lambda_r), x.omega_r + a * dx.omega_r,
            x.theta_r + a * dx.theta_r};
}

bool finite(const MachineState& s) {
    auto ok = [](const Qd0& v) { return std::isfinite(v.q) && std::isfinite(v.d) && std::isfinite(v.z); };
    return ok(s.lambda_s) && ok(s.lambda_r) && std::isfinite(s.omega_r) && std::isfinite(s.theta_r);
}

void record(const Scenario& sc, std::size_t k, const MachineState& s, Trajectory& out) {
    const MachineParams& p = sc.params;
    const double t = sc.time_at(k);
    const WindingPair i = currents_from_flux(p, s.lambda_s, s.lambda_r);
    const double theta = frame_angle(p, t, s.theta_r);
    out.t[k] = t;
    out.v_abcs[k] = source_voltage(sc, t);
    out.i_qd0s[k] = i.stator;
    out.i_qd0r[k] = i.rotor;
    // Stored fluxes are recomputed from the stored currents so the two arrays agree exactly.
    const WindingPair lambda = flux_linkages(p, i.stator, i.rotor);
    out.lambda_qd0s[k] = lambda.stator;
    out.lambda_qd0r[k] = lambda.rotor;
    out.i_abcs[k] = qd0_to_abc(theta, i.stator);
    out.theta[k] = theta;
    out.omega[k] = p.frame_speed(s.omega_r);
    out.omega_r[k] = s.omega_r;
    out.torque_e[k] = electromagnetic_torque(p, lambda.stator, i.stator);
    out.torque_m[k] = mechanical_torque(sc, t);
}

}  // namespace

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::FreeAcceleration: return "free-accel";
        case ScenarioKind::TorqueChange: return "tc";
        case ScenarioKind::Fault: return "fault";
    }
    return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
    if (name == "free-accel") return ScenarioKind::FreeAcceleration;
    if (name == "tc") return ScenarioKind::TorqueChange;
    if (name == "fault") return ScenarioKind::Fault;
    throw ConfigError("unknown scenario kind '" + name + "'");
}

void Scenario::validate() const {
    params.validate();
    if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(std::isfinite(t_end) && t_end > 0.0)) throw ConfigError("t_end must be > 0");
    const double n = std::round(t_end / dt);
    if (n < 1.0 || std::abs(n * dt - t_end) > 1e-9 * t_end) {
        throw ConfigError("t_end / dt must be a positive integer");
    }
    if (!(std::isfinite(v_mag) && v_mag >= 0.0)) throw ConfigError("v_mag must be >= 0");
    if (!(std::isfinite(f_e) && f_e > 0.0)) throw ConfigError("f_e must be > 0");
    if (std::abs(2.0 * std::numbers::pi * f_e - params.omega_e) > 1e-9 * params.omega_e) {
        throw ConfigError("machine omega_e does not match the source frequency");
    }
    check_schedule(torque_schedule, t_end, "torque schedule");
    check_schedule(sag_schedule, t_end, "sag schedule");
    for (const auto& s : sag_schedule) {
        if (s.value < 0.0) throw ConfigError("sag multipliers must be >= 0");
    }
    if (kind == ScenarioKind::FreeAcceleration &&
        !(torque_schedule.size() == 1 && torque_schedule[0].t_start == 0.0 && torque_schedule[0].value == 0.0)) {
        throw ConfigError("free acceleration requires a zero load torque");
    }
    if (initial_state && !finite(*initial_state)) throw ConfigError("initial state must be finite");
}

std::size_t Scenario::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

void Trajectory::resize(std::size_t n) {
    t.resize(n);
    v_abcs.resize(n);
    i_abcs.resize(n);
    i_qd0s.resize(n);
    i_qd0r.resize(n);
    lambda_qd0s.resize(n);
    lambda_qd0r.resize(n);
    theta.resize(n);
    omega.resize(n);
    omega_r.resize(n);
    torque_e.resize(n);
    torque_m.resize(n);
}

Abc source_voltage(const Scenario& sc, double t) {
    const double amplitude = schedule_value(sc.sag_schedule, t, 1.0) * sc.v_mag;
    const double angle = 2.0 * std::numbers::pi * sc.f_e * t;
    constexpr double shift = 2.0 * std::numbers::pi / 3.0;
    return {amplitude * std::cos(angle), amplitude * std::cos(angle - shift), amplitude * std::cos(angle + shift)};
}

double mechanical_torque(const Scenario& sc, double t) {
    const double before_first = sc.torque_schedule.empty() ? 0.0 : sc.torque_schedule.front().value;
    return schedule_value(sc.torque_schedule, t, before_first);
}

double frame_angle(const MachineParams& p, double t, double theta_r) {
    switch (p.frame) {
        case ReferenceFrame::Stationary: return 0.0;
        case ReferenceFrame::Rotor: return theta_r;
        case ReferenceFrame::Synchronous: return p.omega_e * t;
    }
    return p.omega_e * t;
}

MachineState state_derivative(const Scenario& sc, double t, const MachineState& state) {
    const MachineParams& p = sc.params;
    const Qd0 v_s = abc_to_qd0(frame_angle(p, t, state.theta_r), source_voltage(sc, t));
    const WindingPair i = currents_from_flux(p, state.lambda_s, state.lambda_r);
    const WindingPair rates = flux_derivatives(p, v_s, i.stator, i.rotor, state.lambda_s, state.lambda_r, state.omega_r);
    const double te = electromagnetic_torque(p, state.lambda_s, i.stator);
    return {rates.stator, rates.rotor, rotor_acceleration(p, te, mechanical_torque(sc, t)), state.omega_r};
}

Trajectory simulate(const Scenario& sc) {
    sc.validate();
    const std::size_t n = sc.steps();
    Trajectory out;
    out.name = sc.name;
    out.kind = sc.kind;
    out.params = sc.params;
    out.dt = sc.dt;
    out.v_base = sc.v_mag;
    out.resize(n + 1);

    MachineState x = sc.initial_state.value_or(MachineState{});
    record(sc, 0, x, out);
    const double h = sc.dt;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = sc.time_at(k);
        const MachineState k1 = state_derivative(sc, t, x);
        const MachineState k2 = state_derivative(sc, t + 0.5 * h, axpy(x, 0.5 * h, k1));
        const MachineState k3 = state_derivative(sc, t + 0.5 * h, axpy(x, 0.5 * h, k2));
        const MachineState k4 = state_derivative(sc, t + h, axpy(x, h, k3));
        x = axpy(x, h / 6.0, k1);
        x = axpy(x, h / 3.0, k2);
        x = axpy(x, h / 3.0, k3);
        x = axpy(x, h / 6.0, k4);
        if (!finite(x)) {
            throw NumericError("simulation of '" + sc.name + "' diverged at step " + std::to_string(k + 1) +
                               " (dt too large?)");
        }
        record(sc, k + 1, x, out);
    }
    return out;
}

double phase_peak_from_line_rms(double v_line_rms) { return v_line_rms * std::sqrt(2.0 / 3.0); }

Scenario free_acceleration_scenario(const MachineParams& p, double v_mag, double t_end, double dt) {
    Scenario sc;
    sc.name = "free-accel";
    sc.kind = ScenarioKind::FreeAcceleration;
    sc.v_mag = v_mag;
    sc.f_e = p.omega_e / (2.0 * std::numbers::pi);
    sc.torque_schedule = {{0.0, 0.0}};
    sc.t_end = t_end;
    sc.dt = dt;
    sc.params = p;
    return sc;
}

Scenario torque_change_scenario(const MachineParams& p, double v_mag, double torque, double dt) {
    Scenario sc = free_acceleration_scenario(p, v_mag, 3.0, dt);
    sc.name = "tc";
    sc.kind = ScenarioKind::TorqueChange;
    sc.torque_schedule = {{0.0, 0.0}, {2.05, torque}, {2.5, -torque}};
    return sc;
}

Scenario fault_scenario(const MachineParams& p, double v_mag, double load_torque, double dt) {
    Scenario sc = free_acceleration_scenario(p, v_mag, 7.0, dt);
    sc.name = "fault";
    sc.kind = ScenarioKind::Fault;
    sc.torque_schedule = {{0.0, 0.0}, {3.5, load_torque}};
    sc.sag_schedule = {{6.01, 0.0}, {6.11, 1.0}};
    return sc;
}

}  // namespace neuim
