#pragma once

#include <Eigen/Core>

namespace neuim {

/// Components in the rotating q/d/0 frame.
struct Qd0 {
    double q = 0.0;
    double d = 0.0;
    double z = 0.0;

    friend bool operator==(const Qd0&, const Qd0&) = default;
};

/// Per-phase components.
struct Abc {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    friend bool operator==(const Abc&, const Abc&) = default;
};

/// A stator/rotor pair of qd0 quantities (currents, flux linkages or their rates).
struct WindingPair {
    Qd0 stator;
    Qd0 rotor;
};

enum class ReferenceFrame { Stationary, Rotor, Synchronous };

/// Electrical and mechanical constants of a squirrel-cage induction machine.
/// Rotor quantities are referred to the stator.
struct MachineParams {
    double r_s = 0.0;   // stator resistance [ohm]
    double r_r = 0.0;   // rotor resistance [ohm]
    double L_ls = 0.0;  // stator leakage inductance [H]
    double L_lr = 0.0;  // rotor leakage inductance [H]
    double L_M = 0.0;   // magnetizing inductance [H]
    double J = 0.0;     // rotor inertia [kg m^2]
    int poles = 4;
    ReferenceFrame frame = ReferenceFrame::Synchronous;
    double omega_e = 0.0;  // synchronous electrical speed [rad/s]

    /// Throws ConfigError when a positivity or pole-count invariant is violated.
    void validate() const;

    /// Speed of the qd0 frame given the rotor electrical speed.
    double frame_speed(double omega_r) const;
};

/// 3 hp, 220 V, 4-pole machine used for free-acceleration and torque-change runs.
MachineParams small_machine();
/// 2250 hp, 2300 V, 4-pole machine used for the fault runs.
MachineParams large_machine();

Eigen::Matrix3d park_matrix(double theta);
Eigen::Matrix3d inverse_park_matrix(double theta);

Qd0 abc_to_qd0(double theta, const Abc& x);
Abc qd0_to_abc(double theta, const Qd0& x);

/// lambda = L_l i + L_M (i_s + i_r) on q and d; the zero sequence only sees the leakage.
WindingPair flux_linkages(const MachineParams& p, const Qd0& i_s, const Qd0& i_r);

/// Inverse of flux_linkages. Throws NumericError if the per-axis inductance
/// matrix is singular.
WindingPair currents_from_flux(const MachineParams& p, const Qd0& lambda_s, const Qd0& lambda_r);

/// Flux-linkage rates from the voltage equations with a shorted rotor.
/// The speed voltage enters the q row as +w*lambda_d and the d row as -w*lambda_q.
WindingPair flux_derivatives(const MachineParams& p, const Qd0& v_s, const Qd0& i_s, const Qd0& i_r,
                             const Qd0& lambda_s, const Qd0& lambda_r, double omega_r);

/// T_e = (3P/4) (lambda_ds i_qs - lambda_qs i_ds)
double electromagnetic_torque(const MachineParams& p, const Qd0& lambda_s, const Qd0& i_s);

/// d(omega_r)/dt = P / (2J) (T_e - T_m)
double rotor_acceleration(const MachineParams& p, double torque_e, double torque_m);

}  // namespace neuim
