#include "neuim/machine.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "neuim/error.hpp"

namespace neuim {

namespace {

constexpr double kTwoPiOver3 = 2.0 * std::numbers::pi / 3.0;
constexpr double kMinDeterminant = 1e-15;

MachineParams from_reactances(double r_s, double x_ls, double x_m, double x_lr, double r_r,
                              double inertia) {
    const double omega_e = 2.0 * std::numbers::pi * 60.0;
    MachineParams p;
    p.r_s = r_s;
    p.r_r = r_r;
    p.L_ls = x_ls / omega_e;
    p.L_lr = x_lr / omega_e;
    p.L_M = x_m / omega_e;
    p.J = inertia;
    p.poles = 4;
    p.frame = ReferenceFrame::Synchronous;
    p.omega_e = omega_e;
    return p;
}

// Speed-voltage term added to the (q, d, 0) rows.
Qd0 speed_voltage(double w, const Qd0& lambda) { return {w * lambda.d, -w * lambda.q, 0.0}; }

}  // namespace

void MachineParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid machine parameters: ") + what);
    };
    require(std::isfinite(L_ls) && L_ls > 0.0, "L_ls must be > 0");
    require(std::isfinite(L_lr) && L_lr > 0.0, "L_lr must be > 0");
    require(std::isfinite(L_M) && L_M > 0.0, "L_M must be > 0");
    require(std::isfinite(r_s) && r_s >= 0.0, "r_s must be >= 0");
    require(std::isfinite(r_r) && r_r >= 0.0, "r_r must be >= 0");
    require(std::isfinite(J) && J > 0.0, "J must be > 0");
    require(poles >= 2 && poles % 2 == 0, "poles must be an even integer >= 2");
    require(std::isfinite(omega_e), "omega_e must be finite");
}

double MachineParams::frame_speed(double omega_r) const {
    switch (frame) {
        case ReferenceFrame::Stationary: return 0.0;
        case ReferenceFrame::Rotor: return omega_r;
        case ReferenceFrame::Synchronous: return omega_e;
    }
    return omega_e;
}

MachineParams small_machine() { return from_reactances(0.435, 0.754, 26.13, 0.754, 0.816, 0.089); }

MachineParams large_machine() { return from_reactances(0.029, 0.226, 13.04, 0.224, 0.022, 63.87); }

Eigen::Matrix3d park_matrix(double theta) {
    Eigen::Matrix3d k;
    k << std::cos(theta), std::cos(theta - kTwoPiOver3), std::cos(theta + kTwoPiOver3),
        std::sin(theta), std::sin(theta - kTwoPiOver3), std::sin(theta + kTwoPiOver3),
        0.5, 0.5, 0.5;
    return (2.0 / 3.0) * k;
}

Eigen::Matrix3d inverse_park_matrix(double theta) {
    Eigen::Matrix3d k;
    k << std::cos(theta), std::sin(theta), 1.0,
        std::cos(theta - kTwoPiOver3), std::sin(theta - kTwoPiOver3), 1.0,
        std::cos(theta + kTwoPiOver3), std::sin(theta + kTwoPiOver3), 1.0;
    return k;
}

Qd0 abc_to_qd0(double theta, const Abc& x) {
    // The q and d rows annihilate the common mode; removing it first keeps them exactly zero for it.
    const double z = (x.a + x.b + x.c) / 3.0;
    const Eigen::Vector2d y = park_matrix(theta).topRows<2>() * Eigen::Vector3d(x.a - z, x.b - z, x.c - z);
    return {y[0], y[1], z};
}

Abc qd0_to_abc(double theta, const Qd0& x) {
    const Eigen::Vector3d y = inverse_park_matrix(theta) * Eigen::Vector3d(x.q, x.d, x.z);
    return {y[0], y[1], y[2]};
}

WindingPair flux_linkages(const MachineParams& p, const Qd0& i_s, const Qd0& i_r) {
    const double mq = p.L_M * (i_s.q + i_r.q);
    const double md = p.L_M * (i_s.d + i_r.d);
    return {
        {p.L_ls * i_s.q + mq, p.L_ls * i_s.d + md, p.L_ls * i_s.z},
        {p.L_lr * i_r.q + mq, p.L_lr * i_r.d + md, p.L_lr * i_r.z},
    };
}

WindingPair currents_from_flux(const MachineParams& p, const Qd0& lambda_s, const Qd0& lambda_r) {
    // Per axis: [ls; lr] = [[L_ls+L_M, L_M], [L_M, L_lr+L_M]] [is; ir]
    const double ls = p.L_ls + p.L_M;
    const double lr = p.L_lr + p.L_M;
    const double det = ls * lr - p.L_M * p.L_M;
    if (!(std::abs(det) >= kMinDeterminant)) {
        throw NumericError("singular inductance matrix (determinant " + std::to_string(det) + ")");
    }
    auto solve = [&](double fs, double fr, double& is, double& ir) {
        is = (lr * fs - p.L_M * fr) / det;
        ir = (ls * fr - p.L_M * fs) / det;
    };
    WindingPair out;
    solve(lambda_s.q, lambda_r.q, out.stator.q, out.rotor.q);
    solve(lambda_s.d, lambda_r.d, out.stator.d, out.rotor.d);
    out.stator.z = lambda_s.z / p.L_ls;
    out.rotor.z = lambda_r.z / p.L_lr;
    return out;
}

WindingPair flux_derivatives(const MachineParams& p, const Qd0& v_s, const Qd0& i_s, const Qd0& i_r,
                             const Qd0& lambda_s, const Qd0& lambda_r, double omega_r) {
    const double w = p.frame_speed(omega_r);
    const Qd0 es = speed_voltage(w, lambda_s);
    const Qd0 er = speed_voltage(w - omega_r, lambda_r);
    return {
        {v_s.q - p.r_s * i_s.q - es.q, v_s.d - p.r_s * i_s.d - es.d, v_s.z - p.r_s * i_s.z},
        {-p.r_r * i_r.q - er.q, -p.r_r * i_r.d - er.d, -p.r_r * i_r.z},
    };
}

double electromagnetic_torque(const MachineParams& p, const Qd0& lambda_s, const Qd0& i_s) {
    return 0.75 * p.poles * (lambda_s.d * i_s.q - lambda_s.q * i_s.d);
}

double rotor_acceleration(const MachineParams& p, double torque_e, double torque_m) {
    return p.poles / (2.0 * p.J) * (torque_e - torque_m);
}

}  // namespace neuim
