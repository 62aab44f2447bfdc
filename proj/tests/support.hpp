#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "neuim/nnet.hpp"
#include "neuim/simulator.hpp"

namespace test_support {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("neuim_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Central-difference gradient of `loss` at every parameter, compared with the analytic gradient.
// Returns the largest |a - n| / max(|a|, |n|, floor) where floor = 1e-6 * max|a|.
template <typename Loss>
double max_relative_gradient_error(const neuim::MlpNetwork& net, const Loss& loss, double h = 1e-5) {
    neuim::Gradients analytic = neuim::zero_gradients(net);
    loss(net, &analytic);
    const std::size_t n = net.parameter_count();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(neuim::gradient_entry(analytic, i)));
    const double floor = std::max(1e-6 * scale, 1e-300);
    neuim::MlpNetwork probe = net;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = probe.parameter(i);
        probe.parameter(i) = x + h;
        const double up = loss(probe, nullptr);
        probe.parameter(i) = x - h;
        const double down = loss(probe, nullptr);
        probe.parameter(i) = x;
        const double numeric = (up - down) / (2.0 * h);
        const double a = neuim::gradient_entry(analytic, i);
        worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor}));
    }
    return worst;
}

// Short small-machine run with nonzero currents and speed: free acceleration sampled after `skip` steps.
inline neuim::Trajectory short_trajectory(std::size_t steps, double dt = 1e-3, double t_start = 0.05) {
    using namespace neuim;
    const MachineParams p = small_machine();
    Scenario warm = free_acceleration_scenario(p, phase_peak_from_line_rms(220.0), t_start, dt);
    const Trajectory w = simulate(warm);
    Scenario sc = warm;
    sc.t_end = static_cast<double>(steps) * dt;
    MachineState s;
    s.lambda_s = w.lambda_qd0s.back();
    s.lambda_r = w.lambda_qd0r.back();
    s.omega_r = w.omega_r.back();
    s.theta_r = 0.0;
    sc.initial_state = s;
    return simulate(sc);
}

}  // namespace test_support
