#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuim/pinn.hpp"
#include "neuim/simulator.hpp"

namespace neuim {

enum class Split { Train, Test };

const char* to_string(Split split);

struct DatasetEntry {
    Scenario scenario;
    Trajectory trajectory;
    bool supervised = false;
};

/// Simulated scenarios sharing one time grid.
struct Dataset {
    std::string name;
    Split split = Split::Train;
    double data_fraction = 0.0;
    std::vector<DatasetEntry> entries;

    /// Marks the first round(fraction * N) entries supervised. Throws ConfigError outside [0, 1].
    void set_data_fraction(double fraction);

    /// Trajectories in dataset order, optionally restricted to the given kinds.
    std::vector<const Trajectory*> trajectories(std::span<const ScenarioKind> kinds = {}) const;
};

/// Knobs shared by presets and config files. Unset fields keep the scenario's own value.
struct DatasetOptions {
    double dt = 1e-3;
    std::optional<double> L_M;
    std::optional<std::string> machine;  // "small" or "large"; free-accel preset and config blocks only
};

/// Throws ConfigError for an unknown machine name.
MachineParams machine_by_name(const std::string& name);
/// Rated line-to-line rms voltage of a named machine [V].
double rated_line_voltage(const std::string& name);

std::vector<std::string> preset_names();

/// Scenarios of a named preset: `free-accel`, `paper-train` or `paper-test`.
std::vector<Scenario> preset_scenarios(const std::string& preset, const DatasetOptions& options);

/// Parsed flat `key = value` file. Keys before the first `scenario = <name>` line are global;
/// each `scenario` line opens a block of scenario keys.
struct ConfigFile {
    std::vector<std::pair<std::string, std::string>> globals;
    struct Block {
        std::string name;
        int line = 0;
        std::vector<std::pair<std::string, std::string>> keys;
    };
    std::vector<Block> scenarios;

    std::optional<std::string> global(const std::string& key) const;
};

/// Throws ConfigError naming the line on malformed input.
ConfigFile parse_config(std::istream& in);
ConfigFile read_config(const std::filesystem::path& path);

/// Scenario blocks of a config file. Block keys: kind (free-accel | tc | fault), machine, voltage
/// (line rms V), torque (N m; tc swing or fault load), t_end (free-accel), lm (H).
std::vector<Scenario> config_scenarios(const ConfigFile& config, const DatasetOptions& options);

/// Simulates every scenario in order.
Dataset build_dataset(const std::string& name, Split split, std::vector<Scenario> scenarios);
Dataset build_preset(const std::string& preset, const DatasetOptions& options);

void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
/// Reads the time series back; metadata other than dt is left default.
Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory(const std::filesystem::path& path);

/// File-system-safe stem for a trajectory name.
std::string file_stem(const std::string& name);

inline constexpr int kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const GModel& g);
void save_model(const std::filesystem::path& path, const PModel& p);
std::string model_json(const GModel& g);
std::string model_json(const PModel& p);
GModel load_g_model(const std::filesystem::path& path);
PModel load_p_model(const std::filesystem::path& path);
GModel parse_g_model(const std::string& text);
PModel parse_p_model(const std::string& text);

/// A trained G/P pair under a display label. Empty `kinds` means every scenario kind.
struct MethodModels {
    std::string label;
    const GModel* g = nullptr;
    const PModel* p = nullptr;
    std::vector<ScenarioKind> kinds;
};

struct ErrorStats {
    double mse = 0.0;
    double nmse = 0.0;  // mse over the squared peak of the truth
};

struct TrajectoryMetrics {
    std::string method;
    std::string trajectory;
    ScenarioKind kind = ScenarioKind::FreeAcceleration;
    std::size_t points = 0;
    ErrorStats rate;      // d i_abcs / dt against centered differences of the truth
    ErrorStats currents;  // six qd0 channels
    ErrorStats i_qs;
};

/// Pooled over every point of every trajectory of one kind.
struct KindMetrics {
    std::string method;
    ScenarioKind kind = ScenarioKind::FreeAcceleration;
    std::size_t trajectories = 0;
    std::size_t points = 0;
    ErrorStats rate;
    ErrorStats currents;
    ErrorStats i_qs;
};

struct EvalReport {
    std::string dataset;
    std::uint64_t seed = 0;
    std::vector<TrajectoryMetrics> trajectories;
    std::vector<KindMetrics> kinds;  // scenario kinds in first-appearance order, then methods in input order

    const KindMetrics* find(const std::string& method, ScenarioKind kind) const;
};

/// Throws ConfigError when a model's dt differs from the dataset's.
EvalReport evaluate(std::span<const MethodModels> methods, const Dataset& dataset);

/// Error statistics of given predictions against the truth of one trajectory.
TrajectoryMetrics score_trajectory(const Trajectory& traj, const Eigen::MatrixXd& currents,
                                   const Eigen::MatrixXd& rates);

/// Aligned text table: scenario, method, rate MSE and NMSE, current MSE and i_qs NMSE.
void write_eval_table(std::ostream& out, const EvalReport& report);
/// One row per (scenario kind, method) followed by one row per (trajectory, method).
void write_eval_csv(std::ostream& out, const EvalReport& report);

}  // namespace neuim
