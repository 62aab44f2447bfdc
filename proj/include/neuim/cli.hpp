#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuim/dataio.hpp"
#include "neuim/pinn.hpp"

namespace neuim {

/// Command-line settings after merging the config file; flags win over file keys.
struct RunConfig {
    std::string subcommand;
    std::optional<std::string> preset;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    std::optional<double> data_fraction;
    std::optional<int> epochs;
    std::optional<int> p_epochs;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> lm;
    std::optional<std::string> machine;
    std::optional<std::string> kind;  // restricts train to one scenario kind
    std::vector<double> fractions;
    std::vector<std::filesystem::path> models;
    bool data_driven = false;
};

/// One set of training trajectories shared by every variant trained on it.
struct TrainingGroup {
    std::string name;
    std::vector<const Trajectory*> trajectories;
    std::vector<double> fractions;  // hybrid fractions; 0 reuses the pure-physics run
};

struct CompareOptions {
    HybridConfig base;  // epochs, seed and optimizer settings shared by all variants
    std::size_t threads = 1;
};

struct Variant {
    std::string group;
    std::string label;  // "data-driven", "physics" or "hybrid NN%"
    std::string key;    // file-name form of the label
    HybridConfig config;
    TrainResult<GModel> g;
    TrainResult<PModel> p;
};

struct CompareResult {
    std::vector<Variant> variants;  // group order, then data-driven, physics, hybrids in fraction order
    EvalReport report;

    const Variant* find(const std::string& group, const std::string& label) const;
};

/// Hybrid variant label for a fraction, e.g. "hybrid 75%".
std::string hybrid_label(double fraction);

/// The two training groups used for comparisons: torque change (free acceleration followed by the
/// training torque-change runs) and fault (the training fault runs).
std::vector<TrainingGroup> comparison_groups(const Dataset& free_accel, const Dataset& train,
                                             std::span<const double> fractions);

/// Trains the data-driven, pure-physics and hybrid variants of every group and evaluates each on the
/// test scenarios of the kinds it was trained on.
CompareResult run_compare(std::span<const TrainingGroup> groups, const Dataset& test, const CompareOptions& options);

/// Writes the MSE table, loss histories, models and predicted-vs-true series under `dir`.
void write_compare_outputs(const std::filesystem::path& dir, const CompareResult& result, const Dataset& test);

/// Columns: epoch, L_physics, L_data, L_total.
void write_loss_history(std::ostream& out, const LossHistory& history);

/// Columns: t, then truth and prediction for iq_s, id_s, i_a and the three phase-current rates.
void write_series(std::ostream& out, const Trajectory& traj, const Eigen::MatrixXd& currents,
                  const Eigen::MatrixXd& rates);

/// Worker count from NEUIM_THREADS, else the hardware concurrency. Throws ConfigError on a bad value.
std::size_t thread_budget();

/// Parses and executes one command line (without the program name). Returns the process exit code:
/// 0 success, 2 configuration error, 3 numeric failure.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace neuim
