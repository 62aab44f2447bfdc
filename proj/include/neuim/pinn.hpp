#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "neuim/machine.hpp"
#include "neuim/nnet.hpp"
#include "neuim/simulator.hpp"

namespace neuim {

inline constexpr std::size_t kGInputs = 11;
inline constexpr std::size_t kGOutputs = 6;  // q_s, d_s, z_s, q_r, d_r, z_r
inline constexpr std::size_t kPInputs = 10;
inline constexpr std::size_t kPOutputs = 3;  // d/dt of a, b, c

/// Per-row affine map between physical values and network units: physical = offset + scale * unit.
struct Normalizer {
    Eigen::VectorXd offset;
    Eigen::VectorXd scale;

    static Normalizer identity(std::size_t n);
    /// Row-wise mean and standard deviation of the columns of `samples`; constant rows get scale 1.
    static Normalizer fit(const Eigen::MatrixXd& samples);
    static Normalizer uniform(std::size_t n, double scale);

    Eigen::MatrixXd to_units(const Eigen::MatrixXd& physical) const;
    Eigen::MatrixXd to_physical(const Eigen::MatrixXd& units) const;
    std::size_t size() const { return static_cast<std::size_t>(offset.size()); }
};

/// Training provenance echoed into model files.
struct ModelInfo {
    std::string method;  // "physics", "hybrid" or "data"
    std::uint64_t seed = 0;
    int epochs = 0;
    double data_fraction = 0.0;
    std::vector<ScenarioKind> kinds;  // scenario kinds seen in training, first-appearance order
};

/// G: exogenous inputs -> qd0 stator and rotor currents.
struct GModel {
    MlpNetwork net;
    Normalizer input;
    Normalizer output;
    double dt = 0.0;
    ModelInfo info;
};

/// P: phase currents and exogenous inputs -> phase-current derivatives.
struct PModel {
    MlpNetwork net;
    Normalizer input;
    Normalizer output;
    double dt = 0.0;
    ModelInfo info;
};

/// [i_a(0), i_b(0), i_c(0), v_a, v_b, v_c, omega, omega_r, cos theta, sin theta, t / t_end] at sample k.
std::array<double, kGInputs> g_features(const Trajectory& traj, std::size_t k);
Eigen::MatrixXd g_feature_matrix(const Trajectory& traj);

/// [i_a, i_b, i_c, v_a, v_b, v_c, omega, omega_r, cos theta, sin theta] at sample k.
std::array<double, kPInputs> p_features(const Trajectory& traj, const Abc& i_abcs, std::size_t k);
Eigen::MatrixXd p_feature_matrix(const Trajectory& traj, std::span<const Abc> i_abcs);

struct GPrediction {
    Qd0 i_s;
    Qd0 i_r;
    Abc i_abcs;
};

GPrediction g_predict(const GModel& g, const Trajectory& traj, std::size_t k);

/// G over the whole grid: qd0 currents (6 x K, physical units) and their phase-domain image.
struct CurrentSequence {
    Eigen::MatrixXd qd0;
    std::vector<Abc> abcs;
};

CurrentSequence g_predict_all(const GModel& g, const Trajectory& traj);

/// P over the whole grid for the given phase currents. Returns 3 x K derivatives [A/s].
Eigen::MatrixXd p_predict_all(const PModel& p, const Trajectory& traj, std::span<const Abc> i_abcs);

/// Simulator currents in G's output layout (6 x K).
Eigen::MatrixXd true_currents(const Trajectory& traj);

/// Phase-current derivative by centered differences, one-sided at the ends (3 x K).
Eigen::MatrixXd finite_difference_derivative(std::span<const Abc> i_abcs, double dt);

/// Flux quantities of one step of the modified-Euler chain.
struct FluxChainStep {
    WindingPair lambda;           // at k, from the currents at k
    WindingPair lambda_dot;       // at k
    WindingPair lambda_pred;      // Euler predictor at k+1
    WindingPair lambda_dot_pred;  // slope at k+1 from the predictor and the currents at k+1
};

FluxChainStep flux_chain(const MachineParams& p, const WindingPair& i_k, const WindingPair& i_next,
                         const Trajectory& traj, std::size_t k);

/// A loss over one trajectory together with its gradient with respect to the supplied sequence.
struct SequenceLoss {
    double value = 0.0;
    Eigen::MatrixXd gradient;
};

/// Mean squared trapezoidal residual of the six flux linkages implied by `currents` (6 x K).
/// Residuals are divided by dt * v_base, i.e. expressed as a voltage error in units of the source peak.
SequenceLoss physics_sequence_loss(const Trajectory& traj, const Eigen::MatrixXd& currents);

/// Mean squared deviation ((currents - truth) / scale)^2 over the six channels.
SequenceLoss data_sequence_loss(const Trajectory& traj, const Eigen::MatrixXd& currents,
                                const Eigen::VectorXd& scale);

/// Mean squared trapezoidal residual between the phase-current increments of `i_abcs` and the
/// derivatives `rates` (3 x K). Residuals are divided by dt * rate_scale.
SequenceLoss derivative_sequence_loss(std::span<const Abc> i_abcs, const Eigen::MatrixXd& rates, double dt,
                                      double rate_scale);

/// Mean squared ((rates - targets) / rate_scale)^2.
SequenceLoss supervised_rate_loss(const Eigen::MatrixXd& rates, const Eigen::MatrixXd& targets, double rate_scale);

struct HybridConfig {
    double data_fraction = 0.0;
    double physics_weight = 1.0;
    double data_weight = 1.0;
    int epochs = 2000;
    int p_epochs = 1000;
    std::uint64_t seed = 7;
    double learning_rate = 1e-3;
    std::vector<int> hidden{38, 24};
    // Stop when the loss changed by less than this fraction over `early_stop_window` epochs.
    double early_stop_tolerance = 1e-9;
    int early_stop_window = 100;
    // Data-driven baseline: P fits finite-difference targets instead of the trapezoidal residual.
    bool supervised_p = false;
};

/// Number of supervised trajectories for a fraction of n, rounded to nearest (halves up).
/// Throws ConfigError outside [0, 1].
std::size_t supervised_count(double data_fraction, std::size_t n);

struct TrainingSample {
    const Trajectory* trajectory = nullptr;
    bool supervised = false;
};

/// First round(fraction * N) trajectories are supervised, in the given order.
std::vector<TrainingSample> assign_supervision(std::span<const Trajectory* const> trajs, double data_fraction);

struct LossReport {
    double physics = 0.0;
    double data = 0.0;
    double total = 0.0;
};

struct LossEvaluation {
    LossReport loss;
    Gradients gradients;
};

/// Current magnitude used as G's output unit: source peak over the blocked-rotor impedance.
double current_scale(const MachineParams& p, double v_base);

/// Evaluates the weighted G loss for a fixed sample set; features are assembled once.
class GObjective {
public:
    GObjective(const GModel& shape, std::span<const TrainingSample> samples, double physics_weight,
               double data_weight);

    /// Loss terms; adds the parameter gradient into grads when non-null.
    LossReport evaluate(const MlpNetwork& net, Gradients* grads) const;

private:
    struct Segment {
        const Trajectory* trajectory;
        Eigen::Index offset;
        Eigen::Index length;
        bool supervised;
    };
    Normalizer output_;
    Eigen::MatrixXd inputs_;
    std::vector<Segment> segments_;
    std::size_t supervised_ = 0;
    double physics_weight_;
    double data_weight_;
};

/// Evaluates the P loss against fixed G predictions.
class PObjective {
public:
    PObjective(const PModel& shape, const GModel& g, std::span<const Trajectory* const> trajs, bool supervised);

    LossReport evaluate(const MlpNetwork& net, Gradients* grads) const;

private:
    struct Segment {
        Eigen::Index offset;
        Eigen::Index length;
        std::vector<Abc> i_abcs;
        Eigen::MatrixXd targets;
    };
    Normalizer output_;
    Eigen::MatrixXd inputs_;
    std::vector<Segment> segments_;
    double dt_ = 0.0;
    bool supervised_ = false;
};

/// Untrained G with input statistics fitted on the trajectories and the physical output unit.
GModel make_g_model(std::span<const Trajectory* const> trajs, const HybridConfig& cfg);
/// Untrained P whose inputs are fitted on G's predictions.
PModel make_p_model(const GModel& g, std::span<const Trajectory* const> trajs, const HybridConfig& cfg);

LossEvaluation loss_g_physics(const GModel& g, std::span<const Trajectory* const> trajs);
/// Throws ConfigError if any sample is not supervised.
LossEvaluation loss_data(const GModel& g, std::span<const TrainingSample> samples);
LossEvaluation loss_g_hybrid(const GModel& g, std::span<const Trajectory* const> trajs, const HybridConfig& cfg);
LossEvaluation loss_p(const PModel& p, const GModel& g, std::span<const Trajectory* const> trajs);

struct EpochLoss {
    int epoch = 0;
    LossReport loss;
};

using LossHistory = std::vector<EpochLoss>;

template <typename Model>
struct TrainResult {
    Model model;
    LossHistory history;
};

/// Full-batch Adam on the hybrid G loss. Throws NumericError naming the epoch if the loss stops
/// being finite.
TrainResult<GModel> train_g(std::span<const Trajectory* const> trajs, const HybridConfig& cfg);
/// Full-batch Adam on the P loss with G frozen.
TrainResult<PModel> train_p(const GModel& g, std::span<const Trajectory* const> trajs, const HybridConfig& cfg);

}  // namespace neuim
