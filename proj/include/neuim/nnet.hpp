#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace neuim {

/// One affine layer, y = W x + b. W is (out x in).
struct DenseLayer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd biases;
};

/// Feedforward network: tanh on hidden layers, identity on the output layer.
struct MlpNetwork {
    std::vector<DenseLayer> layers;

    std::vector<int> layer_sizes() const;
    std::size_t input_size() const;
    std::size_t output_size() const;
    std::size_t parameter_count() const;

    /// Flat parameter access in layer order, weights row-major then biases.
    double& parameter(std::size_t index);
    double parameter(std::size_t index) const;
};

/// Parameter-shaped gradient storage.
using Gradients = std::vector<DenseLayer>;

Gradients zero_gradients(const MlpNetwork& net);
double& gradient_entry(Gradients& g, std::size_t index);
double gradient_entry(const Gradients& g, std::size_t index);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases. Deterministic in the seed.
/// Throws ConfigError for fewer than two sizes or a non-positive size.
MlpNetwork init_network(std::span<const int> layer_sizes, std::uint64_t seed);

/// Activations kept by forward for the backward pass. activations[0] is the input batch,
/// activations[l] the tanh output of hidden layer l.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;
};

/// Batched forward pass; each column of x is one sample. Fills cache when given.
Eigen::MatrixXd forward(const MlpNetwork& net, const Eigen::MatrixXd& x, ForwardCache* cache = nullptr);

/// Single-sample convenience.
Eigen::VectorXd forward_one(const MlpNetwork& net, const Eigen::VectorXd& x);

/// Reverse pass for L = sum over columns of dL_dy . y. Adds parameter gradients into
/// grads and returns dL/dx.
Eigen::MatrixXd backward(const MlpNetwork& net, const ForwardCache& cache, const Eigen::MatrixXd& dL_dy,
                         Gradients& grads);

struct AdamState {
    Gradients first_moment;
    Gradients second_moment;
    std::int64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState make_adam(const MlpNetwork& net, double learning_rate = 1e-3);

/// Bias-corrected adaptive-moment step.
void adam_update(MlpNetwork& net, const Gradients& grads, AdamState& opt);

/// Returns the loss; writes the analytic gradient into grads when non-null.
using LossFunction = std::function<double(const MlpNetwork&, Gradients*)>;

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    bool passed = true;
};

struct GradientCheckOptions {
    double step = 1e-5;
    // Networks with more parameters than this are checked on a seeded random subset of this size.
    std::size_t max_parameters = 400;
    std::uint64_t seed = 1;
};

/// Compares analytic gradients with central differences. The relative error of a parameter is
/// |a - n| / max(|a|, |n|, floor) with floor = 1e-6 * max|a| over the checked set, so parameters
/// whose gradient is pure rounding noise do not dominate.
GradientCheckReport gradient_check(const MlpNetwork& net, const LossFunction& loss, double tolerance,
                                   const GradientCheckOptions& options = {});

}  // namespace neuim
