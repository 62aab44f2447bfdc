#include "neuim/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "neuim/error.hpp"

namespace neuim {

namespace {

// Portable uniform draw in [0, 1) from the top 53 bits of the engine output.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Layers>
auto& flat_entry(Layers& layers, std::size_t index) {
    for (auto& layer : layers) {
        const auto nw = static_cast<std::size_t>(layer.weights.size());
        if (index < nw) {
            const auto cols = static_cast<std::size_t>(layer.weights.cols());
            return layer.weights(static_cast<Eigen::Index>(index / cols), static_cast<Eigen::Index>(index % cols));
        }
        index -= nw;
        const auto nb = static_cast<std::size_t>(layer.biases.size());
        if (index < nb) return layer.biases(static_cast<Eigen::Index>(index));
        index -= nb;
    }
    throw std::out_of_range("parameter index out of range");
}

}  // namespace

std::vector<int> MlpNetwork::layer_sizes() const {
    std::vector<int> sizes;
    if (layers.empty()) return sizes;
    sizes.push_back(static_cast<int>(layers.front().weights.cols()));
    for (const auto& layer : layers) sizes.push_back(static_cast<int>(layer.weights.rows()));
    return sizes;
}

std::size_t MlpNetwork::input_size() const {
    return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols());
}

std::size_t MlpNetwork::output_size() const {
    return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weights.rows());
}

std::size_t MlpNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += static_cast<std::size_t>(layer.weights.size() + layer.biases.size());
    return n;
}

double& MlpNetwork::parameter(std::size_t index) { return flat_entry(layers, index); }
double MlpNetwork::parameter(std::size_t index) const { return flat_entry(layers, index); }

Gradients zero_gradients(const MlpNetwork& net) {
    Gradients g(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        g[l].weights = Eigen::MatrixXd::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
        g[l].biases = Eigen::VectorXd::Zero(net.layers[l].biases.size());
    }
    return g;
}

double& gradient_entry(Gradients& g, std::size_t index) { return flat_entry(g, index); }
double gradient_entry(const Gradients& g, std::size_t index) { return flat_entry(g, index); }

MlpNetwork init_network(std::span<const int> layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("a network needs at least an input and an output size");
    for (int s : layer_sizes) {
        if (s <= 0) throw ConfigError("layer sizes must be positive, got " + std::to_string(s));
    }
    std::mt19937_64 rng(seed);
    MlpNetwork net;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        DenseLayer layer;
        layer.weights.resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = bound * (2.0 * unit_uniform(rng) - 1.0);
        }
        layer.biases = Eigen::VectorXd::Zero(fan_out);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Eigen::MatrixXd forward(const MlpNetwork& net, const Eigen::MatrixXd& x, ForwardCache* cache) {
    if (net.layers.empty()) throw std::invalid_argument("forward on an empty network");
    if (static_cast<std::size_t>(x.rows()) != net.input_size()) {
        throw std::invalid_argument("input has " + std::to_string(x.rows()) + " rows, network expects " +
                                    std::to_string(net.input_size()));
    }
    if (cache) {
        cache->activations.clear();
        cache->activations.push_back(x);
    }
    Eigen::MatrixXd a = x;
    const std::size_t last = net.layers.size() - 1;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        Eigen::MatrixXd z = layer.weights * a;
        z.colwise() += layer.biases;
        if (l == last) return z;
        a = z.array().tanh().matrix();
        if (cache) cache->activations.push_back(a);
    }
    return a;
}

Eigen::VectorXd forward_one(const MlpNetwork& net, const Eigen::VectorXd& x) {
    return forward(net, Eigen::MatrixXd(x), nullptr).col(0);
}

Eigen::MatrixXd backward(const MlpNetwork& net, const ForwardCache& cache, const Eigen::MatrixXd& dL_dy,
                         Gradients& grads) {
    const std::size_t n_layers = net.layers.size();
    if (cache.activations.size() != n_layers) throw std::invalid_argument("forward cache does not match network");
    if (grads.size() != n_layers) throw std::invalid_argument("gradient storage does not match network");
    if (static_cast<std::size_t>(dL_dy.rows()) != net.output_size() ||
        dL_dy.cols() != cache.activations.front().cols()) {
        throw std::invalid_argument("output sensitivity shape does not match the forward batch");
    }
    Eigen::MatrixXd delta = dL_dy;  // dL/dz of the current layer
    for (std::size_t l = n_layers; l-- > 0;) {
        const Eigen::MatrixXd& input = cache.activations[l];
        grads[l].weights.noalias() += delta * input.transpose();
        grads[l].biases += delta.rowwise().sum();
        Eigen::MatrixXd upstream = net.layers[l].weights.transpose() * delta;
        if (l == 0) return upstream;
        delta = (upstream.array() * (1.0 - input.array().square())).matrix();
    }
    return delta;
}

AdamState make_adam(const MlpNetwork& net, double learning_rate) {
    AdamState s;
    s.first_moment = zero_gradients(net);
    s.second_moment = zero_gradients(net);
    s.learning_rate = learning_rate;
    return s;
}

void adam_update(MlpNetwork& net, const Gradients& grads, AdamState& opt) {
    if (opt.first_moment.size() != net.layers.size()) {
        opt.first_moment = zero_gradients(net);
        opt.second_moment = zero_gradients(net);
    }
    if (grads.size() != net.layers.size()) throw std::invalid_argument("gradient storage does not match network");
    ++opt.step;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    auto step = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = opt.beta1 * m + (1.0 - opt.beta1) * g;
        v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
        param.array() -= opt.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.epsilon);
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        step(net.layers[l].weights, grads[l].weights, opt.first_moment[l].weights, opt.second_moment[l].weights);
        step(net.layers[l].biases, grads[l].biases, opt.first_moment[l].biases, opt.second_moment[l].biases);
    }
}

GradientCheckReport gradient_check(const MlpNetwork& net, const LossFunction& loss, double tolerance,
                                   const GradientCheckOptions& options) {
    Gradients analytic = zero_gradients(net);
    loss(net, &analytic);

    const std::size_t n = net.parameter_count();
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (options.max_parameters > 0 && n > options.max_parameters) {
        std::mt19937_64 rng(options.seed);
        for (std::size_t i = 0; i < options.max_parameters; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(indices[i], indices[j]);
        }
        indices.resize(options.max_parameters);
        std::sort(indices.begin(), indices.end());
    }

    double scale = 0.0;
    for (std::size_t idx : indices) scale = std::max(scale, std::abs(gradient_entry(analytic, idx)));
    const double floor = std::max(1e-6 * scale, 1e-300);

    MlpNetwork probe = net;
    GradientCheckReport report;
    for (std::size_t idx : indices) {
        double& p = probe.parameter(idx);
        const double original = p;
        p = original + options.step;
        const double up = loss(probe, nullptr);
        p = original - options.step;
        const double down = loss(probe, nullptr);
        p = original;
        const double numeric = (up - down) / (2.0 * options.step);
        const double a = gradient_entry(analytic, idx);
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        if (report.checked == 0 || err > report.max_relative_error) {
            report.max_relative_error = err;
            report.worst_index = idx;
        }
        ++report.checked;
    }
    report.passed = report.max_relative_error <= tolerance;
    return report;
}

}  // namespace neuim
