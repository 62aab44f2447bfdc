#include "neuim/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "neuim/error.hpp"

namespace neuim {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 to_vec(const WindingPair& w) {
    Vec6 v;
    v << w.stator.q, w.stator.d, w.stator.z, w.rotor.q, w.rotor.d, w.rotor.z;
    return v;
}

WindingPair to_pair(const Eigen::Ref<const Vec6>& v) { return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}}; }

// Transposes of the linear pieces of the voltage equations. The linkage matrix is symmetric.
Vec6 linkage_adjoint(const MachineParams& p, const Vec6& a) {
    const WindingPair x = to_pair(a);
    return to_vec(flux_linkages(p, x.stator, x.rotor));
}

Vec6 resistance_adjoint(const MachineParams& p, const Vec6& a) {
    Vec6 out;
    out << p.r_s * a[0], p.r_s * a[1], p.r_s * a[2], p.r_r * a[3], p.r_r * a[4], p.r_r * a[5];
    return out;
}

// Speed voltage (w*l_d, -w*l_q, 0) per winding; its transpose maps a to (-w*a_d, w*a_q, 0).
Vec6 speed_voltage_adjoint(double w_s, double w_r, const Vec6& a) {
    Vec6 out;
    out << -w_s * a[1], w_s * a[0], 0.0, -w_r * a[4], w_r * a[3], 0.0;
    return out;
}

void check_index(const Trajectory& traj, std::size_t k) {
    if (k >= traj.size()) {
        throw std::out_of_range("sample " + std::to_string(k) + " outside trajectory of length " +
                                std::to_string(traj.size()));
    }
}

Eigen::MatrixXd hcat(const std::vector<Eigen::MatrixXd>& blocks, Eigen::Index rows) {
    Eigen::Index cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    Eigen::MatrixXd out(rows, cols);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        out.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    return out;
}

double common_dt(std::span<const Trajectory* const> trajs) {
    if (trajs.empty()) throw ConfigError("at least one training trajectory is required");
    const double dt = trajs.front()->dt;
    for (const Trajectory* t : trajs) {
        if (std::abs(t->dt - dt) > 1e-12 * dt) throw ConfigError("training trajectories do not share dt");
    }
    return dt;
}

template <typename Objective>
LossHistory run_adam(MlpNetwork& net, const Objective& objective, int epochs, const HybridConfig& cfg,
                     const std::string& what) {
    LossHistory history;
    if (epochs <= 0) return history;
    AdamState opt = make_adam(net, cfg.learning_rate);
    const auto window = static_cast<std::size_t>(std::max(cfg.early_stop_window, 1));
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        Gradients grads = zero_gradients(net);
        const LossReport loss = objective.evaluate(net, &grads);
        if (!std::isfinite(loss.total)) {
            throw NumericError(what + " loss became non-finite at epoch " + std::to_string(epoch));
        }
        history.push_back({epoch, loss});
        adam_update(net, grads, opt);
        if (history.size() > window) {
            const double before = history[history.size() - 1 - window].loss.total;
            if (std::abs(loss.total - before) <= cfg.early_stop_tolerance * std::abs(before)) break;
        }
    }
    return history;
}

}  // namespace

Normalizer Normalizer::identity(std::size_t n) { return uniform(n, 1.0); }

Normalizer Normalizer::uniform(std::size_t n, double scale) {
    const auto rows = static_cast<Eigen::Index>(n);
    return {Eigen::VectorXd::Zero(rows), Eigen::VectorXd::Constant(rows, scale)};
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& samples) {
    if (samples.cols() == 0) return identity(static_cast<std::size_t>(samples.rows()));
    Normalizer n;
    n.offset = samples.rowwise().mean();
    const Eigen::MatrixXd centered = samples.colwise() - n.offset;
    n.scale = (centered.array().square().rowwise().sum() / static_cast<double>(samples.cols())).sqrt().matrix();
    for (Eigen::Index r = 0; r < n.scale.size(); ++r) {
        if (!(n.scale[r] > 1e-12 * std::max(1.0, std::abs(n.offset[r])))) n.scale[r] = 1.0;
    }
    return n;
}

Eigen::MatrixXd Normalizer::to_units(const Eigen::MatrixXd& physical) const {
    return ((physical.colwise() - offset).array().colwise() / scale.array()).matrix();
}

Eigen::MatrixXd Normalizer::to_physical(const Eigen::MatrixXd& units) const {
    return ((units.array().colwise() * scale.array()).matrix().colwise() + offset);
}

std::array<double, kGInputs> g_features(const Trajectory& traj, std::size_t k) {
    check_index(traj, k);
    const Abc& i0 = traj.i_abcs.front();
    const Abc& v = traj.v_abcs[k];
    const double t_end = traj.t_end();
    return {i0.a, i0.b, i0.c, v.a, v.b, v.c, traj.omega[k], traj.omega_r[k],
            std::cos(traj.theta[k]), std::sin(traj.theta[k]), t_end > 0.0 ? traj.t[k] / t_end : 0.0};
}

Eigen::MatrixXd g_feature_matrix(const Trajectory& traj) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(kGInputs), static_cast<Eigen::Index>(traj.size()));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto f = g_features(traj, k);
        for (std::size_t r = 0; r < kGInputs; ++r) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = f[r];
    }
    return x;
}

std::array<double, kPInputs> p_features(const Trajectory& traj, const Abc& i_abcs, std::size_t k) {
    check_index(traj, k);
    const Abc& v = traj.v_abcs[k];
    return {i_abcs.a, i_abcs.b, i_abcs.c, v.a, v.b, v.c, traj.omega[k], traj.omega_r[k],
            std::cos(traj.theta[k]), std::sin(traj.theta[k])};
}

Eigen::MatrixXd p_feature_matrix(const Trajectory& traj, std::span<const Abc> i_abcs) {
    if (i_abcs.size() != traj.size()) throw std::invalid_argument("phase-current sequence length mismatch");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(kPInputs), static_cast<Eigen::Index>(traj.size()));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto f = p_features(traj, i_abcs[k], k);
        for (std::size_t r = 0; r < kPInputs; ++r) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = f[r];
    }
    return x;
}

GPrediction g_predict(const GModel& g, const Trajectory& traj, std::size_t k) {
    const auto f = g_features(traj, k);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(kGInputs), 1);
    for (std::size_t r = 0; r < kGInputs; ++r) x(static_cast<Eigen::Index>(r), 0) = f[r];
    const Eigen::MatrixXd y = g.output.to_physical(forward(g.net, g.input.to_units(x)));
    if (y.rows() != static_cast<Eigen::Index>(kGOutputs)) throw std::invalid_argument("G must have six outputs");
    GPrediction out;
    out.i_s = {y(0, 0), y(1, 0), y(2, 0)};
    out.i_r = {y(3, 0), y(4, 0), y(5, 0)};
    out.i_abcs = qd0_to_abc(traj.theta[k], out.i_s);
    return out;
}

CurrentSequence g_predict_all(const GModel& g, const Trajectory& traj) {
    CurrentSequence out;
    out.qd0 = g.output.to_physical(forward(g.net, g.input.to_units(g_feature_matrix(traj))));
    if (out.qd0.rows() != static_cast<Eigen::Index>(kGOutputs)) throw std::invalid_argument("G must have six outputs");
    out.abcs.resize(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        out.abcs[k] = qd0_to_abc(traj.theta[k], {out.qd0(0, c), out.qd0(1, c), out.qd0(2, c)});
    }
    return out;
}

Eigen::MatrixXd p_predict_all(const PModel& p, const Trajectory& traj, std::span<const Abc> i_abcs) {
    return p.output.to_physical(forward(p.net, p.input.to_units(p_feature_matrix(traj, i_abcs))));
}

Eigen::MatrixXd true_currents(const Trajectory& traj) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(kGOutputs), static_cast<Eigen::Index>(traj.size()));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = to_vec({traj.i_qd0s[k], traj.i_qd0r[k]});
    }
    return out;
}

Eigen::MatrixXd finite_difference_derivative(std::span<const Abc> i_abcs, double dt) {
    const auto n = static_cast<Eigen::Index>(i_abcs.size());
    Eigen::MatrixXd x(3, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Abc& i = i_abcs[static_cast<std::size_t>(k)];
        x.col(k) << i.a, i.b, i.c;
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, n);
    if (n < 2) return d;
    d.col(0) = (x.col(1) - x.col(0)) / dt;
    d.col(n - 1) = (x.col(n - 1) - x.col(n - 2)) / dt;
    for (Eigen::Index k = 1; k + 1 < n; ++k) d.col(k) = (x.col(k + 1) - x.col(k - 1)) / (2.0 * dt);
    return d;
}

FluxChainStep flux_chain(const MachineParams& p, const WindingPair& i_k, const WindingPair& i_next,
                         const Trajectory& traj, std::size_t k) {
    check_index(traj, k + 1);
    const double dt = traj.dt;
    const Qd0 v_k = abc_to_qd0(traj.theta[k], traj.v_abcs[k]);
    const Qd0 v_next = abc_to_qd0(traj.theta[k + 1], traj.v_abcs[k + 1]);

    FluxChainStep s;
    s.lambda = flux_linkages(p, i_k.stator, i_k.rotor);
    s.lambda_dot =
        flux_derivatives(p, v_k, i_k.stator, i_k.rotor, s.lambda.stator, s.lambda.rotor, traj.omega_r[k]);
    s.lambda_pred = to_pair(to_vec(s.lambda) + dt * to_vec(s.lambda_dot));
    s.lambda_dot_pred = flux_derivatives(p, v_next, i_next.stator, i_next.rotor, s.lambda_pred.stator,
                                         s.lambda_pred.rotor, traj.omega_r[k + 1]);
    return s;
}

SequenceLoss physics_sequence_loss(const Trajectory& traj, const Eigen::MatrixXd& currents) {
    const auto n = static_cast<Eigen::Index>(traj.size());
    if (currents.rows() != 6 || currents.cols() != n) throw std::invalid_argument("currents must be 6 x K");
    SequenceLoss out;
    out.gradient = Eigen::MatrixXd::Zero(6, n);
    if (n < 2) return out;

    const MachineParams& p = traj.params;
    const double dt = traj.dt;
    const double unit = 1.0 / (dt * std::max(traj.v_base, 1.0));
    const double count = 6.0 * static_cast<double>(n - 1);

    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const WindingPair i_k = to_pair(currents.col(k));
        const WindingPair i_next = to_pair(currents.col(k + 1));
        const FluxChainStep c = flux_chain(p, i_k, i_next, traj, ks);
        const Vec6 lambda_next = to_vec(flux_linkages(p, i_next.stator, i_next.rotor));

        const Vec6 delta = lambda_next - to_vec(c.lambda);
        const Vec6 delta_trap = 0.5 * dt * (to_vec(c.lambda_dot_pred) + to_vec(c.lambda_dot));
        const Vec6 r = unit * (delta - delta_trap);
        out.value += r.squaredNorm();

        // Reverse pass through the chain; g is dL/d(delta - delta_trap).
        const Vec6 g = (2.0 * unit / count) * r;
        const Vec6 a_slope_next = -0.5 * dt * g;
        const double ws_next = p.frame_speed(traj.omega_r[ks + 1]);
        const double ws_k = p.frame_speed(traj.omega_r[ks]);
        const Vec6 a_pred = -speed_voltage_adjoint(ws_next, ws_next - traj.omega_r[ks + 1], a_slope_next);
        const Vec6 a_slope = -0.5 * dt * g + dt * a_pred;
        const Vec6 a_lambda = -g + a_pred - speed_voltage_adjoint(ws_k, ws_k - traj.omega_r[ks], a_slope);

        out.gradient.col(k + 1) += linkage_adjoint(p, g) - resistance_adjoint(p, a_slope_next);
        out.gradient.col(k) += linkage_adjoint(p, a_lambda) - resistance_adjoint(p, a_slope);
    }
    out.value /= count;
    return out;
}

SequenceLoss data_sequence_loss(const Trajectory& traj, const Eigen::MatrixXd& currents,
                                const Eigen::VectorXd& scale) {
    const auto n = static_cast<Eigen::Index>(traj.size());
    if (currents.rows() != 6 || currents.cols() != n || scale.size() != 6) {
        throw std::invalid_argument("currents must be 6 x K with a 6-entry scale");
    }
    SequenceLoss out;
    if (n == 0) {
        out.gradient = Eigen::MatrixXd::Zero(6, 0);
        return out;
    }
    const double count = 6.0 * static_cast<double>(n);
    const Eigen::ArrayXXd err = (currents - true_currents(traj)).array().colwise() / scale.array();
    out.value = err.square().sum() / count;
    out.gradient = ((2.0 / count) * (err.colwise() / scale.array())).matrix();
    return out;
}

SequenceLoss derivative_sequence_loss(std::span<const Abc> i_abcs, const Eigen::MatrixXd& rates, double dt,
                                      double rate_scale) {
    const auto n = static_cast<Eigen::Index>(i_abcs.size());
    if (rates.rows() != 3 || rates.cols() != n) throw std::invalid_argument("rates must be 3 x K");
    SequenceLoss out;
    out.gradient = Eigen::MatrixXd::Zero(3, n);
    if (n < 2) return out;
    const double unit = 1.0 / (dt * rate_scale);
    const double count = 3.0 * static_cast<double>(n - 1);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const Abc& a = i_abcs[static_cast<std::size_t>(k)];
        const Abc& b = i_abcs[static_cast<std::size_t>(k + 1)];
        const Eigen::Vector3d delta(b.a - a.a, b.b - a.b, b.c - a.c);
        const Eigen::Vector3d r = unit * (delta - 0.5 * dt * (rates.col(k + 1) + rates.col(k)));
        out.value += r.squaredNorm();
        const Eigen::Vector3d g = (-dt * unit / count) * r;  // d/d(rate) of r^2 / count, times 1/2 * 2
        out.gradient.col(k) += g;
        out.gradient.col(k + 1) += g;
    }
    out.value /= count;
    return out;
}

SequenceLoss supervised_rate_loss(const Eigen::MatrixXd& rates, const Eigen::MatrixXd& targets, double rate_scale) {
    if (rates.rows() != targets.rows() || rates.cols() != targets.cols()) {
        throw std::invalid_argument("rate and target shapes differ");
    }
    SequenceLoss out;
    const double count = static_cast<double>(rates.size());
    if (count == 0.0) {
        out.gradient = Eigen::MatrixXd::Zero(rates.rows(), rates.cols());
        return out;
    }
    const Eigen::MatrixXd err = (rates - targets) / rate_scale;
    out.value = err.squaredNorm() / count;
    out.gradient = (2.0 / (count * rate_scale)) * err;
    return out;
}

std::size_t supervised_count(double data_fraction, std::size_t n) {
    if (!(data_fraction >= 0.0 && data_fraction <= 1.0)) {
        throw ConfigError("data fraction must lie in [0, 1], got " + std::to_string(data_fraction));
    }
    const auto count = static_cast<std::size_t>(std::floor(data_fraction * static_cast<double>(n) + 0.5));
    return std::min(count, n);
}

std::vector<TrainingSample> assign_supervision(std::span<const Trajectory* const> trajs, double data_fraction) {
    const std::size_t n = supervised_count(data_fraction, trajs.size());
    std::vector<TrainingSample> samples;
    samples.reserve(trajs.size());
    for (std::size_t i = 0; i < trajs.size(); ++i) samples.push_back({trajs[i], i < n});
    return samples;
}

double current_scale(const MachineParams& p, double v_base) {
    const std::complex<double> z(p.r_s + p.r_r, p.omega_e * (p.L_ls + p.L_lr));
    return std::max(v_base, 1.0) / std::abs(z);
}

GObjective::GObjective(const GModel& shape, std::span<const TrainingSample> samples, double physics_weight,
                       double data_weight)
    : output_(shape.output), physics_weight_(physics_weight), data_weight_(data_weight) {
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::Index offset = 0;
    for (const auto& s : samples) {
        if (s.trajectory == nullptr) throw std::invalid_argument("null training trajectory");
        blocks.push_back(shape.input.to_units(g_feature_matrix(*s.trajectory)));
        const auto len = static_cast<Eigen::Index>(s.trajectory->size());
        segments_.push_back({s.trajectory, offset, len, s.supervised});
        offset += len;
        if (s.supervised) ++supervised_;
    }
    inputs_ = hcat(blocks, static_cast<Eigen::Index>(kGInputs));
}

LossReport GObjective::evaluate(const MlpNetwork& net, Gradients* grads) const {
    LossReport report;
    if (segments_.empty()) return report;
    ForwardCache cache;
    const Eigen::MatrixXd y = forward(net, inputs_, grads ? &cache : nullptr);
    const Eigen::MatrixXd currents = output_.to_physical(y);
    Eigen::MatrixXd d_currents;
    if (grads) d_currents = Eigen::MatrixXd::Zero(currents.rows(), currents.cols());

    const auto n_all = static_cast<double>(segments_.size());
    const auto n_sup = static_cast<double>(supervised_);
    for (const auto& seg : segments_) {
        const Eigen::MatrixXd block = currents.middleCols(seg.offset, seg.length);
        const SequenceLoss phys = physics_sequence_loss(*seg.trajectory, block);
        report.physics += phys.value;
        if (grads && physics_weight_ != 0.0) {
            d_currents.middleCols(seg.offset, seg.length) += (physics_weight_ / n_all) * phys.gradient;
        }
        if (seg.supervised) {
            const SequenceLoss data = data_sequence_loss(*seg.trajectory, block, output_.scale);
            report.data += data.value;
            if (grads && data_weight_ != 0.0) {
                d_currents.middleCols(seg.offset, seg.length) += (data_weight_ / n_sup) * data.gradient;
            }
        }
    }
    report.physics /= n_all;
    if (supervised_ > 0) report.data /= n_sup;
    report.total = physics_weight_ * report.physics + data_weight_ * report.data;

    if (grads) {
        const Eigen::MatrixXd d_y = (d_currents.array().colwise() * output_.scale.array()).matrix();
        backward(net, cache, d_y, *grads);
    }
    return report;
}

PObjective::PObjective(const PModel& shape, const GModel& g, std::span<const Trajectory* const> trajs,
                       bool supervised)
    : output_(shape.output), supervised_(supervised) {
    dt_ = common_dt(trajs);
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::Index offset = 0;
    for (const Trajectory* traj : trajs) {
        CurrentSequence seq = g_predict_all(g, *traj);
        blocks.push_back(shape.input.to_units(p_feature_matrix(*traj, seq.abcs)));
        Segment seg{offset, static_cast<Eigen::Index>(traj->size()), std::move(seq.abcs), {}};
        if (supervised_) seg.targets = finite_difference_derivative(traj->i_abcs, traj->dt);
        offset += seg.length;
        segments_.push_back(std::move(seg));
    }
    inputs_ = hcat(blocks, static_cast<Eigen::Index>(kPInputs));
}

LossReport PObjective::evaluate(const MlpNetwork& net, Gradients* grads) const {
    LossReport report;
    if (segments_.empty()) return report;
    ForwardCache cache;
    const Eigen::MatrixXd y = forward(net, inputs_, grads ? &cache : nullptr);
    const Eigen::MatrixXd rates = output_.to_physical(y);
    Eigen::MatrixXd d_rates;
    if (grads) d_rates = Eigen::MatrixXd::Zero(rates.rows(), rates.cols());

    const double rate_scale = output_.scale[0];
    const auto n_all = static_cast<double>(segments_.size());
    double total = 0.0;
    for (const auto& seg : segments_) {
        const Eigen::MatrixXd block = rates.middleCols(seg.offset, seg.length);
        const SequenceLoss l = supervised_ ? supervised_rate_loss(block, seg.targets, rate_scale)
                                           : derivative_sequence_loss(seg.i_abcs, block, dt_, rate_scale);
        total += l.value;
        if (grads) d_rates.middleCols(seg.offset, seg.length) += l.gradient / n_all;
    }
    total /= n_all;
    (supervised_ ? report.data : report.physics) = total;
    report.total = total;

    if (grads) {
        const Eigen::MatrixXd d_y = (d_rates.array().colwise() * output_.scale.array()).matrix();
        backward(net, cache, d_y, *grads);
    }
    return report;
}

GModel make_g_model(std::span<const Trajectory* const> trajs, const HybridConfig& cfg) {
    GModel g;
    g.dt = common_dt(trajs);
    std::vector<int> sizes{static_cast<int>(kGInputs)};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(static_cast<int>(kGOutputs));
    g.net = init_network(sizes, cfg.seed);

    std::vector<Eigen::MatrixXd> blocks;
    double scale = 0.0;
    for (const Trajectory* t : trajs) {
        blocks.push_back(g_feature_matrix(*t));
        scale = std::max(scale, current_scale(t->params, t->v_base));
    }
    g.input = Normalizer::fit(hcat(blocks, static_cast<Eigen::Index>(kGInputs)));
    g.output = Normalizer::uniform(kGOutputs, scale);
    g.info.seed = cfg.seed;
    g.info.data_fraction = cfg.data_fraction;
    for (const Trajectory* t : trajs) {
        if (std::find(g.info.kinds.begin(), g.info.kinds.end(), t->kind) == g.info.kinds.end()) {
            g.info.kinds.push_back(t->kind);
        }
    }
    return g;
}

PModel make_p_model(const GModel& g, std::span<const Trajectory* const> trajs, const HybridConfig& cfg) {
    PModel p;
    p.dt = common_dt(trajs);
    std::vector<int> sizes{static_cast<int>(kPInputs)};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(static_cast<int>(kPOutputs));
    p.net = init_network(sizes, cfg.seed + 1);

    std::vector<Eigen::MatrixXd> blocks;
    for (const Trajectory* t : trajs) blocks.push_back(p_feature_matrix(*t, g_predict_all(g, *t).abcs));
    p.input = Normalizer::fit(hcat(blocks, static_cast<Eigen::Index>(kPInputs)));
    // Phase currents rotate at the supply frequency, so their rates scale with omega_e.
    p.output = Normalizer::uniform(kPOutputs, trajs.front()->params.omega_e * g.output.scale[0]);
    p.info = g.info;
    return p;
}

LossEvaluation loss_g_physics(const GModel& g, std::span<const Trajectory* const> trajs) {
    const std::vector<TrainingSample> samples = assign_supervision(trajs, 0.0);
    LossEvaluation out{{}, zero_gradients(g.net)};
    out.loss = GObjective(g, samples, 1.0, 1.0).evaluate(g.net, &out.gradients);
    return out;
}

LossEvaluation loss_data(const GModel& g, std::span<const TrainingSample> samples) {
    for (const auto& s : samples) {
        if (!s.supervised) {
            throw ConfigError("trajectory '" + (s.trajectory ? s.trajectory->name : std::string("?")) +
                              "' has no supervised targets");
        }
    }
    LossEvaluation out{{}, zero_gradients(g.net)};
    out.loss = GObjective(g, samples, 0.0, 1.0).evaluate(g.net, &out.gradients);
    return out;
}

LossEvaluation loss_g_hybrid(const GModel& g, std::span<const Trajectory* const> trajs, const HybridConfig& cfg) {
    const std::vector<TrainingSample> samples = assign_supervision(trajs, cfg.data_fraction);
    LossEvaluation out{{}, zero_gradients(g.net)};
    out.loss = GObjective(g, samples, cfg.physics_weight, cfg.data_weight).evaluate(g.net, &out.gradients);
    return out;
}

LossEvaluation loss_p(const PModel& p, const GModel& g, std::span<const Trajectory* const> trajs) {
    LossEvaluation out{{}, zero_gradients(p.net)};
    out.loss = PObjective(p, g, trajs, false).evaluate(p.net, &out.gradients);
    return out;
}

TrainResult<GModel> train_g(std::span<const Trajectory* const> trajs, const HybridConfig& cfg) {
    const std::vector<TrainingSample> samples = assign_supervision(trajs, cfg.data_fraction);
    TrainResult<GModel> out{make_g_model(trajs, cfg), {}};
    const std::size_t n_sup = supervised_count(cfg.data_fraction, trajs.size());
    out.model.info.method = cfg.physics_weight == 0.0 ? "data" : (n_sup == 0 ? "physics" : "hybrid");
    out.model.info.epochs = cfg.epochs;
    const GObjective objective(out.model, samples, cfg.physics_weight, cfg.data_weight);
    out.history = run_adam(out.model.net, objective, cfg.epochs, cfg, "G");
    return out;
}

TrainResult<PModel> train_p(const GModel& g, std::span<const Trajectory* const> trajs, const HybridConfig& cfg) {
    TrainResult<PModel> out{make_p_model(g, trajs, cfg), {}};
    out.model.info.epochs = cfg.p_epochs;
    const PObjective objective(out.model, g, trajs, cfg.supervised_p);
    out.history = run_adam(out.model.net, objective, cfg.p_epochs, cfg, "P");
    return out;
}

}  // namespace neuim
