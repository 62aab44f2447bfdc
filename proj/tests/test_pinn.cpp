#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "neuim/error.hpp"
#include "neuim/pinn.hpp"
#include "support.hpp"

using namespace neuim;
using test_support::max_relative_gradient_error;
using test_support::short_trajectory;

namespace {

HybridConfig toy_config(double fraction = 0.0) {
    HybridConfig cfg;
    cfg.hidden = {5, 8};
    cfg.data_fraction = fraction;
    cfg.seed = 3;
    return cfg;
}

// Two-sample grid on a machine whose every inductance is 1 H, with no resistance and a
// stationary frame, so each residual is a difference of currents minus a voltage integral.
Trajectory hand_trajectory(double dt, double vq0, double vq1) {
    Trajectory t;
    t.name = "hand";
    t.params.r_s = 0.0;
    t.params.r_r = 0.0;
    t.params.L_ls = 1.0;
    t.params.L_lr = 1.0;
    t.params.L_M = 1.0;
    t.params.J = 1.0;
    t.params.frame = ReferenceFrame::Stationary;
    t.params.omega_e = 2.0 * std::numbers::pi * 60.0;
    t.dt = dt;
    t.v_base = 2.0;
    t.resize(2);
    t.t = {0.0, dt};
    t.v_abcs = {{vq0, -0.5 * vq0, -0.5 * vq0}, {vq1, -0.5 * vq1, -0.5 * vq1}};
    return t;
}

// Physics loss with the simulator currents, scaled by `gain`, standing in for G.
double truth_physics_loss(const Trajectory& t, double gain = 1.0) {
    return physics_sequence_loss(t, gain * true_currents(t)).value;
}

template <typename Evaluate>
auto as_loss(const GModel& g, Evaluate eval) {
    return [g, eval](const MlpNetwork& net, Gradients* grads) {
        GModel m = g;
        m.net = net;
        LossEvaluation e = eval(m);
        if (grads) *grads = e.gradients;
        return e.loss.total;
    };
}

}  // namespace

TEST_CASE("G features") {
    const Trajectory t = simulate(free_acceleration_scenario(small_machine(), phase_peak_from_line_rms(220), 0.1, 1e-3));
    const auto f0 = g_features(t, 0);
    CHECK(f0[0] == 0.0);
    CHECK(f0[1] == 0.0);
    CHECK(f0[2] == 0.0);
    for (std::size_t k = 0; k < t.size(); k += 7) {
        const auto f = g_features(t, k);
        CHECK(f[8] * f[8] + f[9] * f[9] == doctest::Approx(1.0));
        CHECK(f[10] >= 0.0);
        CHECK(f[10] <= 1.0);
        CHECK(f[6] == t.omega[k]);
        CHECK(f[7] == t.omega_r[k]);
    }
    CHECK(g_features(t, t.size() - 1)[10] == 1.0);
    CHECK_THROWS(g_features(t, t.size()));
    const Eigen::MatrixXd x = g_feature_matrix(t);
    CHECK(x.rows() == 11);
    CHECK(x.cols() == static_cast<Eigen::Index>(t.size()));
}

TEST_CASE("P features") {
    Trajectory t = simulate(free_acceleration_scenario(small_machine(), 0.0, 0.01, 1e-3));
    const auto rest = p_features(t, {}, 0);
    for (int i = 0; i < 6; ++i) CHECK(rest[static_cast<std::size_t>(i)] == 0.0);
    const auto f = p_features(t, {1, 2, 3}, 4);
    CHECK(f[0] == 1.0);
    CHECK(f[2] == 3.0);
    CHECK(f[6] == t.omega[4]);
    CHECK(f[7] == t.omega_r[4]);
    CHECK(f[8] * f[8] + f[9] * f[9] == doctest::Approx(1.0));
}

TEST_CASE("normalizers") {
    Eigen::MatrixXd s(2, 4);
    s << 1, 2, 3, 4, 5, 5, 5, 5;
    const Normalizer n = Normalizer::fit(s);
    CHECK(n.offset(0) == doctest::Approx(2.5));
    CHECK(n.scale(0) == doctest::Approx(std::sqrt(1.25)));
    CHECK(n.scale(1) == 1.0);
    CHECK((n.to_physical(n.to_units(s)) - s).cwiseAbs().maxCoeff() < 1e-14);
    const Normalizer u = Normalizer::uniform(3, 4.0);
    CHECK(u.offset.isZero());
    CHECK(u.scale(2) == 4.0);
}

TEST_CASE("G predictions are consistent between frames") {
    const Trajectory t = short_trajectory(20);
    const std::vector<const Trajectory*> trajs{&t};
    GModel g = make_g_model(trajs, toy_config());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const GPrediction p = g_predict(g, t, k);
        const Qd0 back = abc_to_qd0(t.theta[k], p.i_abcs);
        CHECK(std::abs(back.q - p.i_s.q) < 1e-12);
        CHECK(std::abs(back.d - p.i_s.d) < 1e-12);
        CHECK(std::abs(back.z - p.i_s.z) < 1e-12);
    }
    const CurrentSequence all = g_predict_all(g, t);
    CHECK(all.qd0(3, 5) == doctest::Approx(g_predict(g, t, 5).i_r.q));

    for (auto& l : g.net.layers) {
        l.weights.setZero();
        l.biases.setZero();
    }
    const GPrediction z = g_predict(g, t, 3);
    CHECK(z.i_s.q == g.output.offset(0));
    CHECK(z.i_r.z == g.output.offset(5));
}

TEST_CASE("flux chain on simulator currents") {
    auto predictor_error = [](double dt) {
        const Trajectory t = short_trajectory(static_cast<std::size_t>(std::lround(0.02 / dt)), dt);
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < t.size(); ++k) {
            const FluxChainStep s =
                flux_chain(t.params, {t.i_qd0s[k], t.i_qd0r[k]}, {t.i_qd0s[k + 1], t.i_qd0r[k + 1]}, t, k);
            CHECK(s.lambda.stator == t.lambda_qd0s[k]);
            CHECK(s.lambda.rotor == t.lambda_qd0r[k]);
            worst = std::max({worst, std::abs(s.lambda_pred.stator.q - t.lambda_qd0s[k + 1].q),
                              std::abs(s.lambda_pred.rotor.d - t.lambda_qd0r[k + 1].d)});
        }
        return worst;
    };
    const double e1 = predictor_error(2e-4);
    const double e2 = predictor_error(1e-4);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("flux chain is homogeneous in the currents without a source") {
    Trajectory t = simulate(free_acceleration_scenario(small_machine(), 0.0, 0.01, 1e-3));
    for (std::size_t k = 0; k < t.size(); ++k) t.omega_r[k] = 100.0 + 10.0 * static_cast<double>(k);
    const WindingPair a{{1.0, -2.0, 0.5}, {0.3, 0.7, -0.1}};
    const WindingPair b{{0.4, 1.5, -0.2}, {-0.6, 0.2, 0.05}};
    const FluxChainStep zero = flux_chain(t.params, {}, {}, t, 2);
    CHECK(zero.lambda_dot_pred.stator == Qd0{});
    CHECK(zero.lambda_pred.rotor == Qd0{});
    const FluxChainStep s1 = flux_chain(t.params, a, b, t, 2);
    auto scale = [](const WindingPair& w, double f) {
        return WindingPair{{f * w.stator.q, f * w.stator.d, f * w.stator.z}, {f * w.rotor.q, f * w.rotor.d, f * w.rotor.z}};
    };
    const FluxChainStep s2 = flux_chain(t.params, scale(a, 2.0), scale(b, 2.0), t, 2);
    CHECK(s2.lambda.stator.q == doctest::Approx(2.0 * s1.lambda.stator.q));
    CHECK(s2.lambda_dot.rotor.d == doctest::Approx(2.0 * s1.lambda_dot.rotor.d));
    CHECK(s2.lambda_pred.stator.d == doctest::Approx(2.0 * s1.lambda_pred.stator.d));
    CHECK(s2.lambda_dot_pred.rotor.q == doctest::Approx(2.0 * s1.lambda_dot_pred.rotor.q));
}

TEST_CASE("physics residual on a hand-computable grid") {
    const double dt = 0.01, vq0 = 3.0, vq1 = 5.0;
    const Trajectory t = hand_trajectory(dt, vq0, vq1);
    Eigen::MatrixXd c(6, 2);
    c.col(0) << 0.1, 0.2, 0.3, -0.1, 0.05, 0.0;
    c.col(1) << 0.4, -0.1, 0.1, 0.2, 0.15, 0.2;
    const Eigen::VectorXd d = c.col(1) - c.col(0);
    const double unit = 1.0 / (dt * t.v_base);
    // lambda_s = 2 i_s + i_r and lambda_r = i_s + 2 i_r on q and d; zero sequence sees 1 H.
    const double rq_s = unit * (2 * d(0) + d(3) - 0.5 * dt * (vq0 + vq1));
    const double rd_s = unit * (2 * d(1) + d(4));
    const double rz_s = unit * d(2);
    const double rq_r = unit * (d(0) + 2 * d(3));
    const double rd_r = unit * (d(1) + 2 * d(4));
    const double rz_r = unit * d(5);
    const double expected = (rq_s * rq_s + rd_s * rd_s + rz_s * rz_s + rq_r * rq_r + rd_r * rd_r + rz_r * rz_r) / 6.0;
    CHECK(physics_sequence_loss(t, c).value == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("ground-truth currents nearly satisfy the physics residual") {
    auto loss_at = [](double dt, double gain) {
        const Trajectory t = simulate(torque_change_scenario(small_machine(), phase_peak_from_line_rms(220), 5.0, dt));
        return truth_physics_loss(t, gain);
    };
    const double l1 = loss_at(1e-3, 1.0);
    const double l2 = loss_at(5e-4, 1.0);
    CHECK(l1 / l2 > 8.0);
    CHECK(loss_at(1e-3, 1.1) > 10.0 * l1);
}

TEST_CASE("data loss") {
    const Trajectory t = short_trajectory(10);
    const Eigen::MatrixXd truth = true_currents(t);
    const Eigen::VectorXd unit = Eigen::VectorXd::Ones(6);
    CHECK(data_sequence_loss(t, truth, unit).value == 0.0);
    Eigen::MatrixXd shifted = truth;
    shifted.row(2).array() += 0.5;
    CHECK(data_sequence_loss(t, shifted, unit).value == doctest::Approx(0.25 / 6.0));
    CHECK(data_sequence_loss(t, shifted, 2.0 * unit).value == doctest::Approx(0.0625 / 6.0));
}

TEST_CASE("derivative residual") {
    const double w = 2.0 * std::numbers::pi * 60.0;
    auto residual = [w](double dt) {
        std::vector<Abc> i;
        Eigen::MatrixXd rates(3, 101);
        for (int k = 0; k <= 100; ++k) {
            const double t = k * dt;
            i.push_back({std::sin(w * t), std::sin(w * t - 2.0), std::sin(w * t + 2.0)});
            rates.col(k) << w * std::cos(w * t), w * std::cos(w * t - 2.0), w * std::cos(w * t + 2.0);
        }
        return derivative_sequence_loss(i, rates, dt, w).value;
    };
    CHECK(residual(2e-4) / residual(1e-4) == doctest::Approx(16.0).epsilon(0.05));

    std::vector<Abc> flat(5, Abc{1, 2, 3});
    CHECK(derivative_sequence_loss(flat, Eigen::MatrixXd::Zero(3, 5), 1e-3, 1.0).value == 0.0);
    std::vector<Abc> ramp{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK(derivative_sequence_loss(ramp, Eigen::MatrixXd::Zero(3, 3), 1e-3, 1.0).value > 0.0);
}

TEST_CASE("supervision selection") {
    CHECK(supervised_count(0.75, 4) == 3);
    CHECK(supervised_count(0.5, 3) == 2);
    CHECK(supervised_count(0.25, 3) == 1);
    CHECK(supervised_count(0.0, 5) == 0);
    CHECK(supervised_count(1.0, 5) == 5);
    CHECK_THROWS_AS(supervised_count(1.5, 3), ConfigError);
    CHECK_THROWS_AS(supervised_count(-0.1, 3), ConfigError);
    const Trajectory a = short_trajectory(3), b = short_trajectory(3), c = short_trajectory(3), d = short_trajectory(3);
    const std::vector<const Trajectory*> trajs{&a, &b, &c, &d};
    const auto s = assign_supervision(trajs, 0.75);
    CHECK(s[0].supervised);
    CHECK(s[2].supervised);
    CHECK_FALSE(s[3].supervised);
}

TEST_CASE("hybrid loss limits") {
    const Trajectory a = short_trajectory(30);
    const Trajectory b = short_trajectory(30, 1e-3, 0.12);
    const std::vector<const Trajectory*> trajs{&a, &b};
    const GModel g = make_g_model(trajs, toy_config());

    const LossEvaluation phys = loss_g_physics(g, trajs);
    const LossEvaluation h0 = loss_g_hybrid(g, trajs, toy_config(0.0));
    CHECK(h0.loss.total == phys.loss.total);
    CHECK(h0.loss.data == 0.0);
    for (std::size_t l = 0; l < g.net.layers.size(); ++l) {
        CHECK(h0.gradients[l].weights == phys.gradients[l].weights);
        CHECK(h0.gradients[l].biases == phys.gradients[l].biases);
    }

    const LossEvaluation h1 = loss_g_hybrid(g, trajs, toy_config(1.0));
    const LossEvaluation data = loss_data(g, assign_supervision(trajs, 1.0));
    CHECK(h1.loss.total == doctest::Approx(phys.loss.total + data.loss.total).epsilon(1e-13));
    CHECK_THROWS_AS(loss_data(g, assign_supervision(trajs, 0.5)), ConfigError);
}

TEST_CASE("loss gradients match central differences on a toy network") {
    const Trajectory t1 = short_trajectory(3);
    const Trajectory t2 = short_trajectory(3, 1e-3, 0.2);
    const std::vector<const Trajectory*> trajs{&t1, &t2};
    const GModel g = make_g_model(trajs, toy_config());

    CHECK(max_relative_gradient_error(g.net, as_loss(g, [&](const GModel& m) { return loss_g_physics(m, trajs); })) <
          1e-4);
    CHECK(max_relative_gradient_error(
              g.net, as_loss(g, [&](const GModel& m) { return loss_data(m, assign_supervision(trajs, 1.0)); })) < 1e-4);
    CHECK(max_relative_gradient_error(
              g.net, as_loss(g, [&](const GModel& m) { return loss_g_hybrid(m, trajs, toy_config(0.5)); })) < 1e-4);

    const PModel p = make_p_model(g, trajs, toy_config());
    auto p_loss = [&](const MlpNetwork& net, Gradients* grads) {
        PModel m = p;
        m.net = net;
        LossEvaluation e = loss_p(m, g, trajs);
        if (grads) *grads = e.gradients;
        return e.loss.total;
    };
    CHECK(max_relative_gradient_error(p.net, p_loss) < 1e-4);
}

TEST_CASE("training") {
    const Trajectory t = short_trajectory(150);
    const std::vector<const Trajectory*> trajs{&t};

    HybridConfig none = toy_config();
    none.epochs = 0;
    none.p_epochs = 0;
    const TrainResult<GModel> g0 = train_g(trajs, none);
    CHECK(g0.history.empty());
    CHECK(g0.model.net.layers[0].weights == make_g_model(trajs, none).net.layers[0].weights);
    CHECK(g0.model.info.method == "physics");

    HybridConfig cfg = toy_config();
    cfg.epochs = 80;
    cfg.p_epochs = 40;
    const TrainResult<GModel> g1 = train_g(trajs, cfg);
    REQUIRE(g1.history.size() == 80);
    CHECK(g1.history[0].epoch == 1);
    CHECK(g1.history.back().loss.total < g1.history.front().loss.total);
    for (std::size_t e = 50; e < g1.history.size(); ++e) CHECK(g1.history[e].loss.total <= g1.history[0].loss.total);

    const TrainResult<GModel> again = train_g(trajs, cfg);
    CHECK(again.model.net.layers[1].weights == g1.model.net.layers[1].weights);

    const TrainResult<PModel> p = train_p(g1.model, trajs, cfg);
    CHECK(p.history.size() == 40);
    CHECK(p.history.back().loss.total < p.history.front().loss.total);
    CHECK(p.model.info.epochs == 40);

    HybridConfig data = cfg;
    data.data_fraction = 1.0;
    data.physics_weight = 0.0;
    CHECK(train_g(trajs, data).model.info.method == "data");
}

TEST_CASE("a non-finite loss aborts training with the epoch") {
    Trajectory t = short_trajectory(5);
    for (auto& v : t.v_abcs) v = {1e308, -1e308, 1e308};
    const std::vector<const Trajectory*> trajs{&t};
    HybridConfig cfg = toy_config();
    cfg.epochs = 5;
    try {
        train_g(trajs, cfg);
        FAIL("expected a numeric failure");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
    }
}
