#include <doctest.h>

#include <numeric>

#include <Eigen/LU>

#include "helpers.hpp"
#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/fourier.hpp"
#include "sgdgp/objectives.hpp"
#include "sgdgp/pathwise.hpp"
#include "sgdgp/sgd.hpp"

using namespace sgdgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const KernelSpec spec2 = KernelSpec::isotropic(KernelFamily::squared_exponential, 2, 0.8, 1.0, 0.3);

SampleSlots slots_for(const Dataset& d, Eigen::Index s, std::uint64_t seed) {
    return draw_sample_slots(spec2, d.inputs(), s, 200, seed);
}

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("full-batch mean gradient equals the dense closed form") {
    for (std::uint64_t p = 0; p < 5; ++p) {
        const Dataset d = test::random_problem(32, 2, 40 + p);
        const RepresenterObjective obj = mean_objective(spec2, d);
        Rng rng = make_rng(50 + p);
        const VectorXd v = standard_normal_vector(32, rng);
        const MatrixXd k = gram(spec2, d.inputs());
        const VectorXd expected = 2.0 * (k * (k * v - d.targets()) / spec2.noise_variance + k * v);
        std::vector<Eigen::Index> all(32);
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        const MatrixXd full = obj.stochastic_gradient(v, all, nullptr);
        CHECK(max_abs(obj.dense_gradient(v) - expected) < 1e-8);
        CHECK(max_abs(full - expected) < 1e-8);
    }
}

TEST_CASE("minibatch and feature gradient estimates are unbiased") {
    const Dataset d = test::random_problem(16, 1, 60);
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 0.8, 1.0, 0.3);
    const RepresenterObjective obj = mean_objective(spec, d);
    Rng rng = make_rng(61);
    const VectorXd v = 0.3 * standard_normal_vector(16, rng);
    const VectorXd dense = obj.dense_gradient(v);
    const int draws = 10000;
    VectorXd sum = VectorXd::Zero(16), sum2 = VectorXd::Zero(16);
    for (int r = 0; r < draws; ++r) {
        const auto batch = draw_batch(16, 4, rng);
        const FourierFeatureMap map = sample_feature_map(spec, 20, rng);
        const VectorXd g = obj.stochastic_gradient(v, batch, &map);
        sum += g;
        sum2 += g.cwiseAbs2();
    }
    const VectorXd mean = sum / draws;
    const VectorXd se = ((sum2 / draws - mean.cwiseAbs2()) / draws).cwiseSqrt();
    for (Eigen::Index i = 0; i < 16; ++i) CHECK(std::abs(mean[i] - dense[i]) < 3 * se[i]);
}

TEST_CASE("exact stationary points have vanishing gradients") {
    const Dataset d = test::random_problem(40, 2, 62);
    const RepresenterObjective mean = mean_objective(spec2, d);
    const VectorXd vstar = fit_exact(spec2, d).weights();
    CHECK((mean.stationary_point().col(0) - vstar).norm() < 1e-8 * vstar.norm());
    CHECK(mean.dense_gradient(vstar).norm() < 1e-6);

    const SampleSlots slots = slots_for(d, 3, 63);
    for (auto form : {SampleForm::standard, SampleForm::shifted}) {
        const RepresenterObjective obj = sample_objective(spec2, d, slots.prior_values, slots.noise, form);
        CHECK(obj.dense_gradient(obj.stationary_point()).norm() < 1e-6);
    }
}

TEST_CASE("standard and shifted sample objectives share dense gradients") {
    const Dataset d = test::random_problem(32, 2, 64);
    const SampleSlots slots = slots_for(d, 4, 65);
    const RepresenterObjective a = sample_objective(spec2, d, slots.prior_values, slots.noise, SampleForm::standard);
    const RepresenterObjective b = sample_objective(spec2, d, slots.prior_values, slots.noise, SampleForm::shifted);
    Rng rng = make_rng(66);
    const MatrixXd alpha = standard_normal_matrix(32, 4, rng);
    CHECK(max_abs(a.dense_gradient(alpha) - b.dense_gradient(alpha)) < 1e-10 * max_abs(a.dense_gradient(alpha)));
    CHECK(max_abs(a.stationary_point() - b.stationary_point()) < 1e-8);
    // column blocks see the matching targets
    CHECK(max_abs(a.dense_gradient(alpha.middleCols(1, 2), 1) - a.dense_gradient(alpha).middleCols(1, 2)) < 1e-12);
}

TEST_CASE("inducing objectives reduce to the full ones when z = x") {
    const Dataset d = test::random_problem(30, 2, 67);
    const SampleSlots slots = slots_for(d, 2, 68);
    Rng rng = make_rng(69);
    const VectorXd v = standard_normal_vector(30, rng);
    const MatrixXd alpha = standard_normal_matrix(30, 2, rng);
    CHECK(max_abs(inducing_mean_objective(spec2, d, d.inputs()).dense_gradient(v) -
                  mean_objective(spec2, d).dense_gradient(v)) < 1e-8);
    for (auto form : {SampleForm::standard, SampleForm::shifted}) {
        const RepresenterObjective full = sample_objective(spec2, d, slots.prior_values, slots.noise, form);
        const RepresenterObjective ind =
            inducing_sample_objective(spec2, d, d.inputs(), slots.prior_values, slots.noise, form);
        CHECK(max_abs(full.dense_gradient(alpha) - ind.dense_gradient(alpha)) < 1e-8);
        const std::vector<Eigen::Index> batch{3, 7, 7, 20};
        CHECK(max_abs(full.data_gradient(alpha, batch) - ind.data_gradient(alpha, batch)) < 1e-8);
    }
}

TEST_CASE("inducing stationary points match the ridge closed form") {
    const Dataset d = test::random_problem(64, 2, 70);
    Rng rng = make_rng(71);
    const MatrixXd z = test::uniform_matrix(8, 2, -3, 3, rng);
    const MatrixXd kxz = gram(spec2, d.inputs(), z), kzz = gram(spec2, z);
    const MatrixXd h = kxz.transpose() * kxz / spec2.noise_variance + kzz;
    const Eigen::FullPivLU<MatrixXd> lu(h);

    const RepresenterObjective mean = inducing_mean_objective(spec2, d, z);
    const VectorXd vstar = lu.solve(kxz.transpose() * d.targets() / spec2.noise_variance);
    CHECK(max_abs(mean.stationary_point().col(0) - vstar) < 1e-6);
    CHECK(mean.dense_gradient(vstar).norm() < 1e-6 * (1 + h.norm()));

    const SampleSlots slots = slots_for(d, 2, 72);
    const MatrixXd astar = lu.solve(kxz.transpose() * (slots.prior_values + slots.noise) / spec2.noise_variance);
    const RepresenterObjective std_obj =
        inducing_sample_objective(spec2, d, z, slots.prior_values, slots.noise, SampleForm::standard);
    CHECK(max_abs(std_obj.stationary_point() - astar) < 1e-6);
}

TEST_CASE("inducing samples with z = x equal the full-model samples") {
    const Dataset d = test::random_problem(64, 2, 73);
    const SampleSlots slots = slots_for(d, 3, 74);
    const MatrixXd full =
        sample_objective(spec2, d, slots.prior_values, slots.noise, SampleForm::shifted).stationary_point();
    const MatrixXd ind = inducing_sample_objective(spec2, d, d.inputs(), slots.prior_values, slots.noise,
                                                   SampleForm::shifted)
                             .stationary_point();
    const VectorXd mean = mean_objective(spec2, d).stationary_point().col(0);
    Rng rng = make_rng(75);
    const MatrixXd q = test::uniform_matrix(20, 2, -3, 3, rng);
    const MatrixXd a = assemble(spec2, d.inputs(), mean, full, slots.priors).samples(q);
    const MatrixXd b = assemble(spec2, d.inputs(), mean, ind, slots.priors).samples(q);
    CHECK(max_abs(a - b) < 1e-6);
}

TEST_CASE("run_sgd converges on a two-variable quadratic") {
    MatrixXd a(2, 2);
    a << 1.5, 0.25, 0.25, 1.0;
    const VectorXd b = (VectorXd(2) << 0.03, -0.02).finished();
    const VectorXd opt = a.ldlt().solve(b);
    SgdConfig cfg;
    cfg.steps = 10000;
    cfg.learning_rate = 0.5;
    cfg.momentum = 0.0;
    const SgdResult r = run_sgd([&](const MatrixXd& w, long) -> MatrixXd { return a * w - b; }, cfg, MatrixXd::Zero(2, 1));
    CHECK((r.weights.col(0) - opt).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((r.last_iterate.col(0) - opt).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Nesterov update follows its recursion") {
    SgdConfig cfg;
    cfg.steps = 2;
    cfg.learning_rate = 0.1;
    cfg.momentum = 0.5;
    cfg.polyak_averaging = false;
    // constant gradient g: b1 = g, w1 = -eta(g + beta g); b2 = 1.5 g, w2 = w1 - eta(g + 0.75 g)
    const SgdResult r = run_sgd([](const MatrixXd& w, long) -> MatrixXd { return MatrixXd::Ones(w.rows(), w.cols()); },
                                cfg, MatrixXd::Zero(1, 1));
    CHECK(r.weights(0, 0) == doctest::Approx(-0.1 * 1.5 - 0.1 * 1.75).epsilon(1e-14));
}

TEST_CASE("zero gradient leaves weights at zero; runs are deterministic") {
    SgdConfig cfg;
    cfg.steps = 50;
    const SgdResult r = run_sgd([](const MatrixXd& w, long) -> MatrixXd { return MatrixXd::Zero(w.rows(), w.cols()); },
                                cfg, MatrixXd::Zero(3, 2));
    CHECK(r.weights.cwiseAbs().maxCoeff() == 0.0);

    const Dataset d = test::random_problem(100, 2, 76);
    const RepresenterObjective obj = mean_objective(spec2, d);
    SgdConfig c2;
    c2.steps = 200;
    c2.batch_size = 16;
    c2.checkpoint_every = 50;
    c2.seed = 77;
    const SgdConfig scaled = scaled_to_reference(c2, obj);
    const SgdResult x = optimize(obj, scaled, MatrixXd::Zero(100, 1));
    const SgdResult y = optimize(obj, scaled, MatrixXd::Zero(100, 1));
    CHECK(x.weights == y.weights);
    REQUIRE(x.trace.checkpoints.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(x.trace.checkpoints[i].step == 50 * static_cast<long>(i + 1));
        CHECK(x.trace.checkpoints[i].weights == y.trace.checkpoints[i].weights);
    }
}

TEST_CASE("optimize reduces the mean objective and flags divergence") {
    const Dataset d = test::random_problem(200, 2, 78);
    const RepresenterObjective obj = mean_objective(spec2, d);
    SgdConfig cfg;
    cfg.steps = 1000;
    cfg.batch_size = 32;
    cfg.seed = 79;
    const VectorXd v = optimize(obj, scaled_to_reference(cfg, obj), MatrixXd::Zero(200, 1)).weights.col(0);
    const double start = obj.value(MatrixXd::Zero(200, 1)), best = obj.value(obj.stationary_point());
    CHECK(obj.value(v) - best < 0.05 * (start - best));

    cfg.learning_rate = 1e3;
    cfg.steps = 2000;
    CHECK_THROWS_AS(optimize(obj, scaled_to_reference(cfg, obj), MatrixXd::Zero(200, 1)), DivergenceError);
}

TEST_CASE("sgd config validation") {
    SgdConfig cfg;
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = SgdConfig{};
    cfg.regularizer_features = 3;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = SgdConfig{};
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}
