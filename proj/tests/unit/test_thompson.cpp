#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "sgdgp/error.hpp"
#include "sgdgp/thompson.hpp"

using namespace sgdgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ThompsonConfig small_config() {
    ThompsonConfig cfg;
    cfg.dim = 2;
    cfg.lengthscale = 0.3;
    cfg.initial_points = 60;
    cfg.batch_size = 4;
    cfg.steps = 3;
    cfg.candidates_per_round = 200;
    cfg.rounds = 3;
    cfg.top_k = 2;
    cfg.ascent_steps = 10;
    cfg.target_features = 500;
    cfg.sample_features = 300;
    cfg.seed = 130;
    return cfg;
}

}  // namespace

TEST_CASE("target draws are deterministic with the prior variance") {
    const ThompsonConfig cfg = small_config();
    const PriorFunctionDraw g = draw_target(cfg);
    const VectorXd x = (VectorXd(2) << 0.3, 0.8).finished();
    CHECK(g.evaluate_point(x) == draw_target(cfg).evaluate_point(x));

    // pooled over 50 independent targets, 200 points each
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::matern32, 2, 0.3, 1.7);
    Rng rng = make_rng(131);
    double sum2 = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const PriorFunctionDraw t = draw_target(2, spec, 2000, 1000 + s);
        sum2 += t.evaluate(test::uniform_matrix(200, 2, 0, 1, rng)).squaredNorm();
    }
    CHECK(sum2 / 1e4 == doctest::Approx(1.7).epsilon(0.2));

    for (int i = 0; i < 20; ++i) {
        const VectorXd p = test::uniform_matrix(2, 1, 0.05, 0.95, rng);
        const VectorXd grad = g.gradient(p);
        for (Eigen::Index c = 0; c < 2; ++c) {
            VectorXd a = p, b = p;
            a[c] += 1e-6;
            b[c] -= 1e-6;
            const double fd = (g.evaluate_point(a) - g.evaluate_point(b)) / 2e-6;
            CHECK(std::abs(grad[c] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("candidate locations stay in the box and follow the exploration mix") {
    ThompsonConfig cfg = small_config();
    MatrixXd corner = MatrixXd::Constant(30, 2, 0.02);
    const Dataset data(corner, VectorXd::LinSpaced(30, 0, 1));
    Rng rng = make_rng(132);
    const MatrixXd near = nearby_locations(data, cfg, 2000, rng);
    CHECK(near.minCoeff() >= 0.0);
    CHECK(near.maxCoeff() <= 1.0);
    CHECK(near.col(0).mean() < 0.2);

    cfg.uniform_fraction = 1.0;
    cfg.exploit_fraction = 0.0;
    const MatrixXd uni = nearby_locations(data, cfg, 4000, rng);
    CHECK(uni.col(0).mean() == doctest::Approx(0.5).epsilon(0.05));
    CHECK(uni.col(1).mean() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("proposed candidates beat the median candidate") {
    const ThompsonConfig cfg = small_config();
    const PriorFunctionDraw g = draw_target(cfg);
    Rng data_rng = make_rng(133);
    const MatrixXd x = test::uniform_matrix(40, 2, 0, 1, data_rng);
    const Dataset data(x, g.evaluate(x));
    const BatchField field = [&](const MatrixXd& q) { return g.evaluate(q); };

    Rng a = make_rng(134), b = make_rng(134);
    const MatrixXd top = propose_candidates(data, field, cfg, a);
    REQUIRE(top.rows() == cfg.top_k);
    CHECK(top.minCoeff() >= 0.0);
    CHECK(top.maxCoeff() <= 1.0);
    VectorXd first_round = g.evaluate(nearby_locations(data, cfg, cfg.candidates_per_round, b));
    std::sort(first_round.data(), first_round.data() + first_round.size());
    CHECK(g.evaluate(top.topRows(1))[0] >= first_round[first_round.size() / 2]);
}

TEST_CASE("adaptive-moment ascent finds the maximum of a quadratic") {
    Acquisition quad{[](const VectorXd& x) { return -(x.array() - 0.5).square().sum(); },
                     [](const VectorXd& x) -> VectorXd { return -2.0 * (x.array() - 0.5).matrix(); }};
    Rng rng = make_rng(135);
    const MatrixXd starts = test::uniform_matrix(4, 3, 0, 1, rng);
    const AcquisitionMaximum m = maximize_acquisition(quad, starts, 3000, 1e-3);
    CHECK((m.location.array() - 0.5).abs().maxCoeff() < 1e-3);

    double best_start = -1e300;
    for (Eigen::Index s = 0; s < starts.rows(); ++s) best_start = std::max(best_start, quad.value(starts.row(s).transpose()));
    const AcquisitionMaximum few = maximize_acquisition(quad, starts, 3, 1e-3);
    CHECK(few.value >= best_start);
    CHECK_THROWS_AS(maximize_acquisition(quad, MatrixXd(0, 3), 3, 1e-3), InputError);
}

TEST_CASE("thompson loop accounting and monotone trace") {
    for (auto backend : {ThompsonBackend::exact, ThompsonBackend::sgd, ThompsonBackend::cg}) {
        ThompsonConfig cfg = small_config();
        cfg.backend = backend;
        cfg.sgd_mean.steps = 200;
        cfg.sgd_mean.batch_size = 32;
        cfg.sgd_samples = cfg.sgd_mean;
        const ThompsonTrace t = thompson_loop(cfg);
        REQUIRE(t.steps.size() == static_cast<std::size_t>(cfg.steps + 1));
        CHECK(t.steps.back().evaluations == cfg.initial_points + cfg.batch_size * cfg.steps);
        for (std::size_t i = 1; i < t.steps.size(); ++i) CHECK(t.steps[i].max_value >= t.steps[i - 1].max_value);
        CHECK(t.best_location.minCoeff() >= 0.0);
        CHECK(t.best_location.maxCoeff() <= 1.0);
    }
    const ThompsonConfig cfg = small_config();
    const ThompsonTrace r = random_search(cfg);
    CHECK(r.steps.back().evaluations == cfg.initial_points + cfg.batch_size * cfg.steps);
    CHECK(r.steps.front().max_value == thompson_loop(cfg).steps.front().max_value);
}

TEST_CASE("thompson config validation") {
    ThompsonConfig cfg = small_config();
    cfg.uniform_fraction = 0.5;
    cfg.exploit_fraction = 0.2;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = small_config();
    cfg.top_k = cfg.rounds + 1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = small_config();
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}
