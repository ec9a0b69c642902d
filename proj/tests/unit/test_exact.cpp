#include <doctest.h>

#include <Eigen/LU>

#include "helpers.hpp"
#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/fourier.hpp"
#include "sgdgp/hyperparameters.hpp"
#include "sgdgp/synthetic.hpp"

using namespace sgdgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("single observation posterior by hand") {
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 1.0, 1.0, 1.0);
    const Dataset d(MatrixXd::Zero(1, 1), VectorXd::Ones(1));
    const PredictiveMoments m = posterior_moments(fit_exact(spec, d), MatrixXd::Zero(1, 1));
    CHECK(m.mean[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.variance[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("huge noise reverts to the prior mean") {
    const Dataset d = test::random_problem(20, 1, 21);
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 0.5, 1.0, 1e12);
    const ExactPosterior post = fit_exact(spec, d);
    CHECK(post.mean(MatrixXd(VectorXd::LinSpaced(50, -3, 3))).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("exact weights agree with an independent LU solve") {
    const Dataset d = test::random_problem(64, 2, 22);
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::matern32, 2, 0.7, 1.2, 0.05);
    const ExactPosterior post = fit_exact(spec, d);
    const MatrixXd k = gram(spec, d.inputs());
    const MatrixXd a = k + spec.noise_variance * MatrixXd::Identity(64, 64);
    const VectorXd v = Eigen::FullPivLU<MatrixXd>(a).solve(d.targets());
    CHECK((k * post.weights() - k * v).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a * post.weights() - d.targets()).norm() <= 1e-8 * d.targets().norm());
    const MatrixXd l = post.cholesky_lower();
    CHECK(l.diagonal().minCoeff() > 0.0);
    CHECK(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("far queries revert to the prior and variance stays non-negative") {
    const Dataset d = test::random_problem(40, 2, 23);
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 2, 0.5, 1.7, 0.1);
    const ExactPosterior post = fit_exact(spec, d);
    const PredictiveMoments far = posterior_moments(post, MatrixXd::Constant(1, 2, 100.0));
    CHECK(std::abs(far.mean[0]) < 1e-6);
    CHECK(far.variance[0] == doctest::Approx(1.7).epsilon(1e-6));
    Rng rng = make_rng(24);
    const PredictiveMoments m = posterior_moments(post, test::uniform_matrix(1000, 2, -4, 4, rng));
    CHECK(m.variance.minCoeff() >= 0.0);
}

TEST_CASE("tiny noise interpolates the targets") {
    const Dataset d = test::random_problem(10, 1, 25);
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 0.3, 1.0, 1e-8);
    const VectorXd mu = fit_exact(spec, d).mean(d.inputs());
    CHECK((mu - d.targets()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("exact oracle refuses oversized problems") {
    const Dataset d = test::random_problem(30, 1, 26);
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 0.5);
    CHECK_THROWS_AS(fit_exact(spec, d, 20), InputError);
}

TEST_CASE("log marginal likelihood by hand, permutation invariance and scaling") {
    const KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 1.0, 1.0, 1.0);
    const Dataset one(MatrixXd::Zero(1, 1), VectorXd::Ones(1));
    const double expected = -0.25 - 0.5 * std::log(2.0) - 0.5 * std::log(2 * M_PI);
    CHECK(log_marginal_likelihood(spec, one) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(-1.5155).epsilon(1e-4));

    const Dataset d = test::random_problem(30, 2, 27);
    std::vector<Eigen::Index> perm(30);
    for (Eigen::Index i = 0; i < 30; ++i) perm[static_cast<std::size_t>(i)] = (i * 7) % 30;
    const KernelSpec s2 = KernelSpec::isotropic(KernelFamily::matern32, 2, 0.6, 1.0, 0.1);
    CHECK(log_marginal_likelihood(s2, d.subset(perm)) ==
          doctest::Approx(log_marginal_likelihood(s2, d)).epsilon(1e-12));
    const Dataset big(d.inputs(), 100.0 * d.targets());
    CHECK(log_marginal_likelihood(s2, big) < log_marginal_likelihood(s2, d));
}

TEST_CASE("single-centroid fit on the full data equals plain maximization") {
    const Dataset d = test::random_problem(80, 1, 28);
    HyperparameterSearch search;
    search.sweeps = 1;
    search.iterations = 12;
    const SearchResult plain = maximize_marginal_likelihood(d, search);
    const HyperparameterFit fit = fit_hyperparameters_centroids(d, 1, 80, search);
    CHECK(fit.spec.lengthscales[0] == doctest::Approx(plain.spec.lengthscales[0]).epsilon(1e-10));
    CHECK(fit.spec.signal_variance == doctest::Approx(plain.spec.signal_variance).epsilon(1e-10));
    CHECK(fit.spec.noise_variance == doctest::Approx(plain.spec.noise_variance).epsilon(1e-10));
}

TEST_CASE("centroid fit recovers a known lengthscale and is deterministic") {
    GeneratorConfig gen;
    gen.kind = GeneratorKind::gp_prior;
    gen.n = 2000;
    gen.dim = 1;
    gen.low = 0.0;
    gen.high = 20.0;
    gen.noise_variance = 0.1;
    gen.prior_kernel = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 0.5, 1.0, 0.1);
    gen.seed = 29;
    const Dataset d = generate(gen);
    HyperparameterSearch search;
    search.seed = 30;
    const HyperparameterFit fit = fit_hyperparameters_centroids(d, 5, 500, search);
    CHECK(fit.spec.lengthscales[0] > 0.5 / 1.5);
    CHECK(fit.spec.lengthscales[0] < 0.5 * 1.5);
    const HyperparameterFit a = fit_hyperparameters_centroids(d, 2, 100, search);
    const HyperparameterFit b = fit_hyperparameters_centroids(d, 2, 100, search);
    CHECK(a.spec.lengthscales == b.spec.lengthscales);
    CHECK(a.spec.noise_variance == b.spec.noise_variance);
    CHECK(a.centroids[1].subset == b.centroids[1].subset);
}
