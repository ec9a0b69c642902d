#include "sgdgp/exact.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "sgdgp/error.hpp"

namespace sgdgp {

namespace {

double smallest_ldlt_pivot(const Eigen::MatrixXd& a) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    return ldlt.vectorD().minCoeff();
}

Eigen::MatrixXd noisy_gram(const KernelSpec& spec, const Dataset& data, Eigen::Index cap) {
    spec.validate();
    if (data.empty()) throw InputError("exact GP: empty dataset");
    if (data.size() > cap)
        throw InputError("exact GP: N = " + std::to_string(data.size()) + " exceeds the cap of " +
                         std::to_string(cap));
    Eigen::MatrixXd k = gram(spec, data.inputs());
    k.diagonal().array() += spec.noise_variance;
    return k;
}

}  // namespace

CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& a, double jitter) {
    CholeskyFactor out;
    out.llt.compute(a);
    if (out.llt.info() == Eigen::Success) return out;
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    out.llt.compute(shifted);
    out.jitter_applied = true;
    out.jitter = jitter;
    if (out.llt.info() != Eigen::Success) {
        const double pivot = smallest_ldlt_pivot(shifted);
        throw CholeskyError("Cholesky factorisation failed even with jitter " + std::to_string(jitter) +
                                "; smallest pivot " + std::to_string(pivot),
                            pivot);
    }
    return out;
}

ExactPosterior::ExactPosterior(KernelSpec spec, Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                               CholeskyFactor factor)
    : spec_(std::move(spec)), inputs_(std::move(inputs)), factor_(std::move(factor)) {
    weights_ = factor_.llt.solve(targets);
}

Eigen::VectorXd ExactPosterior::mean(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const {
    return gram(spec_, xstar, inputs_) * weights_;
}

Eigen::MatrixXd ExactPosterior::covariance(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const {
    const Eigen::MatrixXd kxs = gram(spec_, inputs_, xstar);
    const Eigen::MatrixXd half = factor_.llt.matrixL().solve(kxs);
    return gram(spec_, xstar) - half.transpose() * half;
}

ExactPosterior fit_exact(const KernelSpec& spec, const Dataset& data, Eigen::Index cap) {
    Eigen::MatrixXd k = noisy_gram(spec, data, cap);
    CholeskyFactor factor = cholesky_with_jitter(k, 1e-10 * spec.signal_variance);
    return ExactPosterior(spec, data.inputs(), data.targets(), std::move(factor));
}

PredictiveMoments posterior_moments(const ExactPosterior& post, const Eigen::Ref<const Eigen::MatrixXd>& xstar) {
    if (xstar.cols() != post.inputs().cols()) throw InputError("posterior_moments: query dimension mismatch");
    PredictiveMoments out;
    const Eigen::MatrixXd kxs = gram(post.spec(), post.inputs(), xstar);
    out.mean = kxs.transpose() * post.weights();
    const Eigen::MatrixXd half = post.llt().matrixL().solve(kxs);
    out.variance = (post.spec().signal_variance - half.colwise().squaredNorm().transpose().array()).max(0.0);
    return out;
}

double log_marginal_likelihood(const KernelSpec& spec, const Dataset& data, Eigen::Index cap) {
    Eigen::MatrixXd k = noisy_gram(spec, data, cap);
    CholeskyFactor factor = cholesky_with_jitter(k, 1e-10 * spec.signal_variance);
    const Eigen::VectorXd v = factor.llt.solve(data.targets());
    const Eigen::MatrixXd& l = factor.llt.matrixLLT();
    const double half_logdet = l.diagonal().array().log().sum();
    const double n = static_cast<double>(data.size());
    return -0.5 * data.targets().dot(v) - half_logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace sgdgp
