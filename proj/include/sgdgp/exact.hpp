#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "sgdgp/dataset.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

inline constexpr Eigen::Index default_exact_cap = 4096;

/// Lower Cholesky factor of a symmetric matrix. On failure retries once with
/// `jitter` added to the diagonal; throws CholeskyError with the smallest pivot if
/// that also fails.
struct CholeskyFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    bool jitter_applied = false;
    double jitter = 0.0;
};
CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& a, double jitter);

struct PredictiveMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Dense GP posterior: factor of K_xx + noise I and weights v* = (K_xx + noise I)^{-1} y.
class ExactPosterior {
public:
    ExactPosterior(KernelSpec spec, Eigen::MatrixXd inputs, const Eigen::VectorXd& targets, CholeskyFactor factor);

    const KernelSpec& spec() const { return spec_; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return factor_.llt; }
    Eigen::MatrixXd cholesky_lower() const { return factor_.llt.matrixL(); }
    bool jitter_applied() const { return factor_.jitter_applied; }
    double jitter() const { return factor_.jitter; }

    /// (K_xx + noise I)^{-1} b for any number of right-hand sides.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return factor_.llt.solve(b); }

    Eigen::VectorXd mean(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const;
    /// Full posterior covariance between query rows (noise-free function values).
    Eigen::MatrixXd covariance(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const;

private:
    KernelSpec spec_;
    Eigen::MatrixXd inputs_;
    CholeskyFactor factor_;
    Eigen::VectorXd weights_;
};

/// Throws InputError when N exceeds `cap`, CholeskyError when K + noise I is not PD.
ExactPosterior fit_exact(const KernelSpec& spec, const Dataset& data, Eigen::Index cap = default_exact_cap);

/// Mean and clamped-non-negative marginal variance of the latent function.
PredictiveMoments posterior_moments(const ExactPosterior& post, const Eigen::Ref<const Eigen::MatrixXd>& xstar);

double log_marginal_likelihood(const KernelSpec& spec, const Dataset& data, Eigen::Index cap = default_exact_cap);

}  // namespace sgdgp
