#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sgdgp/dataset.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/fourier.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

/// Posterior function samples in pathwise form. Sample s evaluates as
///   f_s(x) + K_{x A} (v - alpha_s)
/// with f_s a prior draw, A the anchors, v the mean weights and alpha_s the sample weights.
class PosteriorEnsemble {
public:
    PosteriorEnsemble(KernelSpec spec, Eigen::MatrixXd anchors, Eigen::VectorXd mean_weights,
                      Eigen::MatrixXd sample_weights, std::vector<PriorFunctionDraw> priors);

    const KernelSpec& spec() const { return spec_; }
    const Eigen::MatrixXd& anchors() const { return anchors_; }
    const Eigen::VectorXd& mean_weights() const { return mean_weights_; }
    const Eigen::MatrixXd& sample_weights() const { return sample_weights_; }
    const std::vector<PriorFunctionDraw>& priors() const { return priors_; }
    Eigen::Index num_samples() const { return sample_weights_.cols(); }

    Eigen::VectorXd mean(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const;
    /// Q x S matrix of sample values.
    Eigen::MatrixXd samples(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const;
    /// Q x S matrix of prior-draw values.
    Eigen::MatrixXd prior_values(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const;

    double sample_value(Eigen::Index s, const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd sample_gradient(Eigen::Index s, const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    KernelSpec spec_;
    Eigen::MatrixXd anchors_;
    Eigen::VectorXd mean_weights_;
    Eigen::MatrixXd sample_weights_;
    std::vector<PriorFunctionDraw> priors_;
};

/// Checks shapes (weights x anchors, one prior per sample) and builds the ensemble.
PosteriorEnsemble assemble(const KernelSpec& spec, const Eigen::MatrixXd& anchors,
                           const Eigen::VectorXd& mean_weights, const Eigen::MatrixXd& sample_weights,
                           std::vector<PriorFunctionDraw> priors);

/// Per-slot randomness for S posterior samples: each slot gets its own feature map,
/// prior weights and observation noise eps ~ N(0, noise I) at the training inputs.
struct SampleSlots {
    std::vector<PriorFunctionDraw> priors;
    Eigen::MatrixXd prior_values;  // N x S, f_s(x)
    Eigen::MatrixXd noise;         // N x S, eps_s
};
SampleSlots draw_sample_slots(const KernelSpec& spec, const Eigen::MatrixXd& inputs, Eigen::Index num_samples,
                              Eigen::Index num_features, std::uint64_t seed);

/// Mean from the mean weights, variance as the unbiased sample variance over slots.
PredictiveMoments predictive_moments(const PosteriorEnsemble& ens, const Eigen::Ref<const Eigen::MatrixXd>& xstar);

struct Metrics {
    double rmse = 0.0;
    double mean_nll = 0.0;
};

/// NLL of y under N(mean, variance + noise), averaged over points.
Metrics gaussian_metrics(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance, const Eigen::VectorXd& y,
                         double noise_variance);
Metrics metrics(const PosteriorEnsemble& ens, const Dataset& test);

/// 2-Wasserstein distance between N(mu1, sd1^2) and N(mu2, sd2^2).
double w2_gaussian(double mu1, double sd1, double mu2, double sd2);

}  // namespace sgdgp
