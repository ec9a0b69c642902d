#include "sgdgp/pathwise.hpp"

#include <cmath>
#include <numbers>

#include "sgdgp/error.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

PosteriorEnsemble::PosteriorEnsemble(KernelSpec spec, Eigen::MatrixXd anchors, Eigen::VectorXd mean_weights,
                                     Eigen::MatrixXd sample_weights, std::vector<PriorFunctionDraw> priors)
    : spec_(std::move(spec)),
      anchors_(std::move(anchors)),
      mean_weights_(std::move(mean_weights)),
      sample_weights_(std::move(sample_weights)),
      priors_(std::move(priors)) {
    if (mean_weights_.size() != anchors_.rows() || sample_weights_.rows() != anchors_.rows())
        throw InputError("ensemble: weight length does not match the anchor count");
    if (sample_weights_.cols() < 1) throw InputError("ensemble: need at least one sample");
    if (static_cast<Eigen::Index>(priors_.size()) != sample_weights_.cols())
        throw InputError("ensemble: one prior draw per sample is required");
    for (const auto& p : priors_)
        if (p.feature_map().dim() != anchors_.cols()) throw InputError("ensemble: prior draw dimension mismatch");
}

Eigen::VectorXd PosteriorEnsemble::mean(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const {
    return gram(spec_, xstar, anchors_) * mean_weights_;
}

Eigen::MatrixXd PosteriorEnsemble::prior_values(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const {
    Eigen::MatrixXd out(xstar.rows(), num_samples());
    for (Eigen::Index s = 0; s < num_samples(); ++s) out.col(s) = priors_[static_cast<std::size_t>(s)].evaluate(xstar);
    return out;
}

Eigen::MatrixXd PosteriorEnsemble::samples(const Eigen::Ref<const Eigen::MatrixXd>& xstar) const {
    const Eigen::MatrixXd k = gram(spec_, xstar, anchors_);
    Eigen::MatrixXd out = prior_values(xstar) - k * sample_weights_;
    out.colwise() += k * mean_weights_;
    return out;
}

double PosteriorEnsemble::sample_value(Eigen::Index s, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::VectorXd k = gram(spec_, x.transpose(), anchors_).row(0).transpose();
    return priors_[static_cast<std::size_t>(s)].evaluate_point(x) + k.dot(mean_weights_ - sample_weights_.col(s));
}

Eigen::VectorXd PosteriorEnsemble::sample_gradient(Eigen::Index s, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::MatrixXd dk = kernel_gradient(spec_, anchors_, x);
    return priors_[static_cast<std::size_t>(s)].gradient(x) +
           dk.transpose() * (mean_weights_ - sample_weights_.col(s));
}

PosteriorEnsemble assemble(const KernelSpec& spec, const Eigen::MatrixXd& anchors,
                           const Eigen::VectorXd& mean_weights, const Eigen::MatrixXd& sample_weights,
                           std::vector<PriorFunctionDraw> priors) {
    spec.validate();
    if (anchors.cols() != spec.dim()) throw InputError("assemble: anchor dimension does not match the kernel");
    return PosteriorEnsemble(spec, anchors, mean_weights, sample_weights, std::move(priors));
}

SampleSlots draw_sample_slots(const KernelSpec& spec, const Eigen::MatrixXd& inputs, Eigen::Index num_samples,
                              Eigen::Index num_features, std::uint64_t seed) {
    if (num_samples < 1) throw InputError("sample slots: need at least one sample");
    SampleSlots out;
    out.priors.reserve(static_cast<std::size_t>(num_samples));
    out.prior_values.resize(inputs.rows(), num_samples);
    out.noise.resize(inputs.rows(), num_samples);
    const double noise_sd = std::sqrt(spec.noise_variance);
    for (Eigen::Index s = 0; s < num_samples; ++s) {
        const std::uint64_t slot_seed = derive_seed(seed, static_cast<std::uint64_t>(s));
        out.priors.push_back(sample_prior_function(spec, num_features, slot_seed));
        out.prior_values.col(s) = out.priors.back().evaluate(inputs);
        Rng rng = make_rng(slot_seed, 3);
        out.noise.col(s) = noise_sd * standard_normal_vector(inputs.rows(), rng);
    }
    return out;
}

PredictiveMoments predictive_moments(const PosteriorEnsemble& ens, const Eigen::Ref<const Eigen::MatrixXd>& xstar) {
    if (ens.num_samples() < 2) throw InputError("predictive variance needs at least two samples");
    PredictiveMoments out;
    out.mean = ens.mean(xstar);
    const Eigen::MatrixXd s = ens.samples(xstar);
    const Eigen::VectorXd avg = s.rowwise().mean();
    out.variance = (s.colwise() - avg).rowwise().squaredNorm() / static_cast<double>(s.cols() - 1);
    return out;
}

Metrics gaussian_metrics(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance, const Eigen::VectorXd& y,
                         double noise_variance) {
    if (mean.size() != y.size() || variance.size() != y.size()) throw InputError("metrics: length mismatch");
    if (y.size() == 0) throw InputError("metrics: empty test set");
    Metrics m;
    const Eigen::ArrayXd err = (y - mean).array();
    const Eigen::ArrayXd var = variance.array() + noise_variance;
    m.rmse = std::sqrt(err.square().mean());
    m.mean_nll = (0.5 * (2.0 * std::numbers::pi * var).log() + err.square() / (2.0 * var)).mean();
    return m;
}

Metrics metrics(const PosteriorEnsemble& ens, const Dataset& test) {
    const PredictiveMoments pm = predictive_moments(ens, test.inputs());
    return gaussian_metrics(pm.mean, pm.variance, test.targets(), ens.spec().noise_variance);
}

double w2_gaussian(double mu1, double sd1, double mu2, double sd2) {
    if (sd1 < 0.0 || sd2 < 0.0) throw InputError("w2: standard deviations must be non-negative");
    return std::hypot(mu1 - mu2, sd1 - sd2);
}

}  // namespace sgdgp
