#include "sgdgp/fourier.hpp"

#include <cmath>
#include <numbers>

#include "sgdgp/error.hpp"

namespace sgdgp {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

FourierFeatureMap::FourierFeatureMap(Eigen::MatrixXd frequencies, double signal_variance, std::uint64_t seed)
    : frequencies_(std::move(frequencies)), signal_variance_(signal_variance), seed_(seed) {
    if (frequencies_.rows() < 1) throw InputError("feature map: need at least one frequency pair");
    if (!(signal_variance_ > 0.0)) throw InputError("feature map: signal variance must be positive");
    scale_ = std::sqrt(2.0 * signal_variance_ / static_cast<double>(num_features()));
}

Eigen::MatrixXd FourierFeatureMap::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    if (x.cols() != dim())
        throw InputError("feature map: input dimension " + std::to_string(x.cols()) + " != " + std::to_string(dim()));
    const Eigen::MatrixXd phase = two_pi * (x * frequencies_.transpose());
    Eigen::MatrixXd out(x.rows(), num_features());
    // Scalar loop so the compiler fuses each cos/sin pair into one sincos call.
    for (Eigen::Index p = 0; p < phase.cols(); ++p)
        for (Eigen::Index i = 0; i < phase.rows(); ++i) {
            const double ph = phase(i, p);
            out(i, 2 * p) = scale_ * std::cos(ph);
            out(i, 2 * p + 1) = scale_ * std::sin(ph);
        }
    return out;
}

Eigen::VectorXd FourierFeatureMap::evaluate_point(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return evaluate(x.transpose()).row(0).transpose();
}

FourierFeatureMap sample_feature_map(const KernelSpec& spec, Eigen::Index num_features, Rng& rng) {
    spec.validate();
    if (num_features < 2 || num_features % 2 != 0)
        throw InputError("feature map: number of features must be even and at least 2, got " +
                         std::to_string(num_features));
    const Eigen::Index pairs = num_features / 2;
    const Eigen::Index d = spec.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd freq(pairs, d);
    for (Eigen::Index p = 0; p < pairs; ++p) {
        for (Eigen::Index c = 0; c < d; ++c) freq(p, c) = normal(rng);
        if (spec.family == KernelFamily::matern32) {
            double chi2 = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double g = normal(rng);
                chi2 += g * g;
            }
            freq.row(p) *= std::sqrt(3.0 / chi2);
        }
    }
    freq = freq.array().rowwise() / (two_pi * spec.lengthscales.transpose().array());
    return FourierFeatureMap(std::move(freq), spec.signal_variance);
}

FourierFeatureMap sample_feature_map(const KernelSpec& spec, Eigen::Index num_features, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    FourierFeatureMap map = sample_feature_map(spec, num_features, rng);
    return FourierFeatureMap(map.frequencies(), map.signal_variance(), seed);
}

PriorFunctionDraw::PriorFunctionDraw(std::shared_ptr<const FourierFeatureMap> map, Eigen::VectorXd theta)
    : map_(std::move(map)), theta_(std::move(theta)) {
    if (!map_) throw InputError("prior draw: missing feature map");
    if (theta_.size() != map_->num_features()) throw InputError("prior draw: weight count != feature count");
}

Eigen::VectorXd PriorFunctionDraw::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    if (x.cols() != map_->dim()) throw InputError("prior draw: input dimension mismatch");
    const Eigen::MatrixXd phase = two_pi * (x * map_->frequencies().transpose());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index p = 0; p < phase.cols(); ++p) {
        const double a = theta_[2 * p], b = theta_[2 * p + 1];
        for (Eigen::Index i = 0; i < phase.rows(); ++i) {
            const double ph = phase(i, p);
            out[i] += a * std::cos(ph) + b * std::sin(ph);
        }
    }
    return map_->scale() * out;
}

double PriorFunctionDraw::evaluate_point(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != map_->dim()) throw InputError("prior draw: input dimension mismatch");
    const Eigen::VectorXd phase = two_pi * (map_->frequencies() * x);
    double out = 0.0;
    for (Eigen::Index p = 0; p < phase.size(); ++p)
        out += theta_[2 * p] * std::cos(phase[p]) + theta_[2 * p + 1] * std::sin(phase[p]);
    return map_->scale() * out;
}

Eigen::VectorXd PriorFunctionDraw::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != map_->dim()) throw InputError("prior draw: input dimension mismatch");
    const Eigen::VectorXd phase = two_pi * (map_->frequencies() * x);
    Eigen::VectorXd coeff(phase.size());
    for (Eigen::Index p = 0; p < phase.size(); ++p)
        coeff[p] = -theta_[2 * p] * std::sin(phase[p]) + theta_[2 * p + 1] * std::cos(phase[p]);
    return (two_pi * map_->scale()) * (map_->frequencies().transpose() * coeff);
}

PriorFunctionDraw sample_prior(std::shared_ptr<const FourierFeatureMap> map, Rng& rng) {
    const Eigen::Index l = map->num_features();
    return PriorFunctionDraw(std::move(map), standard_normal_vector(l, rng));
}

PriorFunctionDraw sample_prior(std::shared_ptr<const FourierFeatureMap> map, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return sample_prior(std::move(map), rng);
}

PriorFunctionDraw sample_prior_function(const KernelSpec& spec, Eigen::Index num_features, std::uint64_t seed) {
    auto map = std::make_shared<const FourierFeatureMap>(sample_feature_map(spec, num_features, derive_seed(seed, 1)));
    return sample_prior(std::move(map), derive_seed(seed, 2));
}

}  // namespace sgdgp
