#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Core>

#include "sgdgp/kernel.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

/// Random Fourier features for a stationary kernel.
///
/// Feature 2p is s cos(2 pi <w_p, x>) and feature 2p+1 is s sin(2 pi <w_p, x>) with
/// s = sqrt(2 signal_variance / L), so <phi(x), phi(x)> = signal_variance exactly and
/// E <phi(x), phi(x')> = k(x, x'). Frequencies are stored in cycles per unit, i.e. the
/// angular spectral sample divided by 2 pi.
class FourierFeatureMap {
public:
    FourierFeatureMap(Eigen::MatrixXd frequencies, double signal_variance, std::uint64_t seed = 0);

    Eigen::Index num_features() const { return 2 * frequencies_.rows(); }
    Eigen::Index dim() const { return frequencies_.cols(); }
    const Eigen::MatrixXd& frequencies() const { return frequencies_; }
    double signal_variance() const { return signal_variance_; }
    double scale() const { return scale_; }
    std::uint64_t seed() const { return seed_; }

    /// N x L feature matrix, row i = phi(x_i).
    Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    Eigen::VectorXd evaluate_point(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    Eigen::MatrixXd frequencies_;  // (L/2) x d
    double signal_variance_;
    double scale_;
    std::uint64_t seed_;
};

/// Draws L/2 frequency vectors from the kernel's normalised spectral measure.
/// Gaussian with precision diag(l^2) for the squared exponential; multivariate Student-t
/// with 3 degrees of freedom (one shared chi-square per vector) for Matern-3/2.
FourierFeatureMap sample_feature_map(const KernelSpec& spec, Eigen::Index num_features, std::uint64_t seed);
FourierFeatureMap sample_feature_map(const KernelSpec& spec, Eigen::Index num_features, Rng& rng);

/// f(x) = theta^T phi(x) for a fixed feature map.
class PriorFunctionDraw {
public:
    PriorFunctionDraw(std::shared_ptr<const FourierFeatureMap> map, Eigen::VectorXd theta);

    const FourierFeatureMap& feature_map() const { return *map_; }
    const std::shared_ptr<const FourierFeatureMap>& feature_map_ptr() const { return map_; }
    const Eigen::VectorXd& weights() const { return theta_; }

    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    double evaluate_point(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    std::shared_ptr<const FourierFeatureMap> map_;
    Eigen::VectorXd theta_;
};

/// theta ~ N(0, I).
PriorFunctionDraw sample_prior(std::shared_ptr<const FourierFeatureMap> map, std::uint64_t seed);
PriorFunctionDraw sample_prior(std::shared_ptr<const FourierFeatureMap> map, Rng& rng);

/// Fresh map and weights in one call, both derived from `seed`.
PriorFunctionDraw sample_prior_function(const KernelSpec& spec, Eigen::Index num_features, std::uint64_t seed);

}  // namespace sgdgp
