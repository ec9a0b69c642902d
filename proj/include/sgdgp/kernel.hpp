#pragma once

#include <string>

#include <Eigen/Core>

namespace sgdgp {

enum class KernelFamily { squared_exponential, matern32 };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Stationary kernel with per-dimension lengthscales and homoscedastic Gaussian noise.
struct KernelSpec {
    KernelFamily family = KernelFamily::squared_exponential;
    double signal_variance = 1.0;
    Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);
    double noise_variance = 1.0;

    Eigen::Index dim() const { return lengthscales.size(); }

    /// Throws InputError unless every variance and lengthscale is strictly positive and finite.
    void validate() const;

    static KernelSpec isotropic(KernelFamily family, Eigen::Index dim, double lengthscale,
                                double signal_variance = 1.0, double noise_variance = 1.0);
};

/// Kernel as a function of the lengthscale-scaled distance r, without the signal variance.
double kernel_profile(KernelFamily family, double r);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

/// K(X, X2) with rows of X and X2 as points.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& x2);

/// Symmetric K(X, X), computing only one triangle.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Gradient of x -> k(anchor_j, x) for every anchor row j, as an M x d matrix.
Eigen::MatrixXd kernel_gradient(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& anchors,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace sgdgp
