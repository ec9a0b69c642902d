#pragma once

#include <vector>

#include <Eigen/Core>

#include "sgdgp/dataset.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

/// K_xx = U diag(lambda) U^T with eigenvalues sorted in descending order.
/// Direction indices are zero-based: i = 0 is the top eigenvalue.
class SpectralDecomposition {
public:
    SpectralDecomposition(KernelSpec spec, Eigen::MatrixXd inputs, Eigen::VectorXd eigenvalues,
                          Eigen::MatrixXd eigenvectors);

    const KernelSpec& spec() const { return spec_; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
    Eigen::Index size() const { return eigenvalues_.size(); }

private:
    KernelSpec spec_;
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

SpectralDecomposition decompose(const KernelSpec& spec, const Dataset& data, Eigen::Index cap = 4096);

/// u^(i)(x) = sum_j U_ji k(x_j, x) / sqrt(lambda_i). Throws InputError when
/// lambda_i <= 1e-12 lambda_0.
Eigen::VectorXd spectral_basis_eval(const SpectralDecomposition& dec, Eigen::Index i,
                                    const Eigen::Ref<const Eigen::MatrixXd>& xstar);

struct ProjectedErrors {
    Eigen::VectorXd coefficient;  // |u_i^T (v - v*)|
    Eigen::VectorXd rkhs;         // sqrt(lambda_i) |u_i^T (v - v*)|
};
ProjectedErrors projected_errors(const SpectralDecomposition& dec, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& v_star);

/// Lambda^{1/2} U^T theta; its squared norm is theta^T K theta.
Eigen::VectorXd rkhs_coordinates(const SpectralDecomposition& dec, const Eigen::VectorXd& theta);

/// theta^T U Lambda_I U^T theta for a set of directions I.
double projection_seminorm_squared(const SpectralDecomposition& dec, const Eigen::VectorXd& theta,
                                   const std::vector<Eigen::Index>& directions);

/// Learning rates must satisfy 0 < eta < noise / (lambda_0 (lambda_0 + noise)).
double max_stable_learning_rate(const SpectralDecomposition& dec, double noise_variance);

/// Per-direction RKHS error bound after t averaged steps of noisy gradient descent on
///   L(v) = ||y - K v||^2 / (2 noise) + ||v||_K^2 / 2
/// with G-sub-Gaussian gradient noise, holding jointly with probability 1 - delta:
///   (1 / sqrt(lambda_i t)) (||y|| / (eta noise) + G sqrt(2 eta noise log(N / delta))).
Eigen::VectorXd proposition_bound(const SpectralDecomposition& dec, long t, double eta, double noise_variance,
                                  double y_norm, double g, double delta);

/// The same bound on the coefficient error |u_i^T (v* - v_t)|, i.e. divided by sqrt(lambda_i).
Eigen::VectorXd coefficient_bound(const SpectralDecomposition& dec, long t, double eta, double noise_variance,
                                  double y_norm, double g, double delta);

/// Exact coefficient error of plain gradient descent from zero on the loss above:
/// (1 - beta_i)^t |u_i^T y| / (lambda_i + noise), beta_i = eta lambda_i (lambda_i + noise) / noise.
Eigen::VectorXd noiseless_gd_error(const SpectralDecomposition& dec, const Eigen::VectorXd& y, double eta,
                                   double noise_variance, long t);

}  // namespace sgdgp
