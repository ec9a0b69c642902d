#pragma once

#include <vector>

#include <Eigen/Core>

#include "sgdgp/dataset.hpp"
#include "sgdgp/fourier.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

inline constexpr Eigen::Index default_cache_entries = 25'000'000;

/// Quadratic representer-weight objective over anchors A (training inputs or
/// inducing points) with one column per independent problem:
///
///   L(W) = sum_c  ||T_c - K_xA W_c||^2 / noise  +  (W_c - D_c)^T K_AA (W_c - D_c)
///
/// The mean objective has T = y and D = 0. The standard sampling objective has
/// T = f(x) + eps and D = 0. The shifted sampling objective has T = f(x) and a
/// shift D with K_AA D = K_Ax eps / noise, which leaves the minimiser unchanged.
class RepresenterObjective {
public:
    /// `kernel_shift` must equal K_AA * shift. It is kept separately so that the exact
    /// regulariser never has to round-trip through an inverse of K_AA.
    RepresenterObjective(KernelSpec spec, Eigen::MatrixXd inputs, Eigen::MatrixXd anchors, Eigen::MatrixXd targets,
                         Eigen::MatrixXd shift, Eigen::MatrixXd kernel_shift,
                         Eigen::Index cache_entries = default_cache_entries);

    const KernelSpec& spec() const { return spec_; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::MatrixXd& anchors() const { return anchors_; }
    const Eigen::MatrixXd& targets() const { return targets_; }
    const Eigen::MatrixXd& shift() const { return shift_; }
    const Eigen::MatrixXd& kernel_shift() const { return kernel_shift_; }
    Eigen::Index num_data() const { return inputs_.rows(); }
    Eigen::Index num_anchors() const { return anchors_.rows(); }
    Eigen::Index num_columns() const { return targets_.cols(); }

    /// K(inputs[rows], anchors).
    Eigen::MatrixXd cross_rows(const std::vector<Eigen::Index>& rows) const;
    Eigen::MatrixXd cross() const;
    Eigen::MatrixXd anchor_gram() const;

    // Gradient routines accept a block of w.cols() consecutive columns starting at
    // `first_column`, so slot blocks can be optimised independently.

    double value(const Eigen::MatrixXd& w) const;
    /// Exact gradient, 2 [K_Ax (K_xA W - T)/noise + K_AA (W - D)].
    Eigen::MatrixXd dense_gradient(const Eigen::MatrixXd& w, Eigen::Index first_column = 0) const;

    /// Minibatch estimate of the data-fit gradient -2 (N/B) K_A,b (T_b - K_b,A W)/noise
    /// using one shared batch for all columns (indices may repeat).
    Eigen::MatrixXd data_gradient(const Eigen::MatrixXd& w, const std::vector<Eigen::Index>& batch,
                                  Eigen::Index first_column = 0) const;
    /// Exact regulariser gradient 2 K_AA (W - D).
    Eigen::MatrixXd exact_regularizer_gradient(const Eigen::MatrixXd& w, Eigen::Index first_column = 0) const;
    /// Feature estimate 2 Phi(A) Phi(A)^T (W - D).
    Eigen::MatrixXd feature_regularizer_gradient(const Eigen::MatrixXd& w, const FourierFeatureMap& features,
                                                 Eigen::Index first_column = 0) const;
    /// Data gradient plus the feature regulariser, or the exact one when `features` is null.
    Eigen::MatrixXd stochastic_gradient(const Eigen::MatrixXd& w, const std::vector<Eigen::Index>& batch,
                                        const FourierFeatureMap* features, Eigen::Index first_column = 0) const;

    /// Closed-form minimiser (K_Ax K_xA / noise + K_AA)^{-1} (K_Ax T / noise + K_AA D).
    /// Uses (K + noise I)^{-1} (T + noise D) when the anchors are the inputs.
    Eigen::MatrixXd stationary_point() const;

    /// Largest eigenvalue of the Hessian / 2, i.e. of K_Ax K_xA / noise + K_AA, by power iteration.
    double curvature(int iterations = 100) const;

private:
    void check_block(const Eigen::MatrixXd& w, Eigen::Index first_column) const;

    KernelSpec spec_;
    Eigen::MatrixXd inputs_, anchors_, targets_, shift_, kernel_shift_;
    bool anchors_are_inputs_ = false;
    Eigen::MatrixXd cross_cache_;   // N x M, empty when too large
    Eigen::MatrixXd anchor_cache_;  // M x M, empty when too large
};

enum class SampleForm { standard, shifted };

/// Mean objective: anchors = inputs, targets y.
RepresenterObjective mean_objective(const KernelSpec& spec, const Dataset& data,
                                    Eigen::Index cache_entries = default_cache_entries);

/// Sampling objective for S slots: `prior_values` holds f_s(x) (N x S) and `noise`
/// holds eps_s ~ N(0, noise I) (N x S).
RepresenterObjective sample_objective(const KernelSpec& spec, const Dataset& data,
                                      const Eigen::MatrixXd& prior_values, const Eigen::MatrixXd& noise,
                                      SampleForm form, Eigen::Index cache_entries = default_cache_entries);

RepresenterObjective inducing_mean_objective(const KernelSpec& spec, const Dataset& data,
                                             const Eigen::MatrixXd& inducing,
                                             Eigen::Index cache_entries = default_cache_entries);

/// Inducing sampling objective with the full prior draw f(x) standing in for its
/// Nystrom projection. The shifted form solves K_zz D = K_zx eps / noise once (one
/// jittered Cholesky shared by all slots) for the feature regulariser.
RepresenterObjective inducing_sample_objective(const KernelSpec& spec, const Dataset& data,
                                               const Eigen::MatrixXd& inducing, const Eigen::MatrixXd& prior_values,
                                               const Eigen::MatrixXd& noise, SampleForm form,
                                               Eigen::Index cache_entries = default_cache_entries);

/// Uniform-with-replacement minibatch of `size` indices in [0, n).
std::vector<Eigen::Index> draw_batch(Eigen::Index n, Eigen::Index size, Rng& rng);

}  // namespace sgdgp
