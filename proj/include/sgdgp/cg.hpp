#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "sgdgp/dataset.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

struct CgConfig {
    long max_iters = 1000;
    double tolerance = 0.01;            // relative residual ||A v - b|| / ||b||
    Eigen::Index preconditioner_rank = 0;

    void validate() const;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using IterateCallback = std::function<void(long iteration, const Eigen::VectorXd& v)>;

struct CgResult {
    Eigen::VectorXd solution;
    long iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // entry k: relative residual after k iterations
};

/// Preconditioned conjugate gradients from v = 0. `precond` applies an approximation of
/// A^{-1}; pass an empty function for none. Throws NumericalError when an iterate or
/// curvature turns non-finite or non-positive.
CgResult cg_solve(const LinearOperator& matvec, const Eigen::VectorXd& b, const CgConfig& config,
                  const LinearOperator& precond = {}, const IterateCallback& on_iterate = {});

/// Greedy pivoted partial Cholesky of a PSD matrix given by its diagonal and column
/// accessor. Stops early once the residual trace is zero.
struct PivotedCholesky {
    Eigen::MatrixXd factor;            // N x r
    std::vector<Eigen::Index> pivots;
    std::vector<double> residual_trace;  // trace(K - L_k L_k^T) for k = 0..r
};
using ColumnAccessor = std::function<Eigen::VectorXd(Eigen::Index column)>;
PivotedCholesky pivoted_cholesky(const Eigen::VectorXd& diagonal, const ColumnAccessor& column, Eigen::Index rank);
PivotedCholesky pivoted_cholesky(const Eigen::MatrixXd& matrix, Eigen::Index rank);

/// Applies (L L^T + noise I)^{-1} through the Woodbury identity.
class WoodburyPreconditioner {
public:
    WoodburyPreconditioner(Eigen::MatrixXd factor, double noise);
    Eigen::VectorXd apply(const Eigen::VectorXd& b) const;

private:
    Eigen::MatrixXd factor_;
    double noise_;
    Eigen::MatrixXd inner_inverse_;  // (noise I + L^T L)^{-1}
};

struct CgMeanResult {
    Eigen::VectorXd weights;
    CgResult solve;
};

/// Solves (K_xx + noise I) v = y with a dense kernel matrix.
CgMeanResult cg_posterior_mean(const KernelSpec& spec, const Dataset& data, const CgConfig& config,
                               const IterateCallback& on_iterate = {});

}  // namespace sgdgp
