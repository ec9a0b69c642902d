#include "sgdgp/cg.hpp"

#include <cmath>
#include <memory>

#include <Eigen/Cholesky>

#include "sgdgp/error.hpp"

namespace sgdgp {

void CgConfig::validate() const {
    if (max_iters < 1) throw InputError("cg: max_iters must be >= 1");
    if (!(tolerance > 0.0)) throw InputError("cg: tolerance must be positive");
    if (preconditioner_rank < 0) throw InputError("cg: preconditioner_rank must be >= 0");
}

CgResult cg_solve(const LinearOperator& matvec, const Eigen::VectorXd& b, const CgConfig& config,
                  const LinearOperator& precond, const IterateCallback& on_iterate) {
    config.validate();
    CgResult res;
    res.solution = Eigen::VectorXd::Zero(b.size());
    const double bnorm = b.norm();
    if (!std::isfinite(bnorm)) throw NumericalError("cg: right-hand side is not finite");
    if (bnorm == 0.0) {
        res.converged = true;
        res.residual_history.push_back(0.0);
        return res;
    }
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = precond ? precond(r) : r;
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    res.residual_history.push_back(1.0);
    for (long k = 1; k <= config.max_iters; ++k) {
        const Eigen::VectorXd ap = matvec(p);
        const double curv = p.dot(ap);
        if (!std::isfinite(curv) || curv <= 0.0)
            throw NumericalError("cg: non-positive curvature at iteration " + std::to_string(k) +
                                 "; the operator is not positive definite");
        const double step = rz / curv;
        res.solution += step * p;
        r -= step * ap;
        const double rel = r.norm() / bnorm;
        if (!std::isfinite(rel) || !res.solution.allFinite())
            throw NumericalError("cg: non-finite iterate at iteration " + std::to_string(k));
        res.residual_history.push_back(rel);
        res.iterations = k;
        if (on_iterate) on_iterate(k, res.solution);
        if (rel <= config.tolerance) {
            res.converged = true;
            break;
        }
        z = precond ? precond(r) : r;
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    return res;
}

PivotedCholesky pivoted_cholesky(const Eigen::VectorXd& diagonal, const ColumnAccessor& column, Eigen::Index rank) {
    const Eigen::Index n = diagonal.size();
    if (rank < 0) throw InputError("pivoted Cholesky: rank must be >= 0");
    rank = std::min(rank, n);
    PivotedCholesky out;
    out.factor = Eigen::MatrixXd::Zero(n, rank);
    Eigen::VectorXd resid = diagonal;
    out.residual_trace.push_back(resid.sum());
    Eigen::Index k = 0;
    for (; k < rank; ++k) {
        Eigen::Index piv = 0;
        const double best = resid.maxCoeff(&piv);
        if (resid.minCoeff() < -1e-10)
            throw NumericalError("pivoted Cholesky: negative residual diagonal " + std::to_string(resid.minCoeff()));
        if (best <= 1e-14 * std::max(1.0, diagonal.maxCoeff())) break;
        const double root = std::sqrt(best);
        Eigen::VectorXd col = column(piv);
        if (k > 0) col -= out.factor.leftCols(k) * out.factor.row(piv).head(k).transpose();
        col /= root;
        col[piv] = root;
        for (Eigen::Index p : out.pivots) col[p] = 0.0;
        out.factor.col(k) = col;
        resid -= col.array().square().matrix();
        resid[piv] = 0.0;
        for (Eigen::Index p : out.pivots) resid[p] = 0.0;
        out.pivots.push_back(piv);
        out.residual_trace.push_back(resid.sum());
    }
    out.factor.conservativeResize(n, k);
    return out;
}

PivotedCholesky pivoted_cholesky(const Eigen::MatrixXd& matrix, Eigen::Index rank) {
    if (matrix.rows() != matrix.cols()) throw InputError("pivoted Cholesky: matrix must be square");
    return pivoted_cholesky(matrix.diagonal(), [&](Eigen::Index j) -> Eigen::VectorXd { return matrix.col(j); }, rank);
}

WoodburyPreconditioner::WoodburyPreconditioner(Eigen::MatrixXd factor, double noise)
    : factor_(std::move(factor)), noise_(noise) {
    if (!(noise_ > 0.0)) throw InputError("Woodbury preconditioner: noise must be positive");
    Eigen::MatrixXd inner = factor_.transpose() * factor_;
    inner.diagonal().array() += noise_;
    inner_inverse_ = inner.llt().solve(Eigen::MatrixXd::Identity(inner.rows(), inner.cols()));
}

Eigen::VectorXd WoodburyPreconditioner::apply(const Eigen::VectorXd& b) const {
    if (factor_.cols() == 0) return b / noise_;
    return (b - factor_ * (inner_inverse_ * (factor_.transpose() * b))) / noise_;
}

CgMeanResult cg_posterior_mean(const KernelSpec& spec, const Dataset& data, const CgConfig& config,
                               const IterateCallback& on_iterate) {
    spec.validate();
    config.validate();
    if (data.empty()) throw InputError("cg: empty dataset");
    const Eigen::MatrixXd k = gram(spec, data.inputs());
    const double noise = spec.noise_variance;
    LinearOperator matvec = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return k * v + noise * v; };
    LinearOperator precond;
    std::unique_ptr<WoodburyPreconditioner> wb;
    if (config.preconditioner_rank > 0) {
        wb = std::make_unique<WoodburyPreconditioner>(pivoted_cholesky(k, config.preconditioner_rank).factor, noise);
        precond = [&](const Eigen::VectorXd& r) { return wb->apply(r); };
    }
    CgMeanResult out;
    out.solve = cg_solve(matvec, data.targets(), config, precond, on_iterate);
    out.weights = out.solve.solution;
    return out;
}

}  // namespace sgdgp
