#include "sgdgp/spectral.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "sgdgp/error.hpp"

namespace sgdgp {

SpectralDecomposition::SpectralDecomposition(KernelSpec spec, Eigen::MatrixXd inputs, Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors)
    : spec_(std::move(spec)),
      inputs_(std::move(inputs)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)) {}

SpectralDecomposition decompose(const KernelSpec& spec, const Dataset& data, Eigen::Index cap) {
    spec.validate();
    if (data.empty()) throw InputError("decompose: empty dataset");
    if (data.size() > cap)
        throw InputError("decompose: N = " + std::to_string(data.size()) + " exceeds the cap of " + std::to_string(cap));
    const Eigen::MatrixXd k = gram(spec, data.inputs());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
    if (solver.info() != Eigen::Success) throw NumericalError("decompose: symmetric eigensolver failed");
    // Eigen returns ascending order.
    Eigen::VectorXd values = solver.eigenvalues().reverse();
    Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    return SpectralDecomposition(spec, data.inputs(), std::move(values), std::move(vectors));
}

Eigen::VectorXd spectral_basis_eval(const SpectralDecomposition& dec, Eigen::Index i,
                                    const Eigen::Ref<const Eigen::MatrixXd>& xstar) {
    if (i < 0 || i >= dec.size()) throw InputError("spectral basis: direction index out of range");
    const double lambda = dec.eigenvalues()[i];
    if (!(lambda > 1e-12 * dec.eigenvalues()[0]))
        throw InputError("spectral basis: eigenvalue " + std::to_string(i) + " is numerically zero");
    return gram(dec.spec(), xstar, dec.inputs()) * dec.eigenvectors().col(i) / std::sqrt(lambda);
}

ProjectedErrors projected_errors(const SpectralDecomposition& dec, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& v_star) {
    if (v.size() != dec.size() || v_star.size() != dec.size()) throw InputError("projected errors: length mismatch");
    ProjectedErrors out;
    out.coefficient = (dec.eigenvectors().transpose() * (v - v_star)).cwiseAbs();
    out.rkhs = dec.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseProduct(out.coefficient);
    return out;
}

Eigen::VectorXd rkhs_coordinates(const SpectralDecomposition& dec, const Eigen::VectorXd& theta) {
    if (theta.size() != dec.size()) throw InputError("rkhs coordinates: length mismatch");
    return dec.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseProduct(dec.eigenvectors().transpose() * theta);
}

double projection_seminorm_squared(const SpectralDecomposition& dec, const Eigen::VectorXd& theta,
                                   const std::vector<Eigen::Index>& directions) {
    if (theta.size() != dec.size()) throw InputError("seminorm: length mismatch");
    double total = 0.0;
    for (Eigen::Index i : directions) {
        if (i < 0 || i >= dec.size()) throw InputError("seminorm: direction index out of range");
        const double c = dec.eigenvectors().col(i).dot(theta);
        total += dec.eigenvalues()[i] * c * c;
    }
    return total;
}

double max_stable_learning_rate(const SpectralDecomposition& dec, double noise_variance) {
    const double l1 = dec.eigenvalues()[0];
    return noise_variance / (l1 * (l1 + noise_variance));
}

namespace {

void check_rate(const SpectralDecomposition& dec, double eta, double noise_variance) {
    if (!(noise_variance > 0.0)) throw InputError("noise variance must be positive");
    const double limit = max_stable_learning_rate(dec, noise_variance);
    if (!(eta > 0.0 && eta < limit))
        throw InputError("learning rate " + std::to_string(eta) + " violates the stability condition 0 < eta < " +
                         std::to_string(limit));
}

}  // namespace

Eigen::VectorXd proposition_bound(const SpectralDecomposition& dec, long t, double eta, double noise_variance,
                                  double y_norm, double g, double delta) {
    check_rate(dec, eta, noise_variance);
    if (t < 1) throw InputError("bound: t must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("bound: delta must lie in (0, 1)");
    const double n = static_cast<double>(dec.size());
    const double c = y_norm / (eta * noise_variance) + g * std::sqrt(2.0 * eta * noise_variance * std::log(n / delta));
    return c / (dec.eigenvalues().array() * static_cast<double>(t)).sqrt();
}

Eigen::VectorXd coefficient_bound(const SpectralDecomposition& dec, long t, double eta, double noise_variance,
                                  double y_norm, double g, double delta) {
    return proposition_bound(dec, t, eta, noise_variance, y_norm, g, delta).array() / dec.eigenvalues().array().sqrt();
}

Eigen::VectorXd noiseless_gd_error(const SpectralDecomposition& dec, const Eigen::VectorXd& y, double eta,
                                   double noise_variance, long t) {
    check_rate(dec, eta, noise_variance);
    if (t < 0) throw InputError("noiseless error: t must be >= 0");
    if (y.size() != dec.size()) throw InputError("noiseless error: length mismatch");
    const Eigen::ArrayXd lambda = dec.eigenvalues().array();
    const Eigen::ArrayXd beta = eta * lambda * (lambda + noise_variance) / noise_variance;
    const Eigen::ArrayXd uy = (dec.eigenvectors().transpose() * y).array().abs();
    return ((1.0 - beta).pow(static_cast<double>(t)) * uy / (lambda + noise_variance)).matrix();
}

}  // namespace sgdgp
