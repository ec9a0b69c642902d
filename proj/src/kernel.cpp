#include "sgdgp/kernel.hpp"

#include <cmath>

#include "sgdgp/error.hpp"

namespace sgdgp {

namespace {

constexpr double sqrt3 = 1.7320508075688772;

void check_dims(const KernelSpec& spec, Eigen::Index d, const char* where) {
    if (d != spec.dim())
        throw InputError(std::string(where) + ": input dimension " + std::to_string(d) +
                         " does not match kernel dimension " + std::to_string(spec.dim()));
}

// Kernel value from a squared scaled distance; avoids the sqrt for the squared exponential.
inline double profile_from_r2(KernelFamily family, double r2) {
    if (family == KernelFamily::squared_exponential) return std::exp(-0.5 * r2);
    const double s = sqrt3 * std::sqrt(r2);
    return (1.0 + s) * std::exp(-s);
}

}  // namespace

std::string to_string(KernelFamily family) {
    return family == KernelFamily::squared_exponential ? "squared_exponential" : "matern32";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "squared_exponential" || name == "se" || name == "rbf") return KernelFamily::squared_exponential;
    if (name == "matern32" || name == "matern-3/2" || name == "matern_3_2") return KernelFamily::matern32;
    throw InputError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(signal_variance)) throw InputError("kernel: signal_variance must be positive");
    if (!positive(noise_variance)) throw InputError("kernel: noise_variance must be positive");
    if (lengthscales.size() == 0) throw InputError("kernel: at least one lengthscale is required");
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i)
        if (!positive(lengthscales[i])) throw InputError("kernel: lengthscales must be positive");
}

KernelSpec KernelSpec::isotropic(KernelFamily family, Eigen::Index dim, double lengthscale, double signal_variance,
                                 double noise_variance) {
    KernelSpec spec;
    spec.family = family;
    spec.signal_variance = signal_variance;
    spec.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
    spec.noise_variance = noise_variance;
    return spec;
}

double kernel_profile(KernelFamily family, double r) { return profile_from_r2(family, r * r); }

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
    check_dims(spec, x.size(), "kernel_eval");
    check_dims(spec, x2.size(), "kernel_eval");
    const double r2 = ((x - x2).array() / spec.lengthscales.array()).square().sum();
    return spec.signal_variance * profile_from_r2(spec.family, r2);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& x2) {
    check_dims(spec, x.cols(), "gram");
    check_dims(spec, x2.cols(), "gram");
    // Points as columns so each distance reads contiguous memory.
    const Eigen::MatrixXd a = (x.array().rowwise() / spec.lengthscales.transpose().array()).transpose();
    const Eigen::MatrixXd b = (x2.array().rowwise() / spec.lengthscales.transpose().array()).transpose();
    Eigen::MatrixXd k(x.rows(), x2.rows());
    for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = 0; i < k.rows(); ++i)
            k(i, j) = spec.signal_variance * profile_from_r2(spec.family, (a.col(i) - b.col(j)).squaredNorm());
    return k;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    check_dims(spec, x.cols(), "gram");
    const Eigen::Index n = x.rows();
    const Eigen::MatrixXd a = (x.array().rowwise() / spec.lengthscales.transpose().array()).transpose();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        k(j, j) = spec.signal_variance;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double r2 = (a.col(i) - a.col(j)).squaredNorm();
            k(i, j) = k(j, i) = spec.signal_variance * profile_from_r2(spec.family, r2);
        }
    }
    return k;
}

Eigen::MatrixXd kernel_gradient(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& anchors,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
    check_dims(spec, anchors.cols(), "kernel_gradient");
    check_dims(spec, x.size(), "kernel_gradient");
    const Eigen::ArrayXd inv_ls2 = spec.lengthscales.array().square().inverse();
    Eigen::MatrixXd out(anchors.rows(), anchors.cols());
    for (Eigen::Index j = 0; j < anchors.rows(); ++j) {
        const Eigen::ArrayXd diff = x.array() - anchors.row(j).transpose().array();
        const double r2 = (diff.square() * inv_ls2).sum();
        double scale = 0.0;
        if (spec.family == KernelFamily::squared_exponential) {
            scale = -spec.signal_variance * std::exp(-0.5 * r2);
        } else {
            // d/dx of (1 + sqrt3 r) exp(-sqrt3 r) is -3 exp(-sqrt3 r) (x - a) / l^2, smooth at r = 0.
            scale = -3.0 * spec.signal_variance * std::exp(-sqrt3 * std::sqrt(r2));
        }
        out.row(j) = (scale * diff * inv_ls2).transpose();
    }
    return out;
}

}  // namespace sgdgp
