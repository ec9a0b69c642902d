#include "sgdgp/synthetic.hpp"

#include <cmath>

#include "sgdgp/error.hpp"
#include "sgdgp/fourier.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

double toy_function(double x) { return std::sin(2.0 * x) + std::cos(5.0 * x); }

std::string to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::uniform: return "uniform";
        case GeneratorKind::infill: return "infill";
        case GeneratorKind::grid: return "grid";
        case GeneratorKind::gp_prior: return "gp_prior";
    }
    return "uniform";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
    if (name == "uniform" || name == "toy") return GeneratorKind::uniform;
    if (name == "infill") return GeneratorKind::infill;
    if (name == "grid") return GeneratorKind::grid;
    if (name == "gp_prior") return GeneratorKind::gp_prior;
    throw InputError("unknown generator '" + name + "'");
}

void GeneratorConfig::validate() const {
    if (n < 1) throw InputError("generator: n must be >= 1");
    if (dim < 1) throw InputError("generator: dim must be >= 1");
    if (!(high > low)) throw InputError("generator: high must exceed low");
    if (!(spacing > 0.0)) throw InputError("generator: spacing must be positive");
    if (!(noise_variance >= 0.0)) throw InputError("generator: noise_variance must be >= 0");
    if (kind == GeneratorKind::gp_prior) {
        prior_kernel.validate();
        if (prior_kernel.dim() != dim) throw InputError("generator: prior kernel dimension must equal dim");
    } else if (dim != 1) {
        throw InputError("generator: toy generators are one-dimensional");
    }
}

Dataset generate(const GeneratorConfig& config) {
    config.validate();
    Rng rng = make_rng(config.seed, 11);
    std::uniform_real_distribution<double> uniform(config.low, config.high);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(config.n, config.dim);
    switch (config.kind) {
        case GeneratorKind::uniform:
        case GeneratorKind::gp_prior:
            for (Eigen::Index i = 0; i < config.n; ++i)
                for (Eigen::Index c = 0; c < config.dim; ++c) x(i, c) = uniform(rng);
            break;
        case GeneratorKind::infill:
            for (Eigen::Index i = 0; i < config.n; ++i) x(i, 0) = normal(rng);
            break;
        case GeneratorKind::grid:
            for (Eigen::Index i = 0; i < config.n; ++i)
                x(i, 0) = config.spacing * (static_cast<double>(i) - 0.5 * static_cast<double>(config.n - 1));
            break;
    }
    Eigen::VectorXd f(config.n);
    if (config.kind == GeneratorKind::gp_prior) {
        f = sample_prior_function(config.prior_kernel, config.prior_features, derive_seed(config.seed, 12)).evaluate(x);
    } else {
        for (Eigen::Index i = 0; i < config.n; ++i) f[i] = toy_function(x(i, 0));
    }
    const double sd = std::sqrt(config.noise_variance);
    for (Eigen::Index i = 0; i < config.n; ++i) f[i] += sd * normal(rng);
    std::vector<std::string> names;
    for (Eigen::Index c = 0; c < config.dim; ++c) names.push_back("x" + std::to_string(c));
    return Dataset(std::move(x), std::move(f), std::move(names));
}

}  // namespace sgdgp
