#include "sgdgp/hyperparameters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/parallel.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

namespace {

// Layout of the log-parameter vector: lengthscales, then signal, then noise.
KernelSpec spec_from_log(KernelFamily family, const Eigen::VectorXd& p) {
    const Eigen::Index d = p.size() - 2;
    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = p.head(d).array().exp();
    spec.signal_variance = std::exp(p[d]);
    spec.noise_variance = std::exp(p[d + 1]);
    return spec;
}

double safe_lml(const KernelSpec& spec, const Dataset& data) {
    try {
        const double v = log_marginal_likelihood(spec, data, std::numeric_limits<Eigen::Index>::max());
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

}  // namespace

SearchResult maximize_marginal_likelihood(const Dataset& data, const HyperparameterSearch& search) {
    if (data.size() < 1) throw InputError("hyperparameter search: empty dataset");
    if (search.sweeps < 1 || search.iterations < 1) throw InputError("hyperparameter search: sweeps and iterations must be positive");
    if (search.grid < 0) throw InputError("hyperparameter search: grid must be >= 0");
    const Eigen::Index d = data.dim();
    Eigen::VectorXd lo(d + 2), hi(d + 2);
    lo.head(d).setConstant(std::log(search.lengthscale_min));
    hi.head(d).setConstant(std::log(search.lengthscale_max));
    lo[d] = std::log(search.signal_min);
    hi[d] = std::log(search.signal_max);
    lo[d + 1] = std::log(search.noise_min);
    hi[d + 1] = std::log(search.noise_max);
    if (!((hi.array() > lo.array()).all())) throw InputError("hyperparameter search: empty search box");

    SearchResult res;
    Eigen::VectorXd p = 0.5 * (lo + hi);
    auto eval = [&](const Eigen::VectorXd& q) {
        ++res.evaluations;
        return safe_lml(spec_from_log(search.family, q), data);
    };
    double best = eval(p);

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < search.sweeps; ++sweep) {
        for (Eigen::Index c = 0; c < d + 2; ++c) {
            Eigen::VectorXd q = p;
            // Coarse scan first: the likelihood is often multimodal along a coordinate.
            double a = lo[c], b = hi[c];
            if (search.grid >= 2) {
                const double h = (hi[c] - lo[c]) / (search.grid - 1);
                int best_k = 0;
                double best_f = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < search.grid; ++k) {
                    q[c] = lo[c] + k * h;
                    const double f = eval(q);
                    if (f > best_f) {
                        best_f = f;
                        best_k = k;
                    }
                    if (f > best) {
                        best = f;
                        p[c] = q[c];
                    }
                }
                a = lo[c] + std::max(best_k - 1, 0) * h;
                b = lo[c] + std::min(best_k + 1, search.grid - 1) * h;
            }
            double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
            q[c] = x1;
            double f1 = eval(q);
            q[c] = x2;
            double f2 = eval(q);
            for (int it = 0; it < search.iterations; ++it) {
                if (f1 >= f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    q[c] = x1;
                    f1 = eval(q);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    q[c] = x2;
                    f2 = eval(q);
                }
            }
            const double xc = f1 >= f2 ? x1 : x2;
            const double fc = std::max(f1, f2);
            if (fc > best) {
                best = fc;
                p[c] = xc;
            }
        }
    }
    if (!std::isfinite(best))
        throw NumericalError("hyperparameter search: no finite marginal likelihood anywhere in the search box");
    res.spec = spec_from_log(search.family, p);
    res.log_marginal_likelihood = best;
    return res;
}

HyperparameterFit fit_hyperparameters_centroids(const Dataset& data, Eigen::Index num_centroids,
                                                Eigen::Index subset_size, const HyperparameterSearch& search) {
    const Eigen::Index n = data.size();
    if (n == 0) throw InputError("centroid fit: empty dataset");
    if (subset_size < 1 || subset_size > n)
        throw InputError("centroid fit: subset_size " + std::to_string(subset_size) + " must lie in [1, " +
                         std::to_string(n) + "]");
    if (num_centroids < 1 || num_centroids > n) throw InputError("centroid fit: num_centroids must lie in [1, N]");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng = make_rng(search.seed, 17);
    for (Eigen::Index i = 0; i < num_centroids; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    }

    HyperparameterFit fit;
    fit.centroids.resize(static_cast<std::size_t>(num_centroids));
    parallel_for(fit.centroids.size(), search.threads, [&](std::size_t c) {
        CentroidFit& cf = fit.centroids[c];
        cf.centroid = order[c];
        const Eigen::VectorXd dist2 =
            (data.inputs().rowwise() - data.inputs().row(cf.centroid)).rowwise().squaredNorm();
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return dist2[a] < dist2[b]; });
        idx.resize(static_cast<std::size_t>(subset_size));
        std::sort(idx.begin(), idx.end());
        cf.subset = idx;
        cf.optimum = maximize_marginal_likelihood(data.subset(idx), search);
    });

    const Eigen::Index d = data.dim();
    Eigen::VectorXd mean_log = Eigen::VectorXd::Zero(d + 2);
    for (const auto& cf : fit.centroids) {
        mean_log.head(d) += cf.optimum.spec.lengthscales.array().log().matrix();
        mean_log[d] += std::log(cf.optimum.spec.signal_variance);
        mean_log[d + 1] += std::log(cf.optimum.spec.noise_variance);
    }
    mean_log /= static_cast<double>(num_centroids);
    fit.spec = spec_from_log(search.family, mean_log);
    return fit;
}

}  // namespace sgdgp
