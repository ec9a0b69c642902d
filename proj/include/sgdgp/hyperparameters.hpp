#pragma once

#include <cstdint>
#include <vector>

#include "sgdgp/dataset.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

/// Coordinate-wise golden-section maximisation of the log marginal likelihood over
/// log(lengthscale_j), log(signal variance) and log(noise variance), each inside a box.
struct HyperparameterSearch {
    KernelFamily family = KernelFamily::squared_exponential;
    double lengthscale_min = 1e-2, lengthscale_max = 1e2;
    double signal_min = 1e-2, signal_max = 1e2;
    double noise_min = 1e-6, noise_max = 1e1;
    int sweeps = 2;
    int grid = 9;         // log-spaced scan points per coordinate before refinement; < 2 skips the scan
    int iterations = 20;  // golden-section shrink steps per coordinate
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct SearchResult {
    KernelSpec spec;
    double log_marginal_likelihood = 0.0;
    long evaluations = 0;
};

struct CentroidFit {
    Eigen::Index centroid = 0;
    std::vector<Eigen::Index> subset;
    SearchResult optimum;
};

struct HyperparameterFit {
    KernelSpec spec;  // log-space average of the per-centroid optima
    std::vector<CentroidFit> centroids;
};

/// Starts from the geometric centre of the box. Throws NumericalError when no
/// evaluated point had a finite marginal likelihood.
SearchResult maximize_marginal_likelihood(const Dataset& data, const HyperparameterSearch& search);

/// Picks `num_centroids` distinct rows uniformly at random, fits each one's
/// `subset_size` nearest neighbours (itself included) and averages the optima.
HyperparameterFit fit_hyperparameters_centroids(const Dataset& data, Eigen::Index num_centroids,
                                                Eigen::Index subset_size, const HyperparameterSearch& search);

}  // namespace sgdgp
