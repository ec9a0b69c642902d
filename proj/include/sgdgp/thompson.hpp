#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgdgp/cg.hpp"
#include "sgdgp/dataset.hpp"
#include "sgdgp/fourier.hpp"
#include "sgdgp/kernel.hpp"
#include "sgdgp/sgd.hpp"

namespace sgdgp {

enum class ThompsonBackend { exact, sgd, cg, random };
std::string to_string(ThompsonBackend backend);
ThompsonBackend thompson_backend_from_string(const std::string& name);

struct ThompsonConfig {
    Eigen::Index dim = 2;
    KernelFamily family = KernelFamily::matern32;
    double lengthscale = 0.3;
    double signal_variance = 1.0;
    double observation_noise = 1e-6;  // variance of eps added to every target evaluation
    double model_noise = 1e-6;        // noise variance assumed by the surrogate
    Eigen::Index target_features = 2000;
    Eigen::Index sample_features = 1000;

    Eigen::Index initial_points = 500;
    Eigen::Index batch_size = 20;  // acquisitions per step
    int steps = 10;

    double uniform_fraction = 0.1;
    double exploit_fraction = 0.9;
    Eigen::Index candidates_per_round = 1000;
    int rounds = 10;
    Eigen::Index top_k = 5;
    int ascent_steps = 100;
    double ascent_rate = 1e-3;

    ThompsonBackend backend = ThompsonBackend::exact;
    SgdConfig sgd_mean;     // learning rates relative to the reference rate
    SgdConfig sgd_samples;
    CgConfig cg;
    bool warm_start = true;

    std::uint64_t seed = 0;
    std::size_t threads = 1;

    ThompsonConfig();
    void validate() const;
};

/// Fixed random-feature draw on [0,1]^d with analytic gradient.
PriorFunctionDraw draw_target(const ThompsonConfig& config);
PriorFunctionDraw draw_target(Eigen::Index dim, const KernelSpec& spec, Eigen::Index num_features, std::uint64_t seed);

/// Candidate locations for one round: a uniform_fraction share uniform on the box, the
/// rest resampled training inputs (weights = targets minus their minimum) plus
/// N(0, (lengthscale/2)^2) noise, clipped to the box.
Eigen::MatrixXd nearby_locations(const Dataset& data, const ThompsonConfig& config, Eigen::Index count, Rng& rng);

using BatchField = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

/// Best location of each of `rounds` rounds, then the top_k of those by value.
Eigen::MatrixXd propose_candidates(const Dataset& data, const BatchField& sample, const ThompsonConfig& config,
                                   Rng& rng);

struct Acquisition {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct AcquisitionMaximum {
    Eigen::VectorXd location;
    double value = 0.0;
};

/// Adam ascent from every start (rows of `starts`), clipped to [0,1]^d after each step.
/// Returns the best point seen, starts included, so the value never drops below the
/// best starting value.
AcquisitionMaximum maximize_acquisition(const Acquisition& f, const Eigen::MatrixXd& starts, int steps, double rate);

struct ThompsonStep {
    int step = 0;
    double max_value = 0.0;
    double wall_time_s = 0.0;
    long evaluations = 0;            // cumulative target evaluations
    long candidate_evaluations = 0;  // acquisition evaluations in this step
};

struct ThompsonTrace {
    std::vector<ThompsonStep> steps;
    Eigen::VectorXd best_location;

    double final_max() const { return steps.empty() ? 0.0 : steps.back().max_value; }
    void write_csv(const std::filesystem::path& path, bool include_time = true) const;
};

/// Full loop. Sample slots keep their prior draw and noise across steps; new points get
/// zero initial weights when warm starting. Step 0 records the initial data.
ThompsonTrace thompson_loop(const ThompsonConfig& config);

/// Same target and initial data as thompson_loop, then batch_size * steps uniform points.
ThompsonTrace random_search(const ThompsonConfig& config);

}  // namespace sgdgp
