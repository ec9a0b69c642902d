#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sgdgp/objectives.hpp"

namespace sgdgp {

struct SgdConfig {
    long steps = 100000;
    Eigen::Index batch_size = 512;
    double learning_rate = 0.5;
    double momentum = 0.9;
    Eigen::Index regularizer_features = 100;  // fresh features per step
    bool exact_regularizer = false;           // use K_AA instead of the feature estimate
    bool polyak_averaging = true;
    std::uint64_t seed = 0;
    long checkpoint_every = 0;                // 0 records only the final step
    Eigen::Index block_columns = 16;          // slots sharing one batch/feature stream; 0 = all
    double divergence_threshold = 1e8;

    /// Throws InputError on invalid values.
    void validate() const;
};

using Diagnostics = std::vector<std::pair<std::string, double>>;

struct Checkpoint {
    long step = 0;
    double time_s = 0.0;
    Eigen::MatrixXd weights;  // averaged iterate when averaging is on
    Diagnostics diagnostics;
};

struct OptTrace {
    std::vector<Checkpoint> checkpoints;

    /// Columns: step, time_s, then the diagnostic names of the first checkpoint.
    void write_csv(const std::filesystem::path& path) const;
};

struct SgdResult {
    Eigen::MatrixXd weights;       // Polyak average of iterates 1..t, or the last iterate
    Eigen::MatrixXd last_iterate;
    OptTrace trace;
};

using GradientFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& w, long step)>;
using CheckpointFn = std::function<Diagnostics(long step, const Eigen::MatrixXd& weights)>;

/// Nesterov momentum SGD:  b <- momentum b + g,  w <- w - rate (g + momentum b).
/// Throws DivergenceError when the iterate norm exceeds the threshold or turns non-finite.
SgdResult run_sgd(const GradientFn& gradient, const SgdConfig& config, Eigen::MatrixXd initial,
                  const CheckpointFn& on_checkpoint = {});

/// Runs SGD on a representer objective. Columns are split into blocks of
/// `block_columns`; block b draws its batches and regulariser features from the stream
/// derive_seed(seed, b), so results do not depend on `threads`.
SgdResult optimize(const RepresenterObjective& objective, const SgdConfig& config, const Eigen::MatrixXd& initial,
                   std::size_t threads = 1, const CheckpointFn& on_checkpoint = {});

/// Step size on the raw (unhalved) gradient that equals the edge of monotone
/// contraction, 1 / (2 lambda_max(K_Ax K_xA / noise + K_AA)).
double reference_learning_rate(const RepresenterObjective& objective);

/// Copy of `config` whose learning rate is read as a multiple of the reference rate.
SgdConfig scaled_to_reference(const SgdConfig& config, const RepresenterObjective& objective);

}  // namespace sgdgp
