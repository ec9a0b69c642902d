#include "sgdgp/sgd.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "sgdgp/error.hpp"
#include "sgdgp/parallel.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

void SgdConfig::validate() const {
    if (steps < 1) throw InputError("sgd: steps must be >= 1");
    if (batch_size < 1) throw InputError("sgd: batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("sgd: learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("sgd: momentum must lie in [0, 1)");
    if (!exact_regularizer && (regularizer_features < 2 || regularizer_features % 2 != 0))
        throw InputError("sgd: regularizer_features must be even and >= 2");
    if (checkpoint_every < 0) throw InputError("sgd: checkpoint_every must be >= 0");
    if (block_columns < 0) throw InputError("sgd: block_columns must be >= 0");
    if (!(divergence_threshold > 0.0)) throw InputError("sgd: divergence_threshold must be positive");
}

void OptTrace::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trace file " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "step,time_s";
    if (!checkpoints.empty())
        for (const auto& [name, value] : checkpoints.front().diagnostics) out << ',' << name;
    out << '\n';
    for (const auto& c : checkpoints) {
        out << c.step << ',' << c.time_s;
        for (const auto& [name, value] : c.diagnostics) out << ',' << value;
        out << '\n';
    }
}

namespace {

bool is_checkpoint(long step, const SgdConfig& cfg) {
    return step == cfg.steps || (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0);
}

// The optimisation loop shared by run_sgd and optimize, without the checkpoint callback.
SgdResult sgd_loop(const GradientFn& gradient, const SgdConfig& cfg, Eigen::MatrixXd w) {
    const auto start = std::chrono::steady_clock::now();
    SgdResult res;
    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    Eigen::MatrixXd average = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    for (long step = 1; step <= cfg.steps; ++step) {
        const Eigen::MatrixXd g = gradient(w, step);
        velocity = cfg.momentum * velocity + g;
        w -= cfg.learning_rate * (g + cfg.momentum * velocity);
        const double norm = w.norm();
        if (!std::isfinite(norm) || norm > cfg.divergence_threshold)
            throw DivergenceError("sgd diverged at step " + std::to_string(step) + " (weight norm " +
                                      std::to_string(norm) + "); reduce the learning rate",
                                  step);
        if (cfg.polyak_averaging) average += (w - average) / static_cast<double>(step);
        if (is_checkpoint(step, cfg)) {
            Checkpoint c;
            c.step = step;
            c.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            c.weights = cfg.polyak_averaging ? average : w;
            res.trace.checkpoints.push_back(std::move(c));
        }
    }
    res.last_iterate = w;
    res.weights = cfg.polyak_averaging ? average : w;
    return res;
}

void annotate(OptTrace& trace, const CheckpointFn& on_checkpoint) {
    if (!on_checkpoint) return;
    for (auto& c : trace.checkpoints) c.diagnostics = on_checkpoint(c.step, c.weights);
}

}  // namespace

SgdResult run_sgd(const GradientFn& gradient, const SgdConfig& config, Eigen::MatrixXd initial,
                  const CheckpointFn& on_checkpoint) {
    config.validate();
    SgdResult res = sgd_loop(gradient, config, std::move(initial));
    annotate(res.trace, on_checkpoint);
    return res;
}

SgdResult optimize(const RepresenterObjective& objective, const SgdConfig& config, const Eigen::MatrixXd& initial,
                   std::size_t threads, const CheckpointFn& on_checkpoint) {
    config.validate();
    if (initial.rows() != objective.num_anchors() || initial.cols() != objective.num_columns())
        throw InputError("sgd: initial weights must be anchors x columns");
    const Eigen::Index cols = objective.num_columns();
    const Eigen::Index width = config.block_columns == 0 ? cols : std::min(config.block_columns, cols);
    const Eigen::Index blocks = (cols + width - 1) / width;

    std::vector<SgdResult> parts(static_cast<std::size_t>(blocks));
    parallel_for(parts.size(), threads, [&](std::size_t b) {
        const Eigen::Index first = static_cast<Eigen::Index>(b) * width;
        const Eigen::Index count = std::min(width, cols - first);
        Rng rng = make_rng(config.seed, b);
        GradientFn grad = [&](const Eigen::MatrixXd& w, long) {
            const auto batch = draw_batch(objective.num_data(), config.batch_size, rng);
            if (config.exact_regularizer) return objective.stochastic_gradient(w, batch, nullptr, first);
            const FourierFeatureMap features =
                sample_feature_map(objective.spec(), config.regularizer_features, rng);
            return objective.stochastic_gradient(w, batch, &features, first);
        };
        parts[b] = sgd_loop(grad, config, initial.middleCols(first, count));
    });

    if (blocks == 1) {
        annotate(parts.front().trace, on_checkpoint);
        return std::move(parts.front());
    }
    SgdResult res;
    res.weights.resize(initial.rows(), cols);
    res.last_iterate.resize(initial.rows(), cols);
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const auto& p = parts[static_cast<std::size_t>(b)];
        res.weights.middleCols(b * width, p.weights.cols()) = p.weights;
        res.last_iterate.middleCols(b * width, p.weights.cols()) = p.last_iterate;
    }
    const auto& first_trace = parts.front().trace.checkpoints;
    for (std::size_t k = 0; k < first_trace.size(); ++k) {
        Checkpoint c;
        c.step = first_trace[k].step;
        c.weights.resize(initial.rows(), cols);
        for (Eigen::Index b = 0; b < blocks; ++b) {
            const auto& ck = parts[static_cast<std::size_t>(b)].trace.checkpoints[k];
            c.time_s += ck.time_s;
            c.weights.middleCols(b * width, ck.weights.cols()) = ck.weights;
        }
        res.trace.checkpoints.push_back(std::move(c));
    }
    annotate(res.trace, on_checkpoint);
    return res;
}

double reference_learning_rate(const RepresenterObjective& objective) {
    return 1.0 / (2.0 * objective.curvature());
}

SgdConfig scaled_to_reference(const SgdConfig& config, const RepresenterObjective& objective) {
    SgdConfig out = config;
    out.learning_rate = config.learning_rate * reference_learning_rate(objective);
    return out;
}

}  // namespace sgdgp
