#include "sgdgp/thompson.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/objectives.hpp"
#include "sgdgp/parallel.hpp"
#include "sgdgp/pathwise.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

std::string to_string(ThompsonBackend backend) {
    switch (backend) {
        case ThompsonBackend::exact: return "exact";
        case ThompsonBackend::sgd: return "sgd";
        case ThompsonBackend::cg: return "cg";
        case ThompsonBackend::random: return "random";
    }
    return "exact";
}

ThompsonBackend thompson_backend_from_string(const std::string& name) {
    if (name == "exact") return ThompsonBackend::exact;
    if (name == "sgd") return ThompsonBackend::sgd;
    if (name == "cg") return ThompsonBackend::cg;
    if (name == "random") return ThompsonBackend::random;
    throw InputError("unknown Thompson backend '" + name + "'");
}

ThompsonConfig::ThompsonConfig() {
    sgd_mean.steps = 1000;
    sgd_mean.batch_size = 128;
    sgd_mean.learning_rate = 0.5;
    sgd_samples = sgd_mean;
    sgd_samples.learning_rate = 0.1;
    sgd_samples.block_columns = 0;
    cg.max_iters = 10;
    cg.tolerance = 1e-6;
}

void ThompsonConfig::validate() const {
    if (dim < 1) throw InputError("thompson: dim must be >= 1");
    KernelSpec::isotropic(family, dim, lengthscale, signal_variance, model_noise).validate();
    if (!(observation_noise >= 0.0)) throw InputError("thompson: observation_noise must be >= 0");
    if (initial_points < 1 || batch_size < 1 || steps < 1) throw InputError("thompson: counts must be positive");
    if (candidates_per_round < 1 || rounds < 1 || top_k < 1 || ascent_steps < 0)
        throw InputError("thompson: candidate counts must be positive");
    if (top_k > rounds) throw InputError("thompson: top_k cannot exceed rounds");
    if (uniform_fraction < 0.0 || exploit_fraction < 0.0 || std::abs(uniform_fraction + exploit_fraction - 1.0) > 1e-12)
        throw InputError("thompson: uniform_fraction and exploit_fraction must be non-negative and sum to 1");
    if (!(ascent_rate > 0.0)) throw InputError("thompson: ascent_rate must be positive");
    if (target_features < 2 || target_features % 2 || sample_features < 2 || sample_features % 2)
        throw InputError("thompson: feature counts must be even and >= 2");
    if (backend == ThompsonBackend::sgd) {
        sgd_mean.validate();
        sgd_samples.validate();
    }
    if (backend == ThompsonBackend::cg) cg.validate();
}

PriorFunctionDraw draw_target(Eigen::Index dim, const KernelSpec& spec, Eigen::Index num_features,
                              std::uint64_t seed) {
    if (spec.dim() != dim) throw InputError("target: kernel dimension mismatch");
    return sample_prior_function(spec, num_features, seed);
}

PriorFunctionDraw draw_target(const ThompsonConfig& config) {
    const KernelSpec spec = KernelSpec::isotropic(config.family, config.dim, config.lengthscale,
                                                  config.signal_variance, config.model_noise);
    return draw_target(config.dim, spec, config.target_features, derive_seed(config.seed, 9001));
}

Eigen::MatrixXd nearby_locations(const Dataset& data, const ThompsonConfig& config, Eigen::Index count, Rng& rng) {
    if (data.empty()) throw InputError("nearby locations: empty data");
    const Eigen::Index d = data.dim();
    const auto n_uniform = static_cast<Eigen::Index>(std::llround(config.uniform_fraction * static_cast<double>(count)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, config.lengthscale / 2.0);
    Eigen::MatrixXd out(count, d);
    for (Eigen::Index i = 0; i < n_uniform; ++i)
        for (Eigen::Index c = 0; c < d; ++c) out(i, c) = unit(rng);
    if (n_uniform == count) return out;

    const Eigen::VectorXd& y = data.targets();
    std::vector<double> w(static_cast<std::size_t>(y.size()));
    const double lo = y.minCoeff();
    for (Eigen::Index i = 0; i < y.size(); ++i) w[static_cast<std::size_t>(i)] = y[i] - lo;
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) std::fill(w.begin(), w.end(), 1.0);
    std::discrete_distribution<Eigen::Index> pick(w.begin(), w.end());
    for (Eigen::Index i = n_uniform; i < count; ++i) {
        const Eigen::Index src = pick(rng);
        for (Eigen::Index c = 0; c < d; ++c)
            out(i, c) = std::clamp(data.inputs()(src, c) + normal(rng), 0.0, 1.0);
    }
    return out;
}

namespace {

// Row indices of the k largest entries, largest first; ties keep the lower index.
std::vector<Eigen::Index> top_indices(const Eigen::VectorXd& values, Eigen::Index k) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
    idx.resize(static_cast<std::size_t>(std::min<Eigen::Index>(k, values.size())));
    return idx;
}

}  // namespace

Eigen::MatrixXd propose_candidates(const Dataset& data, const BatchField& sample, const ThompsonConfig& config,
                                   Rng& rng) {
    Eigen::MatrixXd winners(config.rounds, data.dim());
    Eigen::VectorXd winner_values(config.rounds);
    for (int r = 0; r < config.rounds; ++r) {
        const Eigen::MatrixXd cand = nearby_locations(data, config, config.candidates_per_round, rng);
        const Eigen::VectorXd vals = sample(cand);
        Eigen::Index best = 0;
        vals.maxCoeff(&best);
        winners.row(r) = cand.row(best);
        winner_values[r] = vals[best];
    }
    return winners(top_indices(winner_values, config.top_k), Eigen::all);
}

AcquisitionMaximum maximize_acquisition(const Acquisition& f, const Eigen::MatrixXd& starts, int steps, double rate) {
    if (starts.rows() < 1) throw InputError("maximize_acquisition: need at least one start");
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    AcquisitionMaximum best;
    best.value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < starts.rows(); ++s) {
        Eigen::VectorXd x = starts.row(s).transpose();
        double val = f.value(x);
        if (val > best.value) best = {x, val};
        Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size()), v = Eigen::VectorXd::Zero(x.size());
        for (int t = 1; t <= steps; ++t) {
            const Eigen::VectorXd g = f.gradient(x);
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g.cwiseAbs2();
            const Eigen::VectorXd mhat = m / (1.0 - std::pow(beta1, t));
            const Eigen::VectorXd vhat = v / (1.0 - std::pow(beta2, t));
            x = (x.array() + rate * mhat.array() / (vhat.array().sqrt() + eps)).cwiseMax(0.0).cwiseMin(1.0);
            val = f.value(x);
            if (val > best.value) best = {x, val};
        }
    }
    return best;
}

void ThompsonTrace::write_csv(const std::filesystem::path& path, bool include_time) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trace file " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "step,max_value," << (include_time ? "wall_time_s," : "") << "evaluations,candidate_evaluations\n";
    for (const auto& s : steps) {
        out << s.step << ',' << s.max_value << ',';
        if (include_time) out << s.wall_time_s << ',';
        out << s.evaluations << ',' << s.candidate_evaluations << '\n';
    }
}

namespace {

struct LoopState {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    ThompsonTrace trace;
};

Eigen::MatrixXd uniform_points(Eigen::Index n, Eigen::Index d, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd out(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < d; ++c) out(i, c) = unit(rng);
    return out;
}

Eigen::VectorXd observe(const PriorFunctionDraw& target, const Eigen::MatrixXd& x, double noise, Rng& rng) {
    return target.evaluate(x) + std::sqrt(noise) * standard_normal_vector(x.rows(), rng);
}

void append_rows(Eigen::MatrixXd& m, const Eigen::MatrixXd& rows) {
    const Eigen::Index old = m.rows();
    m.conservativeResize(old + rows.rows(), Eigen::NoChange);
    m.bottomRows(rows.rows()) = rows;
}

void append_rows(Eigen::VectorXd& v, const Eigen::VectorXd& rows) {
    const Eigen::Index old = v.size();
    v.conservativeResize(old + rows.size());
    v.tail(rows.size()) = rows;
}

void record(LoopState& st, int step, double seconds, long candidate_evals) {
    ThompsonStep s;
    s.step = step;
    Eigen::Index best = 0;
    s.max_value = st.y.maxCoeff(&best);
    if (!st.trace.steps.empty()) s.max_value = std::max(s.max_value, st.trace.steps.back().max_value);
    s.wall_time_s = seconds;
    s.evaluations = static_cast<long>(st.y.size());
    s.candidate_evaluations = candidate_evals;
    st.trace.best_location = st.x.row(best).transpose();
    st.trace.steps.push_back(s);
}

LoopState initial_state(const ThompsonConfig& cfg, const PriorFunctionDraw& target) {
    LoopState st;
    Rng rng = make_rng(cfg.seed, 101);
    st.x = uniform_points(cfg.initial_points, cfg.dim, rng);
    st.y = observe(target, st.x, cfg.observation_noise, rng);
    record(st, 0, 0.0, 0);
    return st;
}

Eigen::MatrixXd pad_rows(const Eigen::MatrixXd& w, Eigen::Index rows) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, w.cols());
    out.topRows(std::min(rows, w.rows())) = w.topRows(std::min(rows, w.rows()));
    return out;
}

}  // namespace

ThompsonTrace thompson_loop(const ThompsonConfig& cfg) {
    cfg.validate();
    if (cfg.backend == ThompsonBackend::random) return random_search(cfg);
    const PriorFunctionDraw target = draw_target(cfg);
    LoopState st = initial_state(cfg, target);
    const KernelSpec spec =
        KernelSpec::isotropic(cfg.family, cfg.dim, cfg.lengthscale, cfg.signal_variance, cfg.model_noise);
    const Eigen::Index b = cfg.batch_size;

    std::vector<PriorFunctionDraw> priors;
    for (Eigen::Index s = 0; s < b; ++s)
        priors.push_back(sample_prior_function(spec, cfg.sample_features, derive_seed(cfg.seed, 1000 + s)));
    Rng noise_rng = make_rng(cfg.seed, 202);
    Rng obs_rng = make_rng(cfg.seed, 303);
    Rng cand_rng = make_rng(cfg.seed, 404);
    Eigen::MatrixXd slot_noise = std::sqrt(cfg.model_noise) * standard_normal_matrix(st.x.rows(), b, noise_rng);
    Eigen::VectorXd mean_w = Eigen::VectorXd::Zero(st.x.rows());
    Eigen::MatrixXd sample_w = Eigen::MatrixXd::Zero(st.x.rows(), b);

    for (int step = 1; step <= cfg.steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        const Dataset data(st.x, st.y);
        const Eigen::Index n = data.size();
        Eigen::MatrixXd prior_vals(n, b);
        for (Eigen::Index s = 0; s < b; ++s) prior_vals.col(s) = priors[static_cast<std::size_t>(s)].evaluate(st.x);

        try {
            if (cfg.backend == ThompsonBackend::exact) {
                const ExactPosterior post = fit_exact(spec, data, std::numeric_limits<Eigen::Index>::max());
                mean_w = post.weights();
                sample_w = post.solve(prior_vals + slot_noise);
            } else if (cfg.backend == ThompsonBackend::cg) {
                const CgMeanResult m = cg_posterior_mean(spec, data, cfg.cg);
                mean_w = m.weights;
                const Eigen::MatrixXd k = gram(spec, st.x);
                LinearOperator op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                    return k * v + spec.noise_variance * v;
                };
                for (Eigen::Index s = 0; s < b; ++s)
                    sample_w.col(s) = cg_solve(op, prior_vals.col(s) + slot_noise.col(s), cfg.cg).solution;
            } else {
                const RepresenterObjective mobj = mean_objective(spec, data);
                SgdConfig mc = scaled_to_reference(cfg.sgd_mean, mobj);
                mc.seed = derive_seed(cfg.sgd_mean.seed ^ cfg.seed, 500 + static_cast<std::uint64_t>(step));
                const Eigen::MatrixXd m0 = cfg.warm_start ? Eigen::MatrixXd(mean_w) : Eigen::MatrixXd::Zero(n, 1);
                mean_w = optimize(mobj, mc, m0, cfg.threads).weights.col(0);
                const RepresenterObjective sobj =
                    sample_objective(spec, data, prior_vals, slot_noise, SampleForm::shifted);
                SgdConfig sc = scaled_to_reference(cfg.sgd_samples, sobj);
                sc.seed = derive_seed(cfg.sgd_samples.seed ^ cfg.seed, 600 + static_cast<std::uint64_t>(step));
                const Eigen::MatrixXd s0 = cfg.warm_start ? sample_w : Eigen::MatrixXd::Zero(n, b);
                sample_w = optimize(sobj, sc, s0, cfg.threads).weights;
            }
        } catch (const NumericalError& e) {
            throw NumericalError("thompson step " + std::to_string(step) + ": " + e.what());
        }

        const PosteriorEnsemble ens = assemble(spec, st.x, mean_w, sample_w, priors);

        // Candidate rounds are shared by all samples; each keeps its own round winners.
        std::vector<Eigen::MatrixXd> winners(static_cast<std::size_t>(b), Eigen::MatrixXd(cfg.rounds, cfg.dim));
        Eigen::MatrixXd winner_vals(cfg.rounds, b);
        for (int r = 0; r < cfg.rounds; ++r) {
            const Eigen::MatrixXd cand = nearby_locations(data, cfg, cfg.candidates_per_round, cand_rng);
            const Eigen::MatrixXd vals = ens.samples(cand);
            for (Eigen::Index s = 0; s < b; ++s) {
                Eigen::Index best = 0;
                winner_vals(r, s) = vals.col(s).maxCoeff(&best);
                winners[static_cast<std::size_t>(s)].row(r) = cand.row(best);
            }
        }
        Eigen::MatrixXd x_new(b, cfg.dim);
        parallel_for(static_cast<std::size_t>(b), cfg.threads, [&](std::size_t s) {
            const auto idx = top_indices(winner_vals.col(static_cast<Eigen::Index>(s)), cfg.top_k);
            const Eigen::MatrixXd starts = winners[s](idx, Eigen::all);
            const auto si = static_cast<Eigen::Index>(s);
            Acquisition acq{[&](const Eigen::VectorXd& x) { return ens.sample_value(si, x); },
                            [&](const Eigen::VectorXd& x) { return ens.sample_gradient(si, x); }};
            x_new.row(si) = maximize_acquisition(acq, starts, cfg.ascent_steps, cfg.ascent_rate).location.transpose();
        });

        append_rows(st.x, x_new);
        append_rows(st.y, observe(target, x_new, cfg.observation_noise, obs_rng));
        append_rows(slot_noise, std::sqrt(cfg.model_noise) * standard_normal_matrix(b, b, noise_rng));
        mean_w = pad_rows(mean_w, st.x.rows()).col(0);
        sample_w = pad_rows(sample_w, st.x.rows());
        const long cand_evals = static_cast<long>(b) * (cfg.rounds * cfg.candidates_per_round +
                                                        cfg.top_k * (cfg.ascent_steps + 1));
        record(st, step, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), cand_evals);
    }
    return st.trace;
}

ThompsonTrace random_search(const ThompsonConfig& cfg) {
    cfg.validate();
    const PriorFunctionDraw target = draw_target(cfg);
    LoopState st = initial_state(cfg, target);
    Rng rng = make_rng(cfg.seed, 505);
    Rng obs_rng = make_rng(cfg.seed, 303);
    for (int step = 1; step <= cfg.steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::MatrixXd x_new = uniform_points(cfg.batch_size, cfg.dim, rng);
        append_rows(st.x, x_new);
        append_rows(st.y, observe(target, x_new, cfg.observation_noise, obs_rng));
        record(st, step, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 0);
    }
    return st.trace;
}

}  // namespace sgdgp
