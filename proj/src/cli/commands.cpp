#include "cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "cli/config.hpp"
#include "sgdgp/cg.hpp"
#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/objectives.hpp"
#include "sgdgp/pathwise.hpp"
#include "sgdgp/random.hpp"
#include "sgdgp/serialization.hpp"
#include "sgdgp/spectral.hpp"
#include "sgdgp/synthetic.hpp"

namespace sgdgp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json metadata(const RunConfig& run) {
    return {{"format_version", config_version},
            {"command", run.command},
            {"config_hash", config_hash(run.source)},
            {"seed", run.seed}};
}

void write_metadata(const RunConfig& run) { write_json(run.output_dir / "metadata.json", metadata(run)); }

// JSON has no infinity or NaN; those become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct LoadedData {
    Dataset train;
    Dataset test;
};

LoadedData load_data(const DataConfig& cfg) {
    if (cfg.path && !fs::is_regular_file(*cfg.path))
        throw InputError("config.data.path: no such file '" + cfg.path->string() + "'");
    Dataset full = cfg.path ? load_csv(*cfg.path, cfg.target) : generate(*cfg.generator);
    if (cfg.standardize) full = standardize(full).first;
    if (cfg.train_fraction >= 1.0) return {full, full};
    auto [train, test] = split(full, SplitSpec{cfg.train_fraction, cfg.split_seed});
    return {std::move(train), std::move(test)};
}

KernelSpec resolve_kernel(const ModelConfig& m, const Dataset& train, std::size_t threads, json* provenance) {
    if (m.kernel) {
        if (m.kernel->dim() != train.dim())
            throw InputError("config.kernel.lengthscales: " + std::to_string(m.kernel->dim()) +
                             " lengthscales for " + std::to_string(train.dim()) + "-dimensional data");
        return *m.kernel;
    }
    HyperparameterSearch search = m.hyperparameters->search;
    search.threads = threads;
    const Eigen::Index subset = std::min(m.hyperparameters->subset_size, train.size());
    const HyperparameterFit fit =
        fit_hyperparameters_centroids(train, m.hyperparameters->centroids, subset, search);
    if (provenance) {
        json cents = json::array();
        for (const auto& c : fit.centroids)
            cents.push_back({{"centroid", c.centroid},
                             {"subset_size", c.subset.size()},
                             {"kernel", kernel_to_json(c.optimum.spec)},
                             {"log_marginal_likelihood", c.optimum.log_marginal_likelihood}});
        *provenance = {{"centroids", cents}, {"kernel", kernel_to_json(fit.spec)}};
    }
    return fit.spec;
}

Eigen::MatrixXd inducing_points(const InducingConfig& cfg, const KernelSpec& spec, const Dataset& train) {
    std::vector<Eigen::Index> rows;
    if (cfg.count) {
        const Eigen::Index m = std::min(*cfg.count, train.size());
        for (Eigen::Index i = 0; i < m; ++i) rows.push_back(i * train.size() / m);
    } else {
        rows = knn_inducing_select(train, cfg.lengthscale.value_or(spec.lengthscales.minCoeff()), cfg.neighbors);
    }
    return train.inputs()(rows, Eigen::all);
}

struct FitSettings {
    std::string method;
    Eigen::Index samples = 0;
    Eigen::Index prior_features = 2000;
    SgdConfig sgd, sample_sgd;
    CgConfig cg;
    InducingConfig inducing;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    const Dataset* monitor = nullptr;  // test set scored at mean checkpoints
};

struct FittedModel {
    Eigen::MatrixXd anchors;
    Eigen::VectorXd mean_weights;
    Eigen::MatrixXd sample_weights;
    std::vector<PriorFunctionDraw> priors;
    OptTrace mean_trace, sample_trace;
    std::vector<double> cg_residuals;
    long cg_iterations = 0;
    std::optional<ExactPosterior> exact;
};

FittedModel fit_model(const FitSettings& s, const KernelSpec& spec, const Dataset& train) {
    FittedModel out;
    SampleSlots slots;
    if (s.samples > 0) slots = draw_sample_slots(spec, train.inputs(), s.samples, s.prior_features, derive_seed(s.seed, 41));
    out.priors = slots.priors;
    out.anchors = train.inputs();

    if (s.method == "exact") {
        out.exact.emplace(fit_exact(spec, train, std::numeric_limits<Eigen::Index>::max()));
        out.mean_weights = out.exact->weights();
        if (s.samples > 0) out.sample_weights = out.exact->solve(slots.prior_values + slots.noise);
    } else if (s.method == "cg") {
        const CgMeanResult m = cg_posterior_mean(spec, train, s.cg);
        out.mean_weights = m.weights;
        out.cg_residuals = m.solve.residual_history;
        out.cg_iterations = m.solve.iterations;
        if (s.samples > 0) {
            const Eigen::MatrixXd k = gram(spec, train.inputs());
            LinearOperator op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return k * v + spec.noise_variance * v; };
            LinearOperator precond;
            std::optional<WoodburyPreconditioner> wb;
            if (s.cg.preconditioner_rank > 0) {
                wb.emplace(pivoted_cholesky(k, s.cg.preconditioner_rank).factor, spec.noise_variance);
                precond = [&](const Eigen::VectorXd& r) { return wb->apply(r); };
            }
            out.sample_weights.resize(train.size(), s.samples);
            for (Eigen::Index c = 0; c < s.samples; ++c)
                out.sample_weights.col(c) = cg_solve(op, slots.prior_values.col(c) + slots.noise.col(c), s.cg, precond).solution;
        }
    } else {
        const bool inducing = s.method == "sgd-inducing";
        if (inducing) out.anchors = inducing_points(s.inducing, spec, train);
        const RepresenterObjective mobj =
            inducing ? inducing_mean_objective(spec, train, out.anchors) : mean_objective(spec, train);
        const Eigen::MatrixXd zero_mean = Eigen::MatrixXd::Zero(out.anchors.rows(), 1);
        CheckpointFn on_checkpoint;
        if (s.monitor) {
            on_checkpoint = [&](long, const Eigen::MatrixXd& w) {
                const Eigen::VectorXd pred = gram(spec, s.monitor->inputs(), out.anchors) * w.col(0);
                const double rmse = std::sqrt((s.monitor->targets() - pred).squaredNorm() /
                                              static_cast<double>(s.monitor->size()));
                return Diagnostics{{"test_rmse", rmse}};
            };
        }
        SgdResult mres = optimize(mobj, scaled_to_reference(s.sgd, mobj), zero_mean, s.threads, on_checkpoint);
        out.mean_weights = mres.weights.col(0);
        out.mean_trace = std::move(mres.trace);
        if (s.samples > 0) {
            const RepresenterObjective sobj =
                inducing ? inducing_sample_objective(spec, train, out.anchors, slots.prior_values, slots.noise,
                                                     SampleForm::shifted)
                         : sample_objective(spec, train, slots.prior_values, slots.noise, SampleForm::shifted);
            const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(out.anchors.rows(), s.samples);
            SgdResult sres = optimize(sobj, scaled_to_reference(s.sample_sgd, sobj), zero, s.threads);
            out.sample_weights = std::move(sres.weights);
            out.sample_trace = std::move(sres.trace);
        }
    }
    return out;
}

Eigen::VectorXd mean_prediction(const FittedModel& m, const KernelSpec& spec, const Eigen::MatrixXd& x) {
    return gram(spec, x, m.anchors) * m.mean_weights;
}

json weight_summary(const FittedModel& m) {
    return {{"anchors", m.anchors.rows()}, {"samples", m.sample_weights.cols()}};
}

void write_trace(const OptTrace& trace, const fs::path& path) {
    if (!trace.checkpoints.empty()) trace.write_csv(path);
}

FitSettings settings_from(const FitConfig& cfg, const RunConfig& run) {
    FitSettings s;
    s.method = cfg.method;
    s.samples = cfg.samples;
    s.prior_features = cfg.prior_features;
    s.sgd = cfg.sgd;
    s.sample_sgd = cfg.sample_sgd;
    s.cg = cfg.cg;
    s.inducing = cfg.inducing;
    s.seed = run.seed;
    s.threads = run.threads;
    return s;
}

void cmd_fit(const json& j, const RunConfig& run, bool sample_command) {
    const FitConfig cfg = parse_fit(j, run, sample_command);
    const LoadedData data = load_data(cfg.data);
    fs::create_directories(run.output_dir);
    json provenance;
    const KernelSpec spec = resolve_kernel(cfg.model, data.train, run.threads, &provenance);
    FitSettings settings = settings_from(cfg, run);
    settings.monitor = &data.test;
    FittedModel model = fit_model(settings, spec, data.train);

    json metrics = {{"metadata", metadata(run)}, {"method", cfg.method}, {"kernel", kernel_to_json(spec)},
                    {"train_size", data.train.size()}, {"test_size", data.test.size()}, {"model", weight_summary(model)}};
    if (!provenance.is_null()) metrics["hyperparameters"] = provenance;
    const Eigen::VectorXd test_mean = mean_prediction(model, spec, data.test.inputs());
    Eigen::VectorXd test_var;
    if (cfg.samples >= 2) {
        const PosteriorEnsemble ens = assemble(spec, model.anchors, model.mean_weights, model.sample_weights, model.priors);
        test_var = predictive_moments(ens, data.test.inputs()).variance;
        const Metrics m = gaussian_metrics(test_mean, test_var, data.test.targets(), spec.noise_variance);
        metrics["rmse"] = m.rmse;
        metrics["nll"] = m.mean_nll;
    } else {
        metrics["rmse"] = std::sqrt((data.test.targets() - test_mean).squaredNorm() / static_cast<double>(data.test.size()));
        metrics["nll"] = nullptr;
    }
    if (data.train.size() <= cfg.exact_cap) {
        const ExactPosterior post = model.exact ? *model.exact : fit_exact(spec, data.train, cfg.exact_cap);
        const PredictiveMoments pm = posterior_moments(post, data.test.inputs());
        const Metrics em = gaussian_metrics(pm.mean, pm.variance, data.test.targets(), spec.noise_variance);
        metrics["exact"] = {{"rmse", em.rmse},
                            {"nll", em.mean_nll},
                            {"max_abs_mean_difference", (pm.mean - test_mean).cwiseAbs().maxCoeff()},
                            {"jitter_applied", post.jitter_applied()}};
    }
    if (!model.cg_residuals.empty()) {
        metrics["cg_iterations"] = model.cg_iterations;
        Eigen::MatrixXd table(static_cast<Eigen::Index>(model.cg_residuals.size()), 2);
        for (std::size_t k = 0; k < model.cg_residuals.size(); ++k)
            table.row(static_cast<Eigen::Index>(k)) << static_cast<double>(k), model.cg_residuals[k];
        write_table_csv(run.output_dir / "cg_residuals.csv", {"iteration", "relative_residual"}, table);
    }

    write_json(run.output_dir / "kernel.json", kernel_to_json(spec));
    save_weights({model.mean_weights, run.seed, "mean"}, run.output_dir / "mean_weights.json");
    if (cfg.samples > 0) save_weights({model.sample_weights, run.seed, "samples"}, run.output_dir / "sample_weights.json");
    write_trace(model.mean_trace, run.output_dir / "trace_mean.csv");
    write_trace(model.sample_trace, run.output_dir / "trace_samples.csv");

    if (sample_command) {
        Eigen::MatrixXd q;
        if (data.train.dim() == 1) {
            const double lo = cfg.query_low.value_or(data.train.inputs().minCoeff());
            const double hi = cfg.query_high.value_or(data.train.inputs().maxCoeff());
            q = Eigen::VectorXd::LinSpaced(cfg.query_count, lo, hi);
        } else {
            q = data.test.inputs();
        }
        const PosteriorEnsemble ens = assemble(spec, model.anchors, model.mean_weights, model.sample_weights, model.priors);
        const PredictiveMoments pm = predictive_moments(ens, q);
        const Eigen::MatrixXd samples = ens.samples(q);
        std::vector<std::string> cols;
        for (Eigen::Index c = 0; c < q.cols(); ++c) cols.push_back(q.cols() == 1 ? "x" : "x" + std::to_string(c));
        cols.push_back("mean");
        cols.push_back("variance");
        for (Eigen::Index s = 0; s < samples.cols(); ++s) cols.push_back("sample_" + std::to_string(s));
        Eigen::MatrixXd table(q.rows(), q.cols() + 2 + samples.cols());
        table << q, pm.mean, pm.variance, samples;
        write_table_csv(run.output_dir / "predictions.csv", cols, table);
    }
    write_json(run.output_dir / "metrics.json", metrics);
    write_metadata(run);
}

void cmd_diagnose(const json& j, const RunConfig& run) {
    const DiagnoseConfig cfg = parse_diagnose(j, run);
    const LoadedData data = load_data(cfg.data);
    const Dataset& train = data.train;
    if (train.size() > cfg.exact_cap)
        throw InputError("diagnose: N = " + std::to_string(train.size()) + " exceeds exact_cap " + std::to_string(cfg.exact_cap));
    fs::create_directories(run.output_dir);
    const KernelSpec spec = resolve_kernel(cfg.model, train, run.threads, nullptr);
    const double noise = spec.noise_variance;
    const SpectralDecomposition dec = decompose(spec, train, cfg.exact_cap);
    const ExactPosterior post = fit_exact(spec, train, cfg.exact_cap);
    const Eigen::VectorXd& v_star = post.weights();
    const Eigen::MatrixXd k = gram(spec, train.inputs());

    auto errors = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd d = v - v_star;
        return std::pair<double, double>{d.norm(), std::sqrt(std::max(0.0, d.dot(k * d)))};
    };

    // Mean weights and their error trace.
    Eigen::VectorXd v_mean = v_star;
    OptTrace trace;
    if (cfg.inject_exact) {
        trace.checkpoints.push_back({0, 0.0, v_star, {{"euclidean_error", 0.0}, {"rkhs_error", 0.0}}});
    } else {
        const RepresenterObjective mobj = mean_objective(spec, train);
        SgdResult res = optimize(mobj, scaled_to_reference(cfg.sgd, mobj), Eigen::MatrixXd::Zero(train.size(), 1),
                                 run.threads, [&](long, const Eigen::MatrixXd& w) {
                                     const auto [e, r] = errors(w.col(0));
                                     return Diagnostics{{"euclidean_error", e}, {"rkhs_error", r}};
                                 });
        v_mean = res.weights.col(0);
        trace = std::move(res.trace);
    }
    trace.write_csv(run.output_dir / "error_trace.csv");

    // Noisy, momentum-free, averaged gradient descent in the setting of the bound.
    const double eta = cfg.bound_rate_fraction * max_stable_learning_rate(dec, noise);
    const Eigen::VectorXd& y = train.targets();
    Eigen::VectorXd measured = Eigen::VectorXd::Zero(train.size());
    if (!cfg.inject_exact) {
        const Eigen::MatrixXd a = k * (k + noise * Eigen::MatrixXd::Identity(train.size(), train.size())) / noise;
        const Eigen::VectorXd ky = k * y / noise;
        Rng rng = make_rng(run.seed, 71);
        SgdConfig gd;
        gd.steps = cfg.bound_steps;
        gd.learning_rate = eta;
        gd.momentum = 0.0;
        gd.polyak_averaging = true;
        gd.exact_regularizer = true;
        gd.seed = run.seed;
        GradientFn grad = [&](const Eigen::MatrixXd& w, long) -> Eigen::MatrixXd {
            return a * w - ky + cfg.bound_noise * standard_normal_vector(w.rows(), rng);
        };
        const SgdResult res = run_sgd(grad, gd, Eigen::MatrixXd::Zero(train.size(), 1));
        measured = projected_errors(dec, res.weights.col(0), v_star).coefficient;
    }
    const Eigen::VectorXd bound =
        coefficient_bound(dec, cfg.bound_steps, eta, noise, y.norm(), cfg.bound_noise, cfg.bound_delta);
    Eigen::MatrixXd spectral(train.size(), 5);
    long within = 0, counted = 0;
    for (Eigen::Index i = 0; i < train.size(); ++i) {
        const double b = std::isfinite(bound[i]) ? bound[i] : std::numeric_limits<double>::infinity();
        spectral.row(i) << static_cast<double>(i), dec.eigenvalues()[i], measured[i], b, measured[i] / b;
        if (dec.eigenvalues()[i] > 1e-12 * dec.eigenvalues()[0]) {
            ++counted;
            if (measured[i] <= b) ++within;
        }
    }
    write_table_csv(run.output_dir / "spectral.csv", {"i", "lambda", "measured_error", "bound", "ratio"}, spectral);

    // W2 between SGD and exact predictive marginals.
    Eigen::MatrixXd q;
    if (train.dim() == 1) q = Eigen::VectorXd::LinSpaced(cfg.query_count, cfg.query_low, cfg.query_high);
    else q = data.test.inputs();
    const SampleSlots slots = draw_sample_slots(spec, train.inputs(), cfg.samples, cfg.prior_features, derive_seed(run.seed, 41));
    const Eigen::MatrixXd alpha_star = post.solve(slots.prior_values + slots.noise);
    Eigen::MatrixXd alpha = alpha_star;
    if (!cfg.inject_exact) {
        const RepresenterObjective sobj = sample_objective(spec, train, slots.prior_values, slots.noise, SampleForm::shifted);
        alpha = optimize(sobj, scaled_to_reference(cfg.sample_sgd, sobj), Eigen::MatrixXd::Zero(train.size(), cfg.samples),
                         run.threads).weights;
    }
    const PosteriorEnsemble sgd_ens = assemble(spec, train.inputs(), v_mean, alpha, slots.priors);
    const PredictiveMoments sgd_pm = predictive_moments(sgd_ens, q);
    PredictiveMoments ref_pm;
    if (cfg.reference == "paired") {
        ref_pm = predictive_moments(assemble(spec, train.inputs(), v_star, alpha_star, slots.priors), q);
    } else {
        ref_pm = posterior_moments(post, q);
    }
    Eigen::VectorXd w2(q.rows());
    for (Eigen::Index i = 0; i < q.rows(); ++i)
        w2[i] = w2_gaussian(sgd_pm.mean[i], std::sqrt(sgd_pm.variance[i]), ref_pm.mean[i], std::sqrt(ref_pm.variance[i]));
    std::vector<std::string> xcols;
    for (Eigen::Index c = 0; c < q.cols(); ++c) xcols.push_back(q.cols() == 1 ? "x" : "x" + std::to_string(c));
    {
        auto cols = xcols;
        cols.push_back("w2");
        Eigen::MatrixXd t(q.rows(), q.cols() + 1);
        t << q, w2;
        write_table_csv(run.output_dir / "w2.csv", cols, t);
    }
    {
        auto cols = xcols;
        for (const char* c : {"sgd_mean", "sgd_sd", "exact_mean", "exact_sd"}) cols.push_back(c);
        Eigen::MatrixXd t(q.rows(), q.cols() + 4);
        t << q, sgd_pm.mean, sgd_pm.variance.cwiseSqrt(), ref_pm.mean, ref_pm.variance.cwiseSqrt();
        write_table_csv(run.output_dir / "marginals.csv", cols, t);
    }

    const auto [e_final, r_final] = errors(v_mean);
    json metrics = {{"metadata", metadata(run)},
                    {"kernel", kernel_to_json(spec)},
                    {"train_size", train.size()},
                    {"euclidean_error", e_final},
                    {"rkhs_error", r_final},
                    {"bound_learning_rate", eta},
                    {"bound_steps", cfg.bound_steps},
                    {"fraction_within_bound", counted ? static_cast<double>(within) / static_cast<double>(counted) : 1.0},
                    {"mean_w2", w2.mean()},
                    {"max_w2", w2.maxCoeff()}};
    write_json(run.output_dir / "metrics.json", metrics);
    write_metadata(run);
}

void cmd_benchmark(const json& j, const RunConfig& run) {
    const BenchmarkConfig cfg = parse_benchmark(j, run);
    fs::create_directories(run.output_dir);
    json rows = json::array();
    std::vector<std::string> names;
    Eigen::MatrixXd table(0, 5);
    std::vector<std::string> labels;
    for (const auto& ds : cfg.datasets) {
        const LoadedData data = load_data(ds.data);
        const KernelSpec tuned = resolve_kernel(ds.model, data.train, run.threads, nullptr);
        for (const auto& regime : cfg.regimes) {
            KernelSpec spec = tuned;
            if (regime == "low") spec.noise_variance = cfg.low_noise;
            for (const auto& method : cfg.methods) {
                const auto t0 = std::chrono::steady_clock::now();
                Metrics m;
                if (method == "exact") {
                    if (data.train.size() > cfg.exact_cap) throw InputError("benchmark: dataset '" + ds.name + "' exceeds exact_cap");
                    const ExactPosterior post = fit_exact(spec, data.train, cfg.exact_cap);
                    const PredictiveMoments pm = posterior_moments(post, data.test.inputs());
                    m = gaussian_metrics(pm.mean, pm.variance, data.test.targets(), spec.noise_variance);
                } else {
                    FitSettings s;
                    s.method = method;
                    s.samples = cfg.samples;
                    s.prior_features = cfg.prior_features;
                    s.sgd = cfg.sgd;
                    s.sample_sgd = cfg.sample_sgd;
                    s.cg = cfg.cg;
                    s.inducing = cfg.inducing;
                    s.seed = run.seed;
                    s.threads = run.threads;
                    const FittedModel model = fit_model(s, spec, data.train);
                    const PosteriorEnsemble ens =
                        assemble(spec, model.anchors, model.mean_weights, model.sample_weights, model.priors);
                    m = metrics(ens, data.test);
                }
                const double elapsed = seconds_since(t0);
                rows.push_back({{"dataset", ds.name}, {"method", method}, {"regime", regime},
                                {"noise_variance", spec.noise_variance}, {"rmse", number_or_null(m.rmse)},
                                {"nll", number_or_null(m.mean_nll)}});
                labels.push_back(ds.name + "," + method + "," + regime);
                table.conservativeResize(table.rows() + 1, Eigen::NoChange);
                table.row(table.rows() - 1) << spec.noise_variance, m.rmse, m.mean_nll, elapsed, 0.0;
            }
        }
    }
    {
        std::ofstream out(run.output_dir / "table.csv");
        out << std::setprecision(std::numeric_limits<double>::max_digits10);
        out << "dataset,method,regime,noise_variance,rmse,nll,time_s\n";
        for (Eigen::Index i = 0; i < table.rows(); ++i)
            out << labels[static_cast<std::size_t>(i)] << ',' << table(i, 0) << ',' << table(i, 1) << ','
                << table(i, 2) << ',' << table(i, 3) << '\n';
    }
    write_json(run.output_dir / "metrics.json", {{"metadata", metadata(run)}, {"rows", rows}});
    write_metadata(run);
}

void cmd_thompson(const json& j, const RunConfig& run) {
    const ThompsonRunConfig cfg = parse_thompson(j, run);
    fs::create_directories(run.output_dir);
    const std::vector<double> lengthscales = cfg.lengthscales.empty() ? std::vector<double>{cfg.base.lengthscale} : cfg.lengthscales;
    const std::vector<std::uint64_t> seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.base.seed} : cfg.seeds;
    const bool single = lengthscales.size() == 1 && seeds.size() == 1;
    json runs = json::array();
    std::ofstream table(run.output_dir / "table.csv");
    table << std::setprecision(std::numeric_limits<double>::max_digits10);
    table << "lengthscale,seed,backend,step,max_value,wall_time_s,evaluations\n";
    auto emit = [&](double ls, std::uint64_t seed, const std::string& backend, const ThompsonTrace& t) {
        for (const auto& s : t.steps)
            table << ls << ',' << seed << ',' << backend << ',' << s.step << ',' << s.max_value << ',' << s.wall_time_s
                  << ',' << s.evaluations << '\n';
    };
    for (double ls : lengthscales) {
        for (std::uint64_t seed : seeds) {
            ThompsonConfig c = cfg.base;
            c.lengthscale = ls;
            c.seed = seed;
            const ThompsonTrace trace = thompson_loop(c);
            emit(ls, seed, to_string(c.backend), trace);
            json r = {{"lengthscale", ls}, {"seed", seed}, {"backend", to_string(c.backend)},
                      {"final_max", trace.final_max()}, {"evaluations", trace.steps.back().evaluations}};
            json maxima = json::array();
            for (const auto& s : trace.steps) maxima.push_back(s.max_value);
            r["max_values"] = maxima;
            if (single) trace.write_csv(run.output_dir / "trace.csv");
            if (cfg.baseline) {
                const ThompsonTrace rs = random_search(c);
                emit(ls, seed, "random", rs);
                r["random_final_max"] = rs.final_max();
                if (single) rs.write_csv(run.output_dir / "random_trace.csv");
            }
            runs.push_back(r);
        }
    }
    write_json(run.output_dir / "metrics.json", {{"metadata", metadata(run)}, {"runs", runs}});
    write_metadata(run);
}

void cmd_gen_data(const json& j, const RunConfig& run) {
    const GenDataConfig cfg = parse_gen_data(j, run);
    fs::create_directories(run.output_dir);
    save_csv(generate(cfg.generator), run.output_dir / cfg.file);
    write_metadata(run);
}

}  // namespace

void run_command(const std::string& command, const json& config, const CommandOptions& options) {
    std::optional<fs::path> out;
    if (options.output_dir) out = fs::path(*options.output_dir);
    const RunConfig run = read_run_config(command, config, options.seed, options.threads, out);
    json j = config;
    if (options.seed) j["seed"] = *options.seed;
    if (options.threads) j["threads"] = *options.threads;
    if (options.output_dir) j["output_dir"] = *options.output_dir;
    if (command == "fit") cmd_fit(j, run, false);
    else if (command == "sample") cmd_fit(j, run, true);
    else if (command == "diagnose") cmd_diagnose(j, run);
    else if (command == "benchmark") cmd_benchmark(j, run);
    else if (command == "thompson") cmd_thompson(j, run);
    else if (command == "gen-data") cmd_gen_data(j, run);
    else throw InputError("unknown command '" + command + "'");
}

int run_command_main(const std::string& command, const std::string& config_path, const CommandOptions& options) {
    try {
        const json config = read_json(config_path);
        run_command(command, config, options);
        return 0;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace sgdgp::cli
