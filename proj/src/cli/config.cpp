#include "cli/config.hpp"

#include <cstdio>

#include "sgdgp/error.hpp"
#include "sgdgp/random.hpp"
#include "sgdgp/serialization.hpp"

namespace sgdgp::cli {

Reader::Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(path_ + ": expected an object");
}

bool Reader::has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

void Reader::fail(const std::string& key, const std::string& message) const {
    throw InputError(path_ + "." + key + ": " + message);
}

const nlohmann::json& Reader::lookup(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
}

Reader Reader::child(const std::string& key) {
    if (!has(key)) fail(key, "missing field");
    const auto& v = lookup(key);
    if (!v.is_object()) fail(key, "expected an object");
    return Reader(v, path_ + "." + key);
}

const nlohmann::json& Reader::raw(const std::string& key) {
    if (!has(key)) fail(key, "missing field");
    return lookup(key);
}

double Reader::number(const std::string& key, std::optional<double> fallback) {
    if (!has(key)) {
        used_.insert(key);
        if (!fallback) fail(key, "missing field");
        return *fallback;
    }
    const auto& v = lookup(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
}

long Reader::integer(const std::string& key, std::optional<long> fallback) {
    if (!has(key)) {
        used_.insert(key);
        if (!fallback) fail(key, "missing field");
        return *fallback;
    }
    const auto& v = lookup(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
}

std::uint64_t Reader::unsigned_integer(const std::string& key, std::optional<std::uint64_t> fallback) {
    if (!has(key)) {
        used_.insert(key);
        if (!fallback) fail(key, "missing field");
        return *fallback;
    }
    const auto& v = lookup(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool Reader::boolean(const std::string& key, std::optional<bool> fallback) {
    if (!has(key)) {
        used_.insert(key);
        if (!fallback) fail(key, "missing field");
        return *fallback;
    }
    const auto& v = lookup(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
}

std::string Reader::string(const std::string& key, std::optional<std::string> fallback) {
    if (!has(key)) {
        used_.insert(key);
        if (!fallback) fail(key, "missing field");
        return *fallback;
    }
    const auto& v = lookup(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> Reader::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
    if (!has(key)) {
        used_.insert(key);
        if (!fallback) fail(key, "missing field");
        return *fallback;
    }
    const auto& v = lookup(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

void Reader::finish() const {
    for (const auto& [key, value] : j_.items())
        if (!used_.count(key)) throw InputError(path_ + "." + key + ": unknown field");
}

std::string config_hash(const nlohmann::json& j) {
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig read_run_config(const std::string& command, nlohmann::json j, std::optional<std::uint64_t> seed,
                          std::optional<std::size_t> threads, std::optional<std::filesystem::path> out) {
    if (!j.is_object()) throw InputError("config: expected a JSON object at the top level");
    if (seed) j["seed"] = *seed;
    if (threads) j["threads"] = *threads;
    if (out) j["output_dir"] = out->string();
    Reader r(j, "config");
    const long version = r.integer("version");
    if (version != config_version)
        r.fail("version", "unsupported version " + std::to_string(version) + " (expected " +
                              std::to_string(config_version) + ")");
    RunConfig run;
    run.command = command;
    run.seed = r.unsigned_integer("seed", 0);
    const long t = r.integer("threads", 1);
    if (t < 1) r.fail("threads", "must be >= 1");
    run.threads = static_cast<std::size_t>(t);
    run.output_dir = r.string("output_dir", "out");
    j.erase("output_dir");  // the output location does not change results
    j.erase("threads");
    run.source = j;
    return run;
}

namespace {

void consume_common(Reader& r) {
    r.integer("version");
    r.unsigned_integer("seed", 0);
    r.integer("threads", 1);
    r.string("output_dir", "out");
}

Eigen::Index positive_index(Reader& r, const std::string& key, long fallback) {
    const long v = r.integer(key, fallback);
    if (v < 1) r.fail(key, "must be >= 1");
    return static_cast<Eigen::Index>(v);
}

SgdConfig read_sgd(Reader r, SgdConfig d) {
    d.steps = r.integer("steps", d.steps);
    d.batch_size = r.integer("batch_size", d.batch_size);
    d.learning_rate = r.number("learning_rate", d.learning_rate);
    d.momentum = r.number("momentum", d.momentum);
    d.regularizer_features = r.integer("regularizer_features", d.regularizer_features);
    d.exact_regularizer = r.boolean("exact_regularizer", d.exact_regularizer);
    d.polyak_averaging = r.boolean("polyak_averaging", d.polyak_averaging);
    d.checkpoint_every = r.integer("checkpoint_every", d.checkpoint_every);
    d.block_columns = r.integer("block_columns", d.block_columns);
    d.divergence_threshold = r.number("divergence_threshold", d.divergence_threshold);
    d.seed = r.unsigned_integer("seed", d.seed);
    r.finish();
    try {
        d.validate();
    } catch (const InputError& e) {
        throw InputError(r.path() + ": " + e.what());
    }
    return d;
}

SgdConfig optional_sgd(Reader& r, const std::string& key, SgdConfig d) {
    if (!r.has(key)) {
        r.number(key, 0.0);
        return d;
    }
    return read_sgd(r.child(key), d);
}

CgConfig read_cg(Reader& r, const std::string& key, CgConfig d) {
    if (!r.has(key)) {
        r.number(key, 0.0);
        return d;
    }
    Reader c = r.child(key);
    d.max_iters = c.integer("max_iters", d.max_iters);
    d.tolerance = c.number("tolerance", d.tolerance);
    d.preconditioner_rank = c.integer("preconditioner_rank", d.preconditioner_rank);
    c.finish();
    try {
        d.validate();
    } catch (const InputError& e) {
        throw InputError(c.path() + ": " + e.what());
    }
    return d;
}

GeneratorConfig read_generator(Reader g, std::uint64_t seed) {
    GeneratorConfig cfg;
    try {
        cfg.kind = generator_kind_from_string(g.string("kind"));
    } catch (const InputError& e) {
        g.fail("kind", e.what());
    }
    cfg.n = positive_index(g, "n", cfg.n);
    cfg.dim = positive_index(g, "dim", cfg.dim);
    cfg.low = g.number("low", cfg.low);
    cfg.high = g.number("high", cfg.high);
    cfg.spacing = g.number("spacing", cfg.spacing);
    cfg.noise_variance = g.number("noise_variance", cfg.noise_variance);
    cfg.prior_features = g.integer("prior_features", cfg.prior_features);
    cfg.seed = g.unsigned_integer("seed", seed);
    if (g.has("prior_kernel")) {
        cfg.prior_kernel = kernel_from_json(g.raw("prior_kernel"), g.path() + ".prior_kernel");
    } else {
        g.number("prior_kernel", 0.0);
        cfg.prior_kernel = KernelSpec::isotropic(KernelFamily::squared_exponential, cfg.dim, 1.0);
    }
    g.finish();
    try {
        cfg.validate();
    } catch (const InputError& e) {
        throw InputError(g.path() + ": " + e.what());
    }
    return cfg;
}

DataConfig read_data(Reader d, std::uint64_t seed) {
    DataConfig cfg;
    const bool has_path = d.has("path"), has_gen = d.has("generator");
    if (has_path == has_gen) d.fail("path", "exactly one of 'path' and 'generator' is required");
    if (has_path) {
        cfg.path = d.string("path");
        d.number("generator", 0.0);
        if (d.has("target")) {
            const auto& t = d.raw("target");
            if (t.is_string()) cfg.target = t.get<std::string>();
            else if (t.is_number_unsigned()) cfg.target = t.get<std::size_t>();
            else d.fail("target", "expected a column name or a non-negative index");
        } else {
            d.string("target", "y");
        }
    } else {
        d.string("path", "");
        d.string("target", "y");
        cfg.generator = read_generator(d.child("generator"), seed);
    }
    cfg.standardize = d.boolean("standardize", cfg.standardize);
    cfg.train_fraction = d.number("train_fraction", cfg.train_fraction);
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0)) d.fail("train_fraction", "must lie in (0, 1]");
    cfg.split_seed = d.unsigned_integer("split_seed", seed);
    d.finish();
    return cfg;
}

ModelConfig read_model(Reader& r, std::uint64_t seed) {
    ModelConfig m;
    const bool has_kernel = r.has("kernel"), has_hyp = r.has("hyperparameters");
    if (has_kernel == has_hyp) r.fail("kernel", "exactly one of 'kernel' and 'hyperparameters' is required");
    if (has_kernel) {
        m.kernel = kernel_from_json(r.raw("kernel"), r.path() + ".kernel");
        r.number("hyperparameters", 0.0);
        return m;
    }
    r.number("kernel", 0.0);
    Reader h = r.child("hyperparameters");
    HyperparameterConfig hc;
    hc.centroids = positive_index(h, "centroids", hc.centroids);
    hc.subset_size = positive_index(h, "subset_size", hc.subset_size);
    try {
        hc.search.family = kernel_family_from_string(h.string("family", "squared_exponential"));
    } catch (const InputError& e) {
        h.fail("family", e.what());
    }
    hc.search.lengthscale_min = h.number("lengthscale_min", hc.search.lengthscale_min);
    hc.search.lengthscale_max = h.number("lengthscale_max", hc.search.lengthscale_max);
    hc.search.signal_min = h.number("signal_min", hc.search.signal_min);
    hc.search.signal_max = h.number("signal_max", hc.search.signal_max);
    hc.search.noise_min = h.number("noise_min", hc.search.noise_min);
    hc.search.noise_max = h.number("noise_max", hc.search.noise_max);
    hc.search.sweeps = static_cast<int>(positive_index(h, "sweeps", hc.search.sweeps));
    hc.search.iterations = static_cast<int>(positive_index(h, "iterations", hc.search.iterations));
    hc.search.grid = static_cast<int>(h.integer("grid", hc.search.grid));
    if (hc.search.grid < 0) h.fail("grid", "must be >= 0");
    hc.search.seed = h.unsigned_integer("seed", seed);
    h.finish();
    m.hyperparameters = hc;
    return m;
}

InducingConfig read_inducing(Reader& r) {
    InducingConfig ic;
    if (!r.has("inducing")) {
        r.number("inducing", 0.0);
        return ic;
    }
    Reader c = r.child("inducing");
    if (c.has("lengthscale")) ic.lengthscale = c.number("lengthscale");
    else c.number("lengthscale", 0.0);
    ic.neighbors = static_cast<std::size_t>(positive_index(c, "neighbors", static_cast<long>(ic.neighbors)));
    if (c.has("count")) ic.count = positive_index(c, "count", 1);
    else c.number("count", 0.0);
    c.finish();
    return ic;
}

SgdConfig mean_defaults(std::uint64_t seed) {
    SgdConfig s;
    s.learning_rate = 0.5;
    s.seed = derive_seed(seed, 31);
    return s;
}

SgdConfig sample_defaults(std::uint64_t seed) {
    SgdConfig s;
    s.learning_rate = 0.1;
    s.seed = derive_seed(seed, 32);
    return s;
}

std::vector<std::string> read_strings(Reader& r, const std::string& key, std::vector<std::string> fallback,
                                      const std::set<std::string>& allowed) {
    if (!r.has(key)) {
        r.number(key, 0.0);
        return fallback;
    }
    const auto& v = r.raw(key);
    if (!v.is_array() || v.empty()) r.fail(key, "expected a non-empty array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) r.fail(key + "[" + std::to_string(i) + "]", "expected a string");
        const auto s = v[i].get<std::string>();
        if (!allowed.count(s)) r.fail(key + "[" + std::to_string(i) + "]", "unknown value '" + s + "'");
        out.push_back(s);
    }
    return out;
}

}  // namespace

FitConfig parse_fit(const nlohmann::json& j, const RunConfig& run, bool sample_command) {
    Reader r(j, "config");
    consume_common(r);
    FitConfig cfg;
    cfg.data = read_data(r.child("data"), run.seed);
    cfg.model = read_model(r, run.seed);
    cfg.method = r.string("method", "sgd");
    if (cfg.method != "sgd" && cfg.method != "sgd-inducing" && cfg.method != "cg" && cfg.method != "exact")
        r.fail("method", "unknown method '" + cfg.method + "' (expected sgd, sgd-inducing, cg or exact)");
    cfg.samples = r.integer("samples", sample_command ? 64 : 0);
    if (cfg.samples < 0 || (sample_command && cfg.samples < 2)) r.fail("samples", sample_command ? "must be >= 2" : "must be >= 0");
    cfg.prior_features = r.integer("prior_features", cfg.prior_features);
    if (cfg.prior_features < 2 || cfg.prior_features % 2) r.fail("prior_features", "must be even and >= 2");
    cfg.sgd = optional_sgd(r, "sgd", mean_defaults(run.seed));
    cfg.sample_sgd = optional_sgd(r, "sample_sgd", sample_defaults(run.seed));
    cfg.cg = read_cg(r, "cg", CgConfig{});
    cfg.inducing = read_inducing(r);
    cfg.exact_cap = positive_index(r, "exact_cap", cfg.exact_cap);
    if (sample_command) {
        static const nlohmann::json empty = nlohmann::json::object();
        const bool given = r.has("queries");
        Reader q = given ? r.child("queries") : Reader(empty, "config.queries");
        if (!given) r.number("queries", 0.0);
        if (q.has("low")) cfg.query_low = q.number("low");
        else q.number("low", 0.0);
        if (q.has("high")) cfg.query_high = q.number("high");
        else q.number("high", 0.0);
        cfg.query_count = positive_index(q, "count", cfg.query_count);
        q.finish();
    }
    r.finish();
    return cfg;
}

DiagnoseConfig parse_diagnose(const nlohmann::json& j, const RunConfig& run) {
    Reader r(j, "config");
    consume_common(r);
    DiagnoseConfig cfg;
    cfg.data = read_data(r.child("data"), run.seed);
    cfg.model = read_model(r, run.seed);
    cfg.sgd = optional_sgd(r, "sgd", mean_defaults(run.seed));
    cfg.sample_sgd = optional_sgd(r, "sample_sgd", sample_defaults(run.seed));
    cfg.samples = r.integer("samples", cfg.samples);
    if (cfg.samples < 2) r.fail("samples", "must be >= 2");
    cfg.prior_features = r.integer("prior_features", cfg.prior_features);
    if (cfg.prior_features < 2 || cfg.prior_features % 2) r.fail("prior_features", "must be even and >= 2");
    cfg.inject_exact = r.boolean("inject_exact", cfg.inject_exact);
    cfg.reference = r.string("reference", cfg.reference);
    if (cfg.reference != "paired" && cfg.reference != "closed_form")
        r.fail("reference", "expected 'paired' or 'closed_form'");
    if (r.has("queries")) {
        Reader q = r.child("queries");
        cfg.query_low = q.number("low", cfg.query_low);
        cfg.query_high = q.number("high", cfg.query_high);
        cfg.query_count = positive_index(q, "count", cfg.query_count);
        q.finish();
    } else {
        r.number("queries", 0.0);
    }
    if (r.has("bound")) {
        Reader b = r.child("bound");
        cfg.bound_steps = positive_index(b, "steps", cfg.bound_steps);
        cfg.bound_rate_fraction = b.number("rate_fraction", cfg.bound_rate_fraction);
        if (!(cfg.bound_rate_fraction > 0.0 && cfg.bound_rate_fraction < 1.0)) b.fail("rate_fraction", "must lie in (0, 1)");
        cfg.bound_noise = b.number("noise_scale", cfg.bound_noise);
        if (!(cfg.bound_noise >= 0.0)) b.fail("noise_scale", "must be >= 0");
        cfg.bound_delta = b.number("delta", cfg.bound_delta);
        if (!(cfg.bound_delta > 0.0 && cfg.bound_delta < 1.0)) b.fail("delta", "must lie in (0, 1)");
        b.finish();
    } else {
        r.number("bound", 0.0);
    }
    cfg.exact_cap = positive_index(r, "exact_cap", cfg.exact_cap);
    r.finish();
    return cfg;
}

BenchmarkConfig parse_benchmark(const nlohmann::json& j, const RunConfig& run) {
    Reader r(j, "config");
    consume_common(r);
    BenchmarkConfig cfg;
    const auto& ds = r.raw("datasets");
    if (!ds.is_array() || ds.empty()) r.fail("datasets", "expected a non-empty array");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Reader d(ds[i], "config.datasets[" + std::to_string(i) + "]");
        BenchmarkDataset b;
        b.name = d.string("name", "dataset" + std::to_string(i));
        b.data = read_data(d.child("data"), run.seed);
        b.model = read_model(d, run.seed);
        d.finish();
        cfg.datasets.push_back(std::move(b));
    }
    cfg.methods = read_strings(r, "methods", cfg.methods, {"sgd", "sgd-inducing", "cg", "exact"});
    cfg.regimes = read_strings(r, "regimes", cfg.regimes, {"tuned", "low"});
    cfg.low_noise = r.number("low_noise", cfg.low_noise);
    if (!(cfg.low_noise > 0.0)) r.fail("low_noise", "must be positive");
    cfg.samples = r.integer("samples", cfg.samples);
    if (cfg.samples < 2) r.fail("samples", "must be >= 2");
    cfg.prior_features = r.integer("prior_features", cfg.prior_features);
    if (cfg.prior_features < 2 || cfg.prior_features % 2) r.fail("prior_features", "must be even and >= 2");
    cfg.sgd = optional_sgd(r, "sgd", mean_defaults(run.seed));
    cfg.sample_sgd = optional_sgd(r, "sample_sgd", sample_defaults(run.seed));
    cfg.cg = read_cg(r, "cg", CgConfig{});
    cfg.inducing = read_inducing(r);
    cfg.exact_cap = positive_index(r, "exact_cap", cfg.exact_cap);
    r.finish();
    return cfg;
}

ThompsonRunConfig parse_thompson(const nlohmann::json& j, const RunConfig& run) {
    Reader r(j, "config");
    consume_common(r);
    ThompsonRunConfig cfg;
    ThompsonConfig& t = cfg.base;
    t.seed = run.seed;
    t.threads = run.threads;
    t.dim = positive_index(r, "dim", t.dim);
    try {
        t.family = kernel_family_from_string(r.string("family", to_string(t.family)));
    } catch (const InputError& e) {
        r.fail("family", e.what());
    }
    t.lengthscale = r.number("lengthscale", t.lengthscale);
    t.signal_variance = r.number("signal_variance", t.signal_variance);
    t.observation_noise = r.number("observation_noise", t.observation_noise);
    t.model_noise = r.number("model_noise", t.model_noise);
    t.target_features = r.integer("target_features", t.target_features);
    t.sample_features = r.integer("sample_features", t.sample_features);
    t.initial_points = positive_index(r, "initial_points", t.initial_points);
    t.batch_size = positive_index(r, "batch_size", t.batch_size);
    t.steps = static_cast<int>(positive_index(r, "steps", t.steps));
    t.uniform_fraction = r.number("uniform_fraction", t.uniform_fraction);
    t.exploit_fraction = r.number("exploit_fraction", 1.0 - t.uniform_fraction);
    t.candidates_per_round = positive_index(r, "candidates_per_round", t.candidates_per_round);
    t.rounds = static_cast<int>(positive_index(r, "rounds", t.rounds));
    t.top_k = positive_index(r, "top_k", t.top_k);
    t.ascent_steps = static_cast<int>(r.integer("ascent_steps", t.ascent_steps));
    t.ascent_rate = r.number("ascent_rate", t.ascent_rate);
    try {
        t.backend = thompson_backend_from_string(r.string("backend", to_string(t.backend)));
    } catch (const InputError& e) {
        r.fail("backend", e.what());
    }
    t.sgd_mean = optional_sgd(r, "sgd", t.sgd_mean);
    t.sgd_samples = optional_sgd(r, "sample_sgd", t.sgd_samples);
    t.cg = read_cg(r, "cg", t.cg);
    t.warm_start = r.boolean("warm_start", t.warm_start);
    cfg.lengthscales = r.numbers("lengthscales", std::vector<double>{});
    if (r.has("seeds")) {
        const auto& s = r.raw("seeds");
        if (!s.is_array()) r.fail("seeds", "expected an array of non-negative integers");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i].is_number_integer() || (!s[i].is_number_unsigned() && s[i].get<long long>() < 0))
                r.fail("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
            cfg.seeds.push_back(s[i].get<std::uint64_t>());
        }
    } else {
        r.number("seeds", 0.0);
    }
    cfg.baseline = r.boolean("baseline", cfg.baseline);
    r.finish();
    try {
        t.validate();
    } catch (const InputError& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

GenDataConfig parse_gen_data(const nlohmann::json& j, const RunConfig& run) {
    Reader r(j, "config");
    consume_common(r);
    GenDataConfig cfg;
    cfg.generator = read_generator(r.child("generator"), run.seed);
    cfg.file = r.string("file", cfg.file);
    r.finish();
    return cfg;
}

}  // namespace sgdgp::cli
