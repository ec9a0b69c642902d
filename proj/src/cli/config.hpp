#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdgp/cg.hpp"
#include "sgdgp/dataset.hpp"
#include "sgdgp/hyperparameters.hpp"
#include "sgdgp/kernel.hpp"
#include "sgdgp/sgd.hpp"
#include "sgdgp/synthetic.hpp"
#include "sgdgp/thompson.hpp"

namespace sgdgp::cli {

inline constexpr int config_version = 1;

/// Strict view of a JSON object: every key must be consumed before finish().
class Reader {
public:
    Reader(const nlohmann::json& j, std::string path);

    const std::string& path() const { return path_; }
    bool has(const std::string& key) const;
    Reader child(const std::string& key);
    const nlohmann::json& raw(const std::string& key);

    double number(const std::string& key, std::optional<double> fallback = std::nullopt);
    long integer(const std::string& key, std::optional<long> fallback = std::nullopt);
    std::uint64_t unsigned_integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
    bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);

    /// Throws InputError naming the first unknown key.
    void finish() const;
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const nlohmann::json& lookup(const std::string& key);

    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> used_;
};

struct DataConfig {
    std::optional<std::filesystem::path> path;
    ColumnRef target = std::string("y");
    std::optional<GeneratorConfig> generator;
    bool standardize = false;
    double train_fraction = 0.9;  // 1 keeps every row for training and testing
    std::uint64_t split_seed = 0;
};

struct HyperparameterConfig {
    Eigen::Index centroids = 5;
    Eigen::Index subset_size = 500;
    HyperparameterSearch search;
};

struct ModelConfig {
    std::optional<KernelSpec> kernel;
    std::optional<HyperparameterConfig> hyperparameters;
};

struct InducingConfig {
    std::optional<double> lengthscale;  // defaults to the kernel's smallest lengthscale
    std::size_t neighbors = 2;
    std::optional<Eigen::Index> count;  // evenly spaced subset of the data instead of KNN selection
};

struct FitConfig {
    DataConfig data;
    ModelConfig model;
    std::string method = "sgd";
    Eigen::Index samples = 0;
    Eigen::Index prior_features = 2000;
    SgdConfig sgd;
    SgdConfig sample_sgd;
    CgConfig cg;
    InducingConfig inducing;
    Eigen::Index exact_cap = 4096;
    // Prediction grid for the sample command (one-dimensional data only).
    std::optional<double> query_low, query_high;
    Eigen::Index query_count = 200;
};

struct DiagnoseConfig {
    DataConfig data;
    ModelConfig model;
    SgdConfig sgd;
    SgdConfig sample_sgd;
    Eigen::Index samples = 64;
    Eigen::Index prior_features = 2000;
    bool inject_exact = false;
    std::string reference = "paired";  // "paired" or "closed_form"
    double query_low = -5.0, query_high = 5.0;
    Eigen::Index query_count = 200;
    // Noisy gradient descent in the setting of the convergence bound.
    long bound_steps = 10000;
    double bound_rate_fraction = 0.5;
    double bound_noise = 1.0;
    double bound_delta = 0.1;
    Eigen::Index exact_cap = 4096;
};

struct BenchmarkDataset {
    std::string name;
    DataConfig data;
    ModelConfig model;
};

struct BenchmarkConfig {
    std::vector<BenchmarkDataset> datasets;
    std::vector<std::string> methods{"sgd", "cg", "exact"};
    std::vector<std::string> regimes{"tuned", "low"};
    double low_noise = 1e-6;
    Eigen::Index samples = 16;
    Eigen::Index prior_features = 2000;
    SgdConfig sgd;
    SgdConfig sample_sgd;
    CgConfig cg;
    InducingConfig inducing;
    Eigen::Index exact_cap = 4096;
};

struct ThompsonRunConfig {
    ThompsonConfig base;
    std::vector<double> lengthscales;  // empty: the base lengthscale only
    std::vector<std::uint64_t> seeds;  // empty: the base seed only
    bool baseline = false;             // also run equal-budget random search
};

struct GenDataConfig {
    GeneratorConfig generator;
    std::string file = "data.csv";
};

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::filesystem::path output_dir = "out";
    nlohmann::json source;  // the config after overrides, for hashing
};

/// FNV-1a 64-bit hash of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// Applies --seed/--threads/--out overrides and reads the common keys.
RunConfig read_run_config(const std::string& command, nlohmann::json j, std::optional<std::uint64_t> seed,
                          std::optional<std::size_t> threads, std::optional<std::filesystem::path> out);

FitConfig parse_fit(const nlohmann::json& j, const RunConfig& run, bool sample_command);
DiagnoseConfig parse_diagnose(const nlohmann::json& j, const RunConfig& run);
BenchmarkConfig parse_benchmark(const nlohmann::json& j, const RunConfig& run);
ThompsonRunConfig parse_thompson(const nlohmann::json& j, const RunConfig& run);
GenDataConfig parse_gen_data(const nlohmann::json& j, const RunConfig& run);

}  // namespace sgdgp::cli
