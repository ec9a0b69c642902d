#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"
#include "helpers.hpp"
#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"
#include "sgdgp/pathwise.hpp"
#include "sgdgp/serialization.hpp"
#include "sgdgp/synthetic.hpp"

using namespace sgdgp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

void run(const std::string& command, const json& config, const fs::path& out) {
    cli::CommandOptions options;
    options.output_dir = out.string();
    cli::run_command(command, config, options);
}

const json toy_kernel = {{"family", "squared_exponential"}, {"signal_variance", 1.0}, {"lengthscales", {0.5}},
                         {"noise_variance", 0.1}};

json toy_data(int n, double fraction) {
    return {{"generator", {{"kind", "uniform"}, {"n", n}, {"noise_variance", 0.1}}}, {"train_fraction", fraction}};
}

json fit_config() {
    return {{"version", 1},
            {"seed", 140},
            {"data", {{"generator", {{"kind", "uniform"}, {"n", 1000}, {"noise_variance", 0.5}}}, {"train_fraction", 0.9}}},
            {"kernel", toy_kernel},
            {"samples", 4},
            {"sgd", {{"steps", 300}, {"batch_size", 128}, {"checkpoint_every", 100}}},
            {"sample_sgd", {{"steps", 300}, {"batch_size", 128}}}};
}

}  // namespace

TEST_CASE("fit runs end to end, emits its files and is reproducible") {
    test::TempDir dir("cli_fit");
    run("fit", fit_config(), dir.path() / "a");
    run("fit", fit_config(), dir.path() / "b");
    for (const char* f : {"kernel.json", "mean_weights.json", "sample_weights.json", "trace_mean.csv", "trace_samples.csv",
                          "metrics.json", "metadata.json"})
        CHECK_MESSAGE(fs::exists(dir.path() / "a" / f), f);
    CHECK(slurp(dir.path() / "a" / "metrics.json") == slurp(dir.path() / "b" / "metrics.json"));
    const json m = read_json(dir.path() / "a" / "metrics.json");
    CHECK(m["rmse"].get<double>() < 1.0);
    CHECK(m["train_size"] == 900);
    const WeightCheckpoint w = load_weights(dir.path() / "a" / "sample_weights.json");
    CHECK(w.weights.rows() == 900);
    CHECK(w.weights.cols() == 4);
}

TEST_CASE("fit with the other inference methods") {
    test::TempDir dir("cli_methods");
    for (const char* method : {"exact", "cg", "sgd-inducing"}) {
        json cfg = fit_config();
        cfg["method"] = method;
        cfg["cg"] = {{"max_iters", 50}, {"tolerance", 1e-6}};
        cfg["inducing"] = {{"count", 100}};
        run("fit", cfg, dir.path() / method);
        const json m = read_json(dir.path() / method / "metrics.json");
        CHECK_MESSAGE(m["rmse"].get<double>() < 1.0, method);
    }
    CHECK(fs::exists(dir.path() / "cg" / "cg_residuals.csv"));
}

TEST_CASE("missing dataset path is a config error naming the field") {
    test::TempDir dir("cli_missing");
    json cfg = fit_config();
    cfg["data"] = {{"path", (dir.path() / "absent.csv").string()}};
    try {
        run("fit", cfg, dir.path() / "out");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("data.path") != std::string::npos);
    }
    const fs::path config_file = dir.path() / "c.json";
    std::ofstream(config_file) << cfg.dump();
    cli::CommandOptions options;
    options.output_dir = (dir.path() / "out").string();
    CHECK(cli::run_command_main("fit", config_file.string(), options) == 2);

    cfg = fit_config();
    cfg["data"].erase("generator");
    std::ofstream(config_file) << cfg.dump();
    CHECK(cli::run_command_main("fit", config_file.string(), options) == 2);
    cfg = fit_config();
    cfg["unexpected"] = 1;
    std::ofstream(config_file) << cfg.dump();
    CHECK(cli::run_command_main("fit", config_file.string(), options) == 2);
}

TEST_CASE("fit reads a CSV dataset") {
    test::TempDir dir("cli_csv");
    GeneratorConfig gen;
    gen.n = 200;
    gen.seed = 141;
    save_csv(generate(gen), dir.path() / "toy.csv");
    json cfg = fit_config();
    cfg["data"] = {{"path", (dir.path() / "toy.csv").string()}, {"target", "y"}, {"standardize", true}};
    cfg["method"] = "exact";
    run("fit", cfg, dir.path() / "out");
    CHECK(read_json(dir.path() / "out" / "metrics.json")["train_size"] == 180);
}

TEST_CASE("sample writes a prediction grid") {
    test::TempDir dir("cli_sample");
    json cfg = fit_config();
    cfg["data"] = toy_data(300, 1.0);
    cfg["queries"] = {{"low", -4}, {"high", 4}, {"count", 41}};
    run("sample", cfg, dir.path());
    std::string header;
    const auto rows = read_numeric_csv(dir.path() / "predictions.csv", &header);
    CHECK(header == "x,mean,variance,sample_0,sample_1,sample_2,sample_3");
    REQUIRE(rows.size() == 41);
    CHECK(rows.front()[0] == doctest::Approx(-4.0));
    for (const auto& r : rows) CHECK(r[2] >= 0.0);
}

TEST_CASE("diagnose emits the W2 profile, spectral table and bound check") {
    test::TempDir dir("cli_diagnose");
    const json cfg = {{"version", 1},
                      {"seed", 142},
                      {"data", toy_data(100, 1.0)},
                      {"kernel", toy_kernel},
                      {"samples", 8},
                      {"sgd", {{"steps", 300}, {"batch_size", 32}}},
                      {"sample_sgd", {{"steps", 300}, {"batch_size", 32}}},
                      {"queries", {{"low", -5}, {"high", 5}, {"count", 51}}},
                      {"bound", {{"steps", 2000}}}};
    run("diagnose", cfg, dir.path() / "sgd");
    std::string header;
    const auto w2 = read_numeric_csv(dir.path() / "sgd" / "w2.csv", &header);
    CHECK(header == "x,w2");
    CHECK(w2.size() == 51);
    const auto spectral = read_numeric_csv(dir.path() / "sgd" / "spectral.csv", &header);
    CHECK(header == "i,lambda,measured_error,bound,ratio");
    REQUIRE(spectral.size() == 100);
    int within = 0;
    for (const auto& r : spectral) within += r[3] >= r[2];
    CHECK(within >= 90);

    json injected = cfg;
    injected["inject_exact"] = true;
    run("diagnose", injected, dir.path() / "exact");
    const auto errors = read_numeric_csv(dir.path() / "exact" / "error_trace.csv", &header);
    CHECK(header == "step,time_s,euclidean_error,rkhs_error");
    for (const auto& r : errors) {
        CHECK(r[2] == 0.0);
        CHECK(r[3] == 0.0);
    }
}

TEST_CASE("benchmark exact rows equal the oracle and CG loses at low noise") {
    test::TempDir dir("cli_benchmark");
    const json data = {{"generator", {{"kind", "infill"}, {"n", 500}, {"noise_variance", 0.1}, {"seed", 143}}},
                       {"train_fraction", 0.8}};
    const json cfg = {{"version", 1},
                      {"seed", 144},
                      {"datasets", {{{"name", "infill"}, {"data", data}, {"kernel", toy_kernel}}}},
                      {"methods", {"sgd", "cg", "exact"}},
                      {"samples", 4},
                      {"sgd", {{"steps", 1000}, {"batch_size", 128}}},
                      {"sample_sgd", {{"steps", 300}, {"batch_size", 128}}},
                      {"cg", {{"max_iters", 20}, {"tolerance", 1e-8}}}};
    run("benchmark", cfg, dir.path() / "a");
    run("benchmark", cfg, dir.path() / "b");
    CHECK(slurp(dir.path() / "a" / "metrics.json") == slurp(dir.path() / "b" / "metrics.json"));

    GeneratorConfig gen;
    gen.kind = GeneratorKind::infill;
    gen.n = 500;
    gen.noise_variance = 0.1;
    gen.seed = 143;
    const auto [train, test_set] = split(generate(gen), SplitSpec{0.8, 144});
    const json rows = read_json(dir.path() / "a" / "metrics.json")["rows"];
    REQUIRE(rows.size() == 6);
    double sgd_low = 0, cg_low = 0;
    for (const auto& r : rows) {
        const double noise = r["noise_variance"].get<double>();
        if (r["method"] == "exact") {
            KernelSpec spec = KernelSpec::isotropic(KernelFamily::squared_exponential, 1, 0.5, 1.0, noise);
            const PredictiveMoments pm = posterior_moments(fit_exact(spec, train), test_set.inputs());
            const Metrics m = gaussian_metrics(pm.mean, pm.variance, test_set.targets(), noise);
            CHECK(r["rmse"].get<double>() == m.rmse);
            CHECK(r["nll"].get<double>() == m.mean_nll);
        }
        if (r["regime"] == "low" && r["method"] == "sgd") sgd_low = r["rmse"].get<double>();
        if (r["regime"] == "low" && r["method"] == "cg") cg_low = r["rmse"].get<double>();
    }
    CHECK(cg_low >= sgd_low);
}

TEST_CASE("thompson smoke run, random baseline and seed matrix") {
    test::TempDir dir("cli_thompson");
    const json base = {{"version", 1},        {"seed", 145},          {"initial_points", 40}, {"batch_size", 3},
                       {"steps", 2},          {"candidates_per_round", 100}, {"rounds", 2}, {"top_k", 1},
                       {"ascent_steps", 5},   {"sample_features", 200}, {"target_features", 200}};
    json single = base;
    single["baseline"] = true;
    run("thompson", single, dir.path() / "one");
    const auto trace = read_numeric_csv(dir.path() / "one" / "trace.csv");
    REQUIRE(trace.size() == 3);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i][1] >= trace[i - 1][1]);
    CHECK(fs::exists(dir.path() / "one" / "random_trace.csv"));

    json random = base;
    random["backend"] = "random";
    run("thompson", random, dir.path() / "random");
    CHECK(read_json(dir.path() / "random" / "metrics.json")["runs"][0]["evaluations"] == 46);

    json matrix = base;
    matrix["lengthscales"] = {0.2, 0.4};
    matrix["seeds"] = {1, 2, 3};
    run("thompson", matrix, dir.path() / "matrix");
    CHECK(read_json(dir.path() / "matrix" / "metrics.json")["runs"].size() == 6);
    const std::string table = slurp(dir.path() / "matrix" / "table.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 6 * 3);
}

TEST_CASE("gen-data writes a loadable CSV") {
    test::TempDir dir("cli_gen");
    const json cfg = {{"version", 1}, {"seed", 146}, {"generator", {{"kind", "grid"}, {"n", 21}, {"spacing", 0.1}}}};
    run("gen-data", cfg, dir.path());
    const Dataset d = load_csv(dir.path() / "data.csv", std::string("y"));
    CHECK(d.size() == 21);
    CHECK(read_json(dir.path() / "metadata.json")["command"] == "gen-data");
}
