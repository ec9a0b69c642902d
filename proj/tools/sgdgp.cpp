#include <CLI11.hpp>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process inference by stochastic gradient descent"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    sgdgp::cli::CommandOptions options;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"fit", "fit mean (and optional sample) representer weights"},
        {"sample", "fit and draw posterior function samples on a query grid"},
        {"diagnose", "spectral error diagnostics against the exact posterior"},
        {"benchmark", "compare methods across datasets and noise regimes"},
        {"thompson", "parallel Thompson sampling benchmark"},
        {"gen-data", "write a synthetic dataset"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out")) options.output_dir = out;
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--threads")) options.threads = threads;
    return sgdgp::cli::run_command_main(sub->get_name(), config, options);
}
