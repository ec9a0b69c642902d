#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace sgdgp::cli {

struct CommandOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::string> output_dir;
};

/// Runs one subcommand on a parsed config; throws InputError / NumericalError.
void run_command(const std::string& command, const nlohmann::json& config, const CommandOptions& options);

/// Maps exceptions to exit codes: 0 success, 2 config or input error, 3 numerical failure.
int run_command_main(const std::string& command, const std::string& config_path, const CommandOptions& options);

}  // namespace sgdgp::cli
