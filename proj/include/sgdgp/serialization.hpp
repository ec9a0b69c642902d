#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sgdgp/kernel.hpp"

namespace sgdgp {

nlohmann::json kernel_to_json(const KernelSpec& spec);
/// Strict: rejects unknown keys and missing fields, naming the offending path.
KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& path = "kernel");

/// Weight checkpoint: header (format, anchors, columns, seed) plus column-major values.
struct WeightCheckpoint {
    Eigen::MatrixXd weights;
    std::uint64_t seed = 0;
    std::string kind;  // "mean" or "samples"
};
void save_weights(const WeightCheckpoint& checkpoint, const std::filesystem::path& path);
WeightCheckpoint load_weights(const std::filesystem::path& path);

/// Writes a header row and rows of full-precision values.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& values);

/// Writes JSON with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace sgdgp
