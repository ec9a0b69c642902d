#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace sgdgp {

/// Regression data: one row of `inputs` per target. Immutable once built.
class Dataset {
public:
    Dataset() = default;

    /// Throws InputError on a row/target count mismatch or any non-finite entry.
    Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
            std::vector<std::string> feature_names = {});

    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    Eigen::Index size() const { return targets_.size(); }
    Eigen::Index dim() const { return inputs_.cols(); }
    bool empty() const { return size() == 0; }

    Dataset subset(const std::vector<Eigen::Index>& rows) const;

private:
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd targets_;
    std::vector<std::string> feature_names_;
};

/// Per-column affine maps to zero mean / unit population variance.
struct Standardizer {
    Eigen::VectorXd input_mean;
    Eigen::VectorXd input_scale;
    double target_mean = 0.0;
    double target_scale = 1.0;

    Eigen::MatrixXd transform_inputs(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd transform_targets(const Eigen::VectorXd& y) const;
    Dataset transform(const Dataset& data) const;

    Eigen::MatrixXd inverse_inputs(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd inverse_targets(const Eigen::VectorXd& y) const;
    Dataset inverse(const Dataset& data) const;
};

struct SplitSpec {
    double train_fraction = 0.9;
    std::uint64_t seed = 0;
};

/// Target column selector for load_csv: a header name or a zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

/// Reads a comma-separated file with a header row and '.' decimals.
Dataset load_csv(const std::filesystem::path& path, const ColumnRef& target_column);

/// Writes inputs then the target as the last column (header `target_name`), full precision.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& target_name = "y");

/// Population-variance standardisation; constant columns keep scale 1.
std::pair<Dataset, Standardizer> standardize(const Dataset& data);

/// Seeded shuffle split; the train part has round(fraction * N) rows.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

/// Index form of split, returns (train rows, test rows).
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n,
                                                                            const SplitSpec& spec);

/// Point-elimination inducing selection. Points are scanned in dataset order; for each
/// surviving point the `neighbors` nearest surviving points (itself included) closer than
/// `lengthscale` are selected. When more than one is selected the scanned point is
/// eliminated, the other selected points are protected, and every unprotected point that
/// lies strictly within `lengthscale` of the scanned point and of all selected points is
/// eliminated too. Returns surviving row indices in ascending order.
std::vector<Eigen::Index> knn_inducing_select(const Dataset& data, double lengthscale,
                                              std::size_t neighbors);

}  // namespace sgdgp
