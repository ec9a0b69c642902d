#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "sgdgp/dataset.hpp"
#include "sgdgp/random.hpp"

namespace test {

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double low, double high,
                                      sgdgp::Rng& rng) {
    std::uniform_real_distribution<double> u(low, high);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = u(rng);
    return out;
}

inline sgdgp::Dataset random_problem(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double width = 3.0) {
    sgdgp::Rng rng = sgdgp::make_rng(seed);
    Eigen::MatrixXd x = uniform_matrix(n, d, -width, width, rng);
    Eigen::VectorXd y = x.rowwise().sum().array().sin().matrix() + 0.1 * sgdgp::standard_normal_vector(n, rng);
    return sgdgp::Dataset(std::move(x), std::move(y));
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("sgdgp_unit_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace test
