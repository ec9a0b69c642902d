#pragma once

#include <cstdint>
#include <string>

#include "sgdgp/dataset.hpp"
#include "sgdgp/kernel.hpp"

namespace sgdgp {

/// sin(2x) + cos(5x).
double toy_function(double x);

enum class GeneratorKind {
    uniform,   // x ~ U(low, high), toy targets
    infill,    // x ~ N(0, 1), toy targets
    grid,      // n evenly spaced points with the given spacing, centred at 0, toy targets
    gp_prior,  // x ~ U(low, high)^d, targets from a random-feature prior draw
};
std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

struct GeneratorConfig {
    GeneratorKind kind = GeneratorKind::uniform;
    Eigen::Index n = 1000;
    Eigen::Index dim = 1;  // gp_prior only; the toy generators are one-dimensional
    double low = -3.0;
    double high = 3.0;
    double spacing = 0.01;
    double noise_variance = 0.5;
    KernelSpec prior_kernel;  // gp_prior only
    Eigen::Index prior_features = 2000;
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset generate(const GeneratorConfig& config);

}  // namespace sgdgp
