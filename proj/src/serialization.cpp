#include "sgdgp/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <set>

#include "sgdgp/error.hpp"

namespace sgdgp {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& path) {
    if (!j.is_object()) throw InputError(path + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw InputError(path + "." + key + ": unknown field");
}

double positive_number(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw InputError(path + "." + key + ": missing field");
    const auto& v = j.at(key);
    if (!v.is_number()) throw InputError(path + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!(d > 0.0)) throw InputError(path + "." + key + ": must be positive");
    return d;
}

}  // namespace

nlohmann::json kernel_to_json(const KernelSpec& spec) {
    nlohmann::json j;
    j["family"] = to_string(spec.family);
    j["signal_variance"] = spec.signal_variance;
    j["noise_variance"] = spec.noise_variance;
    j["lengthscales"] = std::vector<double>(spec.lengthscales.data(), spec.lengthscales.data() + spec.lengthscales.size());
    return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& path) {
    reject_unknown(j, {"family", "signal_variance", "noise_variance", "lengthscales"}, path);
    KernelSpec spec;
    if (!j.contains("family") || !j.at("family").is_string()) throw InputError(path + ".family: expected a string");
    try {
        spec.family = kernel_family_from_string(j.at("family").get<std::string>());
    } catch (const InputError& e) {
        throw InputError(path + ".family: " + e.what());
    }
    spec.signal_variance = positive_number(j, "signal_variance", path);
    spec.noise_variance = positive_number(j, "noise_variance", path);
    if (!j.contains("lengthscales")) throw InputError(path + ".lengthscales: missing field");
    const auto& ls = j.at("lengthscales");
    if (ls.is_number()) {
        spec.lengthscales = Eigen::VectorXd::Constant(1, ls.get<double>());
    } else if (ls.is_array() && !ls.empty()) {
        spec.lengthscales.resize(static_cast<Eigen::Index>(ls.size()));
        for (std::size_t i = 0; i < ls.size(); ++i) {
            if (!ls[i].is_number()) throw InputError(path + ".lengthscales[" + std::to_string(i) + "]: expected a number");
            spec.lengthscales[static_cast<Eigen::Index>(i)] = ls[i].get<double>();
        }
    } else {
        throw InputError(path + ".lengthscales: expected a number or a non-empty array");
    }
    try {
        spec.validate();
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
    return spec;
}

void save_weights(const WeightCheckpoint& checkpoint, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "sgdgp-weights";
    j["version"] = 1;
    j["kind"] = checkpoint.kind;
    j["anchors"] = checkpoint.weights.rows();
    j["columns"] = checkpoint.weights.cols();
    j["seed"] = checkpoint.seed;
    j["values"] = std::vector<double>(checkpoint.weights.data(), checkpoint.weights.data() + checkpoint.weights.size());
    write_json(path, j);
}

WeightCheckpoint load_weights(const std::filesystem::path& path) {
    const nlohmann::json j = read_json(path);
    try {
        if (j.at("format") != "sgdgp-weights") throw InputError("not a weight checkpoint");
        WeightCheckpoint out;
        out.kind = j.at("kind").get<std::string>();
        out.seed = j.at("seed").get<std::uint64_t>();
        const auto rows = j.at("anchors").get<Eigen::Index>();
        const auto cols = j.at("columns").get<Eigen::Index>();
        const auto values = j.at("values").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != rows * cols) throw InputError("value count does not match header");
        out.weights = Eigen::Map<const Eigen::MatrixXd>(values.data(), rows, cols);
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": malformed weight checkpoint: " + e.what());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(columns.size()) != values.cols())
        throw InputError("table: column names do not match the value matrix");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << values(i, c);
        out << '\n';
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace sgdgp
