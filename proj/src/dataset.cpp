#include "sgdgp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "sgdgp/error.hpp"
#include "sgdgp/random.hpp"

namespace sgdgp {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets, std::vector<std::string> feature_names)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), feature_names_(std::move(feature_names)) {
    if (inputs_.rows() != targets_.size())
        throw InputError("dataset: " + std::to_string(inputs_.rows()) + " input rows but " +
                         std::to_string(targets_.size()) + " targets");
    if (!feature_names_.empty() && static_cast<Eigen::Index>(feature_names_.size()) != inputs_.cols())
        throw InputError("dataset: feature name count does not match input dimension");
    if (!inputs_.allFinite() || !targets_.allFinite())
        throw InputError("dataset: non-finite entries are not allowed");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), dim());
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = inputs_.row(rows[r]);
        y[static_cast<Eigen::Index>(r)] = targets_[rows[r]];
    }
    return Dataset(std::move(x), std::move(y), feature_names_);
}

Dataset load_csv(const std::filesystem::path& path, const ColumnRef& target_column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open CSV file '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw InputError("CSV file '" + path.string() + "' is empty");
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);

    std::size_t target = 0;
    if (const auto* name = std::get_if<std::string>(&target_column)) {
        const auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) throw InputError("CSV file '" + path.string() + "' has no column '" + *name + "'");
        target = static_cast<std::size_t>(it - header.begin());
    } else {
        target = std::get<std::size_t>(target_column);
        if (target >= header.size())
            throw InputError("CSV file '" + path.string() + "' has no column index " + std::to_string(target));
    }

    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != target) names.push_back(header[c]);

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw InputError("CSV row " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " cells, found " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw InputError("CSV row " + std::to_string(line_no) + ", column '" + header[c] +
                                 "': cannot parse '" + cell + "' as a finite number");
            values.push_back(v);
        }
        ++rows;
    }

    const auto cols = static_cast<Eigen::Index>(header.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), cols - 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        Eigen::Index out = 0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double v = values[r * header.size() + static_cast<std::size_t>(c)];
            if (static_cast<std::size_t>(c) == target)
                y[static_cast<Eigen::Index>(r)] = v;
            else
                x(static_cast<Eigen::Index>(r), out++) = v;
        }
    }
    return Dataset(std::move(x), std::move(y), std::move(names));
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const std::string& target_name) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write CSV file '" + path.string() + "'");
    out.precision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
        if (!data.feature_names().empty())
            out << data.feature_names()[static_cast<std::size_t>(c)];
        else
            out << 'x' << c;
        out << ',';
    }
    out << target_name << '\n';
    for (Eigen::Index r = 0; r < data.size(); ++r) {
        for (Eigen::Index c = 0; c < data.dim(); ++c) out << data.inputs()(r, c) << ',';
        out << data.targets()[r] << '\n';
    }
}

Eigen::MatrixXd Standardizer::transform_inputs(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - input_mean.transpose()).array().rowwise() / input_scale.transpose().array();
}

Eigen::VectorXd Standardizer::transform_targets(const Eigen::VectorXd& y) const {
    return (y.array() - target_mean) / target_scale;
}

Dataset Standardizer::transform(const Dataset& data) const {
    return Dataset(transform_inputs(data.inputs()), transform_targets(data.targets()), data.feature_names());
}

Eigen::MatrixXd Standardizer::inverse_inputs(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = x.array().rowwise() * input_scale.transpose().array();
    return out.rowwise() + input_mean.transpose();
}

Eigen::VectorXd Standardizer::inverse_targets(const Eigen::VectorXd& y) const {
    return (y.array() * target_scale + target_mean).matrix();
}

Dataset Standardizer::inverse(const Dataset& data) const {
    return Dataset(inverse_inputs(data.inputs()), inverse_targets(data.targets()), data.feature_names());
}

std::pair<Dataset, Standardizer> standardize(const Dataset& data) {
    if (data.size() < 2) throw InputError("standardize: need at least 2 rows");
    const double n = static_cast<double>(data.size());
    auto scale_of = [n](const auto& column, double mean) {
        const double var = (column.array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        return sd > 0.0 ? sd : 1.0;
    };
    Standardizer s;
    s.input_mean = data.inputs().colwise().mean().transpose();
    s.input_scale.resize(data.dim());
    for (Eigen::Index c = 0; c < data.dim(); ++c) s.input_scale[c] = scale_of(data.inputs().col(c), s.input_mean[c]);
    s.target_mean = data.targets().mean();
    s.target_scale = scale_of(data.targets(), s.target_mean);
    return {s.transform(data), s};
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n,
                                                                            const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw InputError("split: train fraction must lie strictly between 0 and 1");
    if (n < 2) throw InputError("split: need at least 2 rows");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng = make_rng(spec.seed);
    // Fisher-Yates with an explicit draw so the permutation does not depend on the library's shuffle.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(order[i], order[pick(rng)]);
    }
    auto train_size = static_cast<Eigen::Index>(std::lround(spec.train_fraction * static_cast<double>(n)));
    train_size = std::clamp<Eigen::Index>(train_size, 1, n - 1);
    std::vector<Eigen::Index> train(order.begin(), order.begin() + train_size);
    std::vector<Eigen::Index> test(order.begin() + train_size, order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
    const auto [train, test] = split_indices(data.size(), spec);
    return {data.subset(train), data.subset(test)};
}

std::vector<Eigen::Index> knn_inducing_select(const Dataset& data, double lengthscale, std::size_t neighbors) {
    if (data.empty()) throw InputError("knn_inducing_select: empty dataset");
    if (!(lengthscale > 0.0)) throw InputError("knn_inducing_select: lengthscale must be positive");
    if (neighbors < 1) throw InputError("knn_inducing_select: neighbors must be at least 1");

    enum class State { open, kept, eliminated };
    const Eigen::Index n = data.size();
    const auto& x = data.inputs();
    const double radius2 = lengthscale * lengthscale;
    std::vector<State> state(static_cast<std::size_t>(n), State::open);
    auto dist2 = [&](Eigen::Index a, Eigen::Index b) { return (x.row(a) - x.row(b)).squaredNorm(); };

    std::vector<std::pair<double, Eigen::Index>> candidates;
    std::vector<Eigen::Index> selected;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (state[static_cast<std::size_t>(i)] != State::open) continue;

        candidates.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (state[static_cast<std::size_t>(j)] != State::eliminated) candidates.emplace_back(dist2(i, j), j);
        const std::size_t k = std::min(neighbors, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());

        selected.clear();
        bool self_selected = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (!(candidates[c].first < radius2)) break;
            if (candidates[c].second == i)
                self_selected = true;
            else
                selected.push_back(candidates[c].second);
        }
        const std::size_t count = selected.size() + (self_selected ? 1 : 0);
        if (count <= 1 || selected.empty()) continue;

        state[static_cast<std::size_t>(i)] = State::eliminated;
        for (Eigen::Index s : selected) state[static_cast<std::size_t>(s)] = State::kept;
        for (Eigen::Index p = 0; p < n; ++p) {
            if (state[static_cast<std::size_t>(p)] != State::open || !(dist2(p, i) < radius2)) continue;
            const bool near_all = std::all_of(selected.begin(), selected.end(),
                                              [&](Eigen::Index s) { return dist2(p, s) < radius2; });
            if (near_all) state[static_cast<std::size_t>(p)] = State::eliminated;
        }
    }

    std::vector<Eigen::Index> retained;
    for (Eigen::Index i = 0; i < n; ++i)
        if (state[static_cast<std::size_t>(i)] != State::eliminated) retained.push_back(i);
    return retained;
}

}  // namespace sgdgp
