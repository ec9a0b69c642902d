#include "sgdgp/objectives.hpp"

#include <Eigen/Cholesky>

#include "sgdgp/error.hpp"
#include "sgdgp/exact.hpp"

namespace sgdgp {

RepresenterObjective::RepresenterObjective(KernelSpec spec, Eigen::MatrixXd inputs, Eigen::MatrixXd anchors,
                                           Eigen::MatrixXd targets, Eigen::MatrixXd shift,
                                           Eigen::MatrixXd kernel_shift, Eigen::Index cache_entries)
    : spec_(std::move(spec)),
      inputs_(std::move(inputs)),
      anchors_(std::move(anchors)),
      targets_(std::move(targets)),
      shift_(std::move(shift)),
      kernel_shift_(std::move(kernel_shift)) {
    spec_.validate();
    if (inputs_.rows() == 0 || anchors_.rows() == 0) throw InputError("objective: empty inputs or anchors");
    if (inputs_.cols() != spec_.dim() || anchors_.cols() != spec_.dim())
        throw InputError("objective: input dimension does not match the kernel");
    if (targets_.rows() != inputs_.rows()) throw InputError("objective: target rows != input rows");
    if (shift_.rows() != anchors_.rows() || shift_.cols() != targets_.cols() ||
        kernel_shift_.rows() != anchors_.rows() || kernel_shift_.cols() != targets_.cols())
        throw InputError("objective: shift shape must be anchors x columns");
    anchors_are_inputs_ = anchors_.rows() == inputs_.rows() && anchors_ == inputs_;
    if (inputs_.rows() * anchors_.rows() <= cache_entries) cross_cache_ = gram(spec_, inputs_, anchors_);
    if (anchors_.rows() * anchors_.rows() <= cache_entries) {
        anchor_cache_ = anchors_are_inputs_ && cross_cache_.size() > 0 ? cross_cache_ : gram(spec_, anchors_);
    }
}

Eigen::MatrixXd RepresenterObjective::cross_rows(const std::vector<Eigen::Index>& rows) const {
    if (cross_cache_.size() > 0) return cross_cache_(rows, Eigen::all);
    return gram(spec_, inputs_(rows, Eigen::all), anchors_);
}

Eigen::MatrixXd RepresenterObjective::cross() const {
    return cross_cache_.size() > 0 ? cross_cache_ : gram(spec_, inputs_, anchors_);
}

Eigen::MatrixXd RepresenterObjective::anchor_gram() const {
    return anchor_cache_.size() > 0 ? anchor_cache_ : gram(spec_, anchors_);
}

double RepresenterObjective::value(const Eigen::MatrixXd& w) const {
    const Eigen::MatrixXd resid = targets_ - cross() * w;
    const Eigen::MatrixXd diff = w - shift_;
    return resid.squaredNorm() / spec_.noise_variance + (diff.array() * (anchor_gram() * diff).array()).sum();
}

Eigen::MatrixXd RepresenterObjective::dense_gradient(const Eigen::MatrixXd& w, Eigen::Index first_column) const {
    check_block(w, first_column);
    const Eigen::MatrixXd kxa = cross();
    const Eigen::MatrixXd resid = kxa * w - targets_.middleCols(first_column, w.cols());
    Eigen::MatrixXd g = (2.0 / spec_.noise_variance) * (kxa.transpose() * resid);
    g += exact_regularizer_gradient(w, first_column);
    return g;
}

Eigen::MatrixXd RepresenterObjective::data_gradient(const Eigen::MatrixXd& w, const std::vector<Eigen::Index>& batch,
                                                    Eigen::Index first_column) const {
    if (batch.empty()) throw InputError("objective: empty minibatch");
    check_block(w, first_column);
    const Eigen::MatrixXd kba = cross_rows(batch);
    const Eigen::MatrixXd resid = targets_.middleCols(first_column, w.cols())(batch, Eigen::all) - kba * w;
    const double scale = -2.0 * static_cast<double>(num_data()) /
                         (static_cast<double>(batch.size()) * spec_.noise_variance);
    return scale * (kba.transpose() * resid);
}

Eigen::MatrixXd RepresenterObjective::exact_regularizer_gradient(const Eigen::MatrixXd& w,
                                                                 Eigen::Index first_column) const {
    check_block(w, first_column);
    return 2.0 * (anchor_gram() * w - kernel_shift_.middleCols(first_column, w.cols()));
}

Eigen::MatrixXd RepresenterObjective::feature_regularizer_gradient(const Eigen::MatrixXd& w,
                                                                   const FourierFeatureMap& features,
                                                                   Eigen::Index first_column) const {
    check_block(w, first_column);
    const Eigen::MatrixXd phi = features.evaluate(anchors_);
    return 2.0 * (phi * (phi.transpose() * (w - shift_.middleCols(first_column, w.cols()))));
}

Eigen::MatrixXd RepresenterObjective::stochastic_gradient(const Eigen::MatrixXd& w,
                                                          const std::vector<Eigen::Index>& batch,
                                                          const FourierFeatureMap* features,
                                                          Eigen::Index first_column) const {
    Eigen::MatrixXd g = data_gradient(w, batch, first_column);
    g += features ? feature_regularizer_gradient(w, *features, first_column)
                  : exact_regularizer_gradient(w, first_column);
    return g;
}

void RepresenterObjective::check_block(const Eigen::MatrixXd& w, Eigen::Index first_column) const {
    if (w.rows() != num_anchors()) throw InputError("objective: weight rows must equal the anchor count");
    if (first_column < 0 || w.cols() < 1 || first_column + w.cols() > num_columns())
        throw InputError("objective: weight column block out of range");
}

Eigen::MatrixXd RepresenterObjective::stationary_point() const {
    const double noise = spec_.noise_variance;
    if (anchors_are_inputs_) {
        Eigen::MatrixXd k = anchor_gram();
        k.diagonal().array() += noise;
        const CholeskyFactor f = cholesky_with_jitter(k, 1e-10 * spec_.signal_variance);
        return f.llt.solve(targets_ + noise * shift_);
    }
    const Eigen::MatrixXd kxa = cross();
    Eigen::MatrixXd h = kxa.transpose() * kxa / noise + anchor_gram();
    const Eigen::MatrixXd rhs = kxa.transpose() * targets_ / noise + kernel_shift_;
    const CholeskyFactor f = cholesky_with_jitter(h, 1e-10 * h.diagonal().maxCoeff());
    return f.llt.solve(rhs);
}

double RepresenterObjective::curvature(int iterations) const {
    const Eigen::MatrixXd kxa = cross();
    const Eigen::MatrixXd kaa = anchor_gram();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(num_anchors()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd hv = kxa.transpose() * (kxa * v) / spec_.noise_variance + kaa * v;
        lambda = v.dot(hv);
        const double norm = hv.norm();
        if (!(norm > 0.0)) break;
        v = hv / norm;
    }
    return lambda;
}

namespace {

void check_data(const KernelSpec& spec, const Dataset& data) {
    spec.validate();
    if (data.empty()) throw InputError("objective: empty dataset");
    if (data.dim() != spec.dim()) throw InputError("objective: data dimension does not match the kernel");
}

void check_slots(const Dataset& data, const Eigen::MatrixXd& prior_values, const Eigen::MatrixXd& noise) {
    if (prior_values.rows() != data.size() || noise.rows() != data.size() || prior_values.cols() != noise.cols())
        throw InputError("sampling objective: prior values and noise must both be N x S");
    if (prior_values.cols() < 1) throw InputError("sampling objective: need at least one sample slot");
}

}  // namespace

RepresenterObjective mean_objective(const KernelSpec& spec, const Dataset& data, Eigen::Index cache_entries) {
    check_data(spec, data);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(data.size(), 1);
    return RepresenterObjective(spec, data.inputs(), data.inputs(), data.targets(), zero, zero, cache_entries);
}

RepresenterObjective sample_objective(const KernelSpec& spec, const Dataset& data,
                                      const Eigen::MatrixXd& prior_values, const Eigen::MatrixXd& noise,
                                      SampleForm form, Eigen::Index cache_entries) {
    check_data(spec, data);
    check_slots(data, prior_values, noise);
    const Eigen::Index n = data.size(), s = prior_values.cols();
    if (form == SampleForm::standard) {
        const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, s);
        return RepresenterObjective(spec, data.inputs(), data.inputs(), prior_values + noise, zero, zero,
                                    cache_entries);
    }
    Eigen::MatrixXd delta = noise / spec.noise_variance;
    Eigen::MatrixXd kdelta = gram(spec, data.inputs()) * delta;
    return RepresenterObjective(spec, data.inputs(), data.inputs(), prior_values, std::move(delta),
                                std::move(kdelta), cache_entries);
}

RepresenterObjective inducing_mean_objective(const KernelSpec& spec, const Dataset& data,
                                             const Eigen::MatrixXd& inducing, Eigen::Index cache_entries) {
    check_data(spec, data);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(inducing.rows(), 1);
    return RepresenterObjective(spec, data.inputs(), inducing, data.targets(), zero, zero, cache_entries);
}

RepresenterObjective inducing_sample_objective(const KernelSpec& spec, const Dataset& data,
                                               const Eigen::MatrixXd& inducing, const Eigen::MatrixXd& prior_values,
                                               const Eigen::MatrixXd& noise, SampleForm form,
                                               Eigen::Index cache_entries) {
    check_data(spec, data);
    check_slots(data, prior_values, noise);
    const Eigen::Index m = inducing.rows(), s = prior_values.cols();
    if (form == SampleForm::standard) {
        const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(m, s);
        return RepresenterObjective(spec, data.inputs(), inducing, prior_values + noise, zero, zero, cache_entries);
    }
    Eigen::MatrixXd kdelta = gram(spec, inducing, data.inputs()) * noise / spec.noise_variance;
    const CholeskyFactor f = cholesky_with_jitter(gram(spec, inducing), 1e-10 * spec.signal_variance);
    Eigen::MatrixXd delta = f.llt.solve(kdelta);
    return RepresenterObjective(spec, data.inputs(), inducing, prior_values, std::move(delta), std::move(kdelta),
                                cache_entries);
}

std::vector<Eigen::Index> draw_batch(Eigen::Index n, Eigen::Index size, Rng& rng) {
    if (n < 1 || size < 1) throw InputError("minibatch: need n >= 1 and size >= 1");
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<Eigen::Index> out(static_cast<std::size_t>(size));
    for (auto& i : out) i = pick(rng);
    return out;
}

}  // namespace sgdgp
