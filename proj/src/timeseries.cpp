#include "cfx/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

// Population stddev below this is treated as a constant channel.
constexpr double kConstantThreshold = 1e-12;

void check_values(std::size_t channels, std::size_t length, const std::vector<double>& values) {
    if (channels == 0 || length == 0) {
        throw ShapeError("time series needs at least one channel and one time step");
    }
    if (values.size() != channels * length) {
        throw ShapeError("expected " + std::to_string(channels * length) + " values, got " +
                         std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ShapeError("time series values must be finite");
    }
}

}  // namespace

std::string to_string(const Shape& shape) {
    return "(" + std::to_string(shape.channels) + ", " + std::to_string(shape.length) + ")";
}

TimeSeries::TimeSeries(std::size_t channels, std::size_t length, double fill)
    : TimeSeries(channels, length, std::vector<double>(channels * length, fill)) {}

TimeSeries::TimeSeries(std::size_t channels, std::size_t length, std::vector<double> values)
    : channels_(channels), length_(length), values_(std::move(values)) {
    check_values(channels_, length_, values_);
}

TimeSeries TimeSeries::univariate(std::vector<double> values) {
    const std::size_t n = values.size();
    return TimeSeries(1, n, std::move(values));
}

TimeSeries TimeSeries::from_channels(const std::vector<std::vector<double>>& channels) {
    if (channels.empty()) throw ShapeError("time series needs at least one channel");
    const std::size_t length = channels.front().size();
    std::vector<double> values;
    values.reserve(channels.size() * length);
    for (const auto& ch : channels) {
        if (ch.size() != length) throw ShapeError("all channels must have the same length");
        values.insert(values.end(), ch.begin(), ch.end());
    }
    return TimeSeries(channels.size(), length, std::move(values));
}

std::vector<std::vector<double>> TimeSeries::to_nested() const {
    std::vector<std::vector<double>> out;
    out.reserve(channels_);
    for (std::size_t c = 0; c < channels_; ++c) {
        auto ch = channel(c);
        out.emplace_back(ch.begin(), ch.end());
    }
    return out;
}

void require_same_shape(const TimeSeries& a, const TimeSeries& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("shape mismatch: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
}

Dataset::Dataset(std::vector<LabeledInstance> instances, std::vector<std::string> class_names,
                 std::optional<NormStats> norm_stats)
    : instances_(std::move(instances)), class_names_(std::move(class_names)), norm_stats_(std::move(norm_stats)) {
    std::set<std::string> seen(class_names_.begin(), class_names_.end());
    if (seen.size() != class_names_.size()) throw FormatError("class names must be distinct");
    if (!instances_.empty()) shape_ = instances_.front().series.shape();
    for (const auto& inst : instances_) {
        if (inst.series.shape() != shape_) {
            throw ShapeError("all instances must share one shape; got " + to_string(inst.series.shape()) +
                             " and " + to_string(shape_));
        }
        if (inst.label >= class_names_.size()) {
            throw FormatError("label " + std::to_string(inst.label) + " out of range for " +
                              std::to_string(class_names_.size()) + " classes");
        }
    }
    if (norm_stats_ && !instances_.empty() &&
        (norm_stats_->mean.size() != shape_.channels || norm_stats_->stddev.size() != shape_.channels)) {
        throw ShapeError("normalization statistics do not match the channel count");
    }
}

std::size_t Dataset::distinct_labels() const {
    std::set<ClassLabel> labels;
    for (const auto& inst : instances_) labels.insert(inst.label);
    return labels.size();
}

std::vector<std::size_t> Dataset::indices_of_class(ClassLabel label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (instances_[i].label == label) out.push_back(i);
    }
    return out;
}

std::optional<ClassLabel> Dataset::class_index(const std::string& name) const {
    auto it = std::find(class_names_.begin(), class_names_.end(), name);
    if (it == class_names_.end()) return std::nullopt;
    return static_cast<ClassLabel>(it - class_names_.begin());
}

NormStats compute_norm_stats(const Dataset& dataset) {
    const std::size_t channels = dataset.channels();
    NormStats stats{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0)};
    if (dataset.empty()) return stats;
    const double count = static_cast<double>(dataset.size() * dataset.length());
    for (std::size_t c = 0; c < channels; ++c) {
        double sum = 0.0;
        for (const auto& inst : dataset.instances()) {
            for (double v : inst.series.channel(c)) sum += v;
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (const auto& inst : dataset.instances()) {
            for (double v : inst.series.channel(c)) sq += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(sq / count);
        stats.mean[c] = mean;
        stats.stddev[c] = sd < kConstantThreshold ? 0.0 : sd;
    }
    return stats;
}

TimeSeries apply_normalization(const TimeSeries& series, const NormStats& stats) {
    if (stats.mean.size() != series.channels()) throw ShapeError("normalization statistics do not match the series");
    TimeSeries out = series;
    for (std::size_t c = 0; c < out.channels(); ++c) {
        if (stats.is_constant(c)) continue;
        for (double& v : out.channel(c)) v = (v - stats.mean[c]) / stats.stddev[c];
    }
    return out;
}

TimeSeries denormalize(const TimeSeries& series, const NormStats& stats) {
    if (stats.mean.size() != series.channels()) throw ShapeError("normalization statistics do not match the series");
    TimeSeries out = series;
    for (std::size_t c = 0; c < out.channels(); ++c) {
        if (stats.is_constant(c)) continue;
        for (double& v : out.channel(c)) v = v * stats.stddev[c] + stats.mean[c];
    }
    return out;
}

Dataset apply_normalization(const Dataset& dataset, const NormStats& stats) {
    std::vector<LabeledInstance> instances;
    instances.reserve(dataset.size());
    for (const auto& inst : dataset.instances()) {
        instances.push_back({apply_normalization(inst.series, stats), inst.label});
    }
    Dataset out(std::move(instances), dataset.class_names(), stats);
    out.set_problem_name(dataset.problem_name());
    return out;
}

Dataset znormalize(const Dataset& dataset) {
    return apply_normalization(dataset, compute_norm_stats(dataset));
}

}  // namespace cfx
