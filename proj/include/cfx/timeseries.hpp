#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfx {

using ClassLabel = std::size_t;

struct Shape {
    std::size_t channels = 0;
    std::size_t length = 0;

    std::size_t size() const noexcept { return channels * length; }
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

/// Multichannel real-valued sequence stored row-major as [channel][time].
///
/// Construction rejects non-finite values and empty shapes. The mutable
/// accessors exist for generators that perturb a copy in place; callers are
/// responsible for keeping the values finite.
class TimeSeries {
public:
    TimeSeries(std::size_t channels, std::size_t length, double fill = 0.0);
    TimeSeries(std::size_t channels, std::size_t length, std::vector<double> values);

    static TimeSeries univariate(std::vector<double> values);
    static TimeSeries from_channels(const std::vector<std::vector<double>>& channels);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t length() const noexcept { return length_; }
    std::size_t size() const noexcept { return values_.size(); }
    Shape shape() const noexcept { return {channels_, length_}; }

    double operator()(std::size_t channel, std::size_t t) const { return values_[channel * length_ + t]; }
    double& operator()(std::size_t channel, std::size_t t) { return values_[channel * length_ + t]; }

    std::span<const double> channel(std::size_t c) const { return {values_.data() + c * length_, length_}; }
    std::span<double> channel(std::size_t c) { return {values_.data() + c * length_, length_}; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    std::vector<std::vector<double>> to_nested() const;

    bool operator==(const TimeSeries&) const = default;

private:
    std::size_t channels_;
    std::size_t length_;
    std::vector<double> values_;
};

/// Throws ShapeError when the two series differ in shape.
void require_same_shape(const TimeSeries& a, const TimeSeries& b);

struct LabeledInstance {
    TimeSeries series;
    ClassLabel label;

    bool operator==(const LabeledInstance&) const = default;
};

/// Per-channel z-normalization statistics. A stored stddev of 0 marks a
/// constant channel that normalization leaves untouched.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool is_constant(std::size_t channel) const { return stddev[channel] == 0.0; }
    bool operator==(const NormStats&) const = default;
};

/// Labeled collection of equal-shape series.
class Dataset {
public:
    Dataset(std::vector<LabeledInstance> instances, std::vector<std::string> class_names,
            std::optional<NormStats> norm_stats = std::nullopt);

    const std::vector<LabeledInstance>& instances() const noexcept { return instances_; }
    const LabeledInstance& operator[](std::size_t i) const { return instances_[i]; }
    std::size_t size() const noexcept { return instances_.size(); }
    bool empty() const noexcept { return instances_.empty(); }

    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    std::size_t num_classes() const noexcept { return class_names_.size(); }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t length() const noexcept { return shape_.length; }
    Shape shape() const noexcept { return shape_; }

    const std::optional<NormStats>& norm_stats() const noexcept { return norm_stats_; }

    const std::string& problem_name() const noexcept { return problem_name_; }
    void set_problem_name(std::string name) { problem_name_ = std::move(name); }

    /// Number of distinct labels that actually occur.
    std::size_t distinct_labels() const;
    std::vector<std::size_t> indices_of_class(ClassLabel label) const;
    std::optional<ClassLabel> class_index(const std::string& name) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<LabeledInstance> instances_;
    std::vector<std::string> class_names_;
    Shape shape_;
    std::optional<NormStats> norm_stats_;
    std::string problem_name_ = "dataset";
};

/// Dataset-level z-normalization: per channel, over all instances and time
/// steps. Constant channels are left unchanged and flagged with stddev 0.
Dataset znormalize(const Dataset& dataset);

NormStats compute_norm_stats(const Dataset& dataset);

/// Applies existing statistics (e.g. training-set statistics to a test split).
Dataset apply_normalization(const Dataset& dataset, const NormStats& stats);
TimeSeries apply_normalization(const TimeSeries& series, const NormStats& stats);
TimeSeries denormalize(const TimeSeries& series, const NormStats& stats);

}  // namespace cfx
