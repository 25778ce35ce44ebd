#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cfx/timeseries.hpp"

namespace cfx {

enum class Metric { l1, l2, linf, dtw, frechet };
enum class Norm { l1, l2, linf };
enum class MultivariateMode { dependent, independent };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

struct DistanceConfig {
    Metric metric = Metric::l2;
    /// Sakoe-Chiba half-width; unset means unbanded.
    std::optional<std::size_t> dtw_band;
    /// |a - b| above this counts as a change.
    double change_tolerance = 1e-6;
    MultivariateMode multivariate_mode = MultivariateMode::dependent;
    /// DTW local cost is the plain L2 difference unless this is set.
    bool squared_cost = false;
};

double minkowski(const TimeSeries& a, const TimeSeries& b, Norm p);

struct ChangeCount {
    std::size_t count = 0;
    double fraction = 0.0;
};

ChangeCount l0_changed(const TimeSeries& a, const TimeSeries& b, double tolerance);

/// Maximal run of changed points in one channel; `end` is inclusive.
struct Segment {
    std::size_t channel = 0;
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end - start + 1; }
    bool operator==(const Segment&) const = default;
};

struct ChangeMask {
    Shape shape;
    std::vector<std::uint8_t> changed;  // row-major [channel][time]
    std::vector<Segment> segments;      // sorted by (channel, start)

    bool at(std::size_t channel, std::size_t t) const { return changed[channel * shape.length + t] != 0; }
    std::size_t changed_count() const;
    double mean_segment_length() const;
};

ChangeMask changed_segments(const TimeSeries& a, const TimeSeries& b, double tolerance);

/// Dynamic time warping with steps (i-1,j), (i,j-1), (i-1,j-1). Series may
/// differ in length but must share the channel count.
double dtw(const TimeSeries& a, const TimeSeries& b, const DistanceConfig& cfg = {});

/// Discrete Fréchet distance with L2-over-channels point cost.
double frechet(const TimeSeries& a, const TimeSeries& b);

/// Dispatches on cfg.metric.
double distance(const TimeSeries& a, const TimeSeries& b, const DistanceConfig& cfg);

}  // namespace cfx
