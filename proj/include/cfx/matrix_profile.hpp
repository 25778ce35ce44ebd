#pragma once

#include <span>
#include <vector>

#include "cfx/timeseries.hpp"

namespace cfx {

/// Brute-force self-join profile of one channel.
struct MatrixProfile {
    std::size_t m = 0;
    /// Positions closer than this are trivial matches.
    std::size_t exclusion = 0;
    std::vector<double> distances;
    std::vector<std::size_t> indices;

    std::size_t size() const noexcept { return distances.size(); }
};

/// ceil(m / 2).
constexpr std::size_t exclusion_zone(std::size_t m) noexcept { return (m + 1) / 2; }

/// Z-normalized Euclidean distance of two equal-length windows; plain
/// Euclidean when either window has stddev below 1e-9.
double subsequence_distance(std::span<const double> a, std::span<const double> b);

/// For every window of length m, the distance to its nearest match j with
/// |i - j| >= ceil(m/2). Throws ConfigError for m < 2, m > T, or a series too
/// short for every window to have a non-trivial match.
MatrixProfile matrix_profile(std::span<const double> series, std::size_t m);
MatrixProfile matrix_profile(const TimeSeries& series, std::size_t m);

/// Up to k profile maxima, largest first (ties to the lower position), no
/// two closer than `exclusion` (default: the profile's own zone).
std::vector<std::size_t> top_discords(const MatrixProfile& profile, std::size_t k, std::size_t exclusion = 0);

}  // namespace cfx
