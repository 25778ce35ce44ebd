#include "cfx/matrix_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr double kConstantStd = 1e-9;

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

Moments moments(std::span<const double> w) {
    const double n = static_cast<double>(w.size());
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

double window_distance(std::span<const double> a, const Moments& ma, std::span<const double> b, const Moments& mb) {
    double sum = 0.0;
    if (ma.stddev < kConstantStd || mb.stddev < kConstantStd) {
        for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
    } else {
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = (a[k] - ma.mean) / ma.stddev - (b[k] - mb.mean) / mb.stddev;
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

}  // namespace

double subsequence_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw ShapeError("subsequences must be non-empty and of equal length");
    return window_distance(a, moments(a), b, moments(b));
}

MatrixProfile matrix_profile(std::span<const double> series, std::size_t m) {
    const std::size_t T = series.size();
    if (m < 2 || m > T) throw ConfigError("subsequence length must lie in [2, " + std::to_string(T) + "]");
    const std::size_t n = T - m + 1;
    const std::size_t zone = exclusion_zone(m);
    // Every window needs a partner at least `zone` positions away.
    if (n < 2 * zone) {
        throw ConfigError("series of length " + std::to_string(T) + " is too short for m = " + std::to_string(m));
    }
    std::vector<Moments> stats(n);
    for (std::size_t i = 0; i < n; ++i) stats[i] = moments(series.subspan(i, m));

    MatrixProfile profile{m, zone, std::vector<double>(n, std::numeric_limits<double>::infinity()),
                          std::vector<std::size_t>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if ((i > j ? i - j : j - i) < zone) continue;
            const double d = window_distance(series.subspan(i, m), stats[i], series.subspan(j, m), stats[j]);
            if (d < profile.distances[i]) {
                profile.distances[i] = d;
                profile.indices[i] = j;
            }
        }
    }
    return profile;
}

MatrixProfile matrix_profile(const TimeSeries& series, std::size_t m) {
    if (series.channels() != 1) throw ShapeError("matrix_profile expects a single channel");
    return matrix_profile(series.channel(0), m);
}

std::vector<std::size_t> top_discords(const MatrixProfile& profile, std::size_t k, std::size_t exclusion) {
    if (k == 0) throw ConfigError("k must be at least 1");
    if (exclusion == 0) exclusion = profile.exclusion;
    std::vector<std::size_t> order(profile.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return profile.distances[a] > profile.distances[b]; });
    std::vector<std::size_t> picked;
    for (auto p : order) {
        if (picked.size() == k) break;
        const bool clear = std::all_of(picked.begin(), picked.end(),
                                       [&](std::size_t q) { return (p > q ? p - q : q - p) >= exclusion; });
        if (clear) picked.push_back(p);
    }
    return picked;
}

}  // namespace cfx
