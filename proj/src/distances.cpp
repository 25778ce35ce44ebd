#include "cfx/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_channels(const TimeSeries& a, const TimeSeries& b) {
    if (a.channels() != b.channels()) {
        throw ShapeError("channel count mismatch: " + std::to_string(a.channels()) + " vs " +
                         std::to_string(b.channels()));
    }
}

// Point cost between a[:, i] and b[:, j]: |d| for one channel, L2 over channels otherwise.
double point_cost(const TimeSeries& a, std::size_t i, const TimeSeries& b, std::size_t j, bool squared) {
    if (a.channels() == 1) {
        const double d = a(0, i) - b(0, j);
        return squared ? d * d : std::abs(d);
    }
    double sq = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        const double d = a(c, i) - b(c, j);
        sq += d * d;
    }
    return squared ? sq : std::sqrt(sq);
}

double dtw_dependent(const TimeSeries& a, const TimeSeries& b, std::optional<std::size_t> band, bool squared) {
    const std::size_t n = a.length();
    const std::size_t m = b.length();
    const std::size_t w = band.value_or(std::max(n, m));
    if ((n > m ? n - m : m - n) > w) {
        throw BandError("band half-width " + std::to_string(w) + " admits no path between lengths " +
                        std::to_string(n) + " and " + std::to_string(m));
    }
    // Two rolling rows of the (n+1) x (m+1) cost matrix; row 0 / column 0 are borders.
    std::vector<double> prev(m + 1, kInf), curr(m + 1, kInf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(curr.begin(), curr.end(), kInf);
        const std::size_t lo = i > w ? i - w : 1;
        const std::size_t hi = std::min(m, i + w);
        for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
            const double best = std::min({prev[j], curr[j - 1], prev[j - 1]});
            curr[j] = point_cost(a, i - 1, b, j - 1, squared) + best;
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

}  // namespace

Metric parse_metric(std::string_view name) {
    if (name == "l1") return Metric::l1;
    if (name == "l2") return Metric::l2;
    if (name == "linf") return Metric::linf;
    if (name == "dtw") return Metric::dtw;
    if (name == "frechet") return Metric::frechet;
    throw ConfigError("unknown metric '" + std::string(name) + "' (expected l1, l2, linf, dtw or frechet)");
}

std::string_view metric_name(Metric metric) {
    switch (metric) {
        case Metric::l1: return "l1";
        case Metric::l2: return "l2";
        case Metric::linf: return "linf";
        case Metric::dtw: return "dtw";
        case Metric::frechet: return "frechet";
    }
    return "l2";
}

double minkowski(const TimeSeries& a, const TimeSeries& b, Norm p) {
    require_same_shape(a, b);
    const auto va = a.values();
    const auto vb = b.values();
    double acc = 0.0;
    switch (p) {
        case Norm::l1:
            for (std::size_t i = 0; i < va.size(); ++i) acc += std::abs(va[i] - vb[i]);
            return acc;
        case Norm::l2:
            for (std::size_t i = 0; i < va.size(); ++i) acc += (va[i] - vb[i]) * (va[i] - vb[i]);
            return std::sqrt(acc);
        case Norm::linf:
            for (std::size_t i = 0; i < va.size(); ++i) acc = std::max(acc, std::abs(va[i] - vb[i]));
            return acc;
    }
    return acc;
}

ChangeCount l0_changed(const TimeSeries& a, const TimeSeries& b, double tolerance) {
    require_same_shape(a, b);
    const auto va = a.values();
    const auto vb = b.values();
    ChangeCount out;
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (std::abs(va[i] - vb[i]) > tolerance) ++out.count;
    }
    out.fraction = static_cast<double>(out.count) / static_cast<double>(va.size());
    return out;
}

std::size_t ChangeMask::changed_count() const {
    return static_cast<std::size_t>(std::count(changed.begin(), changed.end(), std::uint8_t{1}));
}

double ChangeMask::mean_segment_length() const {
    if (segments.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& s : segments) total += s.length();
    return static_cast<double>(total) / static_cast<double>(segments.size());
}

ChangeMask changed_segments(const TimeSeries& a, const TimeSeries& b, double tolerance) {
    require_same_shape(a, b);
    ChangeMask mask;
    mask.shape = a.shape();
    mask.changed.assign(a.size(), 0);
    for (std::size_t c = 0; c < a.channels(); ++c) {
        bool open = false;
        std::size_t start = 0;
        for (std::size_t t = 0; t < a.length(); ++t) {
            const bool changed = std::abs(a(c, t) - b(c, t)) > tolerance;
            mask.changed[c * a.length() + t] = changed ? 1 : 0;
            if (changed && !open) {
                open = true;
                start = t;
            }
            if (!changed && open) {
                mask.segments.push_back({c, start, t - 1});
                open = false;
            }
        }
        if (open) mask.segments.push_back({c, start, a.length() - 1});
    }
    return mask;
}

double dtw(const TimeSeries& a, const TimeSeries& b, const DistanceConfig& cfg) {
    require_same_channels(a, b);
    if (cfg.multivariate_mode == MultivariateMode::dependent || a.channels() == 1) {
        return dtw_dependent(a, b, cfg.dtw_band, cfg.squared_cost);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        const auto ca = a.channel(c);
        const auto cb = b.channel(c);
        total += dtw_dependent(TimeSeries::univariate({ca.begin(), ca.end()}),
                               TimeSeries::univariate({cb.begin(), cb.end()}), cfg.dtw_band, cfg.squared_cost);
    }
    return total;
}

double frechet(const TimeSeries& a, const TimeSeries& b) {
    require_same_channels(a, b);
    const std::size_t n = a.length();
    const std::size_t m = b.length();
    std::vector<double> prev(m), curr(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double cost = point_cost(a, i, b, j, false);
            double reach;
            if (i == 0 && j == 0) {
                reach = cost;
            } else if (i == 0) {
                reach = std::max(cost, curr[j - 1]);
            } else if (j == 0) {
                reach = std::max(cost, prev[j]);
            } else {
                reach = std::max(cost, std::min({prev[j], curr[j - 1], prev[j - 1]}));
            }
            curr[j] = reach;
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

double distance(const TimeSeries& a, const TimeSeries& b, const DistanceConfig& cfg) {
    switch (cfg.metric) {
        case Metric::l1: return minkowski(a, b, Norm::l1);
        case Metric::l2: return minkowski(a, b, Norm::l2);
        case Metric::linf: return minkowski(a, b, Norm::linf);
        case Metric::dtw: return dtw(a, b, cfg);
        case Metric::frechet: return frechet(a, b);
    }
    return minkowski(a, b, Norm::l2);
}

}  // namespace cfx
