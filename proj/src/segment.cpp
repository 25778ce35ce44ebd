#include "cfx/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfx/errors.hpp"
#include "cfx/instance.hpp"
#include "cfx/matrix_profile.hpp"

namespace cfx {

namespace {

struct Window {
    std::size_t channel = 0;
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
};

struct Replacement {
    Window window;
    double discord_distance = 0.0;
    std::size_t donor_index = 0;
    double donor_distance = 0.0;
    std::vector<double> values;
};

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double stddev_of(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double e : v) s += (e - mean) * (e - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Donor window mapped onto the level and spread of x around the window.
std::vector<double> rescale(std::span<const double> donor, std::span<const double> xc, const Window& w, std::size_t m) {
    std::vector<double> context;
    const std::size_t T = xc.size();
    for (std::size_t t = w.start >= m ? w.start - m : 0; t < w.start; ++t) context.push_back(xc[t]);
    for (std::size_t t = w.end + 1; t < std::min(T, w.end + 1 + m); ++t) context.push_back(xc[t]);
    if (context.empty()) context.assign(xc.begin(), xc.end());
    const double cmean = mean_of(context);
    const double cstd = stddev_of(context, cmean);

    std::vector<double> d(donor.begin(), donor.end());
    const double dmean = mean_of(d);
    const double dstd = stddev_of(d, dmean);
    for (double& v : d) v = dstd < 1e-9 ? v - dmean + cmean : (v - dmean) / dstd * cstd + cmean;
    return d;
}

TimeSeries with_replacements(const TimeSeries& x, const std::vector<const Replacement*>& reps) {
    TimeSeries out = x;
    for (const auto* r : reps) {
        for (std::size_t t = r->window.start; t <= r->window.end; ++t) out(r->window.channel, t) = r->values[t - r->window.start];
    }
    return out;
}

}  // namespace

CounterfactualResult discord_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                      ClassLabel target, const DiscordConfig& cfg) {
    if (cfg.k == 0) throw ConfigError("k must be at least 1");
    check_target(model, target);
    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        return unchanged_result(x, target, initial, "discord", cfg.seed, cfg.target_margin);
    }
    const auto donors = dataset.indices_of_class(target);
    if (donors.empty()) throw NoNeighborError("no training instance of the target class to take windows from");
    require_same_shape(x, dataset[donors.front()].series);

    // Discords per channel, kept apart by more than a window so that
    // replaced regions never touch; then pooled by distance.
    const std::size_t m = cfg.m;
    std::vector<Replacement> reps;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        const MatrixProfile profile = matrix_profile(x.channel(c), m);
        for (auto pos : top_discords(profile, cfg.k, m + 1)) {
            Replacement r;
            r.window = {c, pos, pos + m - 1};
            r.discord_distance = profile.distances[pos];
            reps.push_back(std::move(r));
        }
    }
    std::stable_sort(reps.begin(), reps.end(), [](const Replacement& a, const Replacement& b) {
        return a.discord_distance > b.discord_distance;
    });
    if (reps.size() > cfg.k) reps.resize(cfg.k);

    for (auto& r : reps) {
        const auto xw = x.channel(r.window.channel).subspan(r.window.start, m);
        r.donor_distance = std::numeric_limits<double>::infinity();
        for (auto i : donors) {
            const double d = subsequence_distance(xw, dataset[i].series.channel(r.window.channel).subspan(r.window.start, m));
            if (d < r.donor_distance) {
                r.donor_distance = d;
                r.donor_index = i;
            }
        }
        const auto dw = dataset[r.donor_index].series.channel(r.window.channel).subspan(r.window.start, m);
        r.values = rescale(dw, x.channel(r.window.channel), r.window, m);
    }

    // Combinations of increasing size, lexicographic in discord rank.
    std::vector<std::size_t> used;
    std::optional<std::vector<std::size_t>> found;
    std::size_t attempts = 0;
    for (std::size_t size = 1; size <= reps.size() && !found; ++size) {
        std::vector<bool> pick(reps.size(), false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
        do {
            std::vector<std::size_t> combo;
            std::vector<const Replacement*> chosen;
            for (std::size_t i = 0; i < reps.size(); ++i) {
                if (pick[i]) {
                    combo.push_back(i);
                    chosen.push_back(&reps[i]);
                }
            }
            ++attempts;
            used = combo;
            if (meets_target(probe.predict(with_replacements(x, chosen)), target, cfg.target_margin)) {
                found = combo;
                break;
            }
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }

    std::vector<const Replacement*> chosen;
    for (auto i : used) chosen.push_back(&reps[i]);
    CounterfactualResult result{x, with_replacements(x, chosen)};
    result.target = target;
    result.generator_id = "discord";
    result.seed = cfg.seed;
    result.iterations = attempts;
    nlohmann::json windows = nlohmann::json::array();
    for (const auto* r : chosen) {
        windows.push_back({{"channel", r->window.channel},
                           {"start", r->window.start},
                           {"end", r->window.end},
                           {"discord_distance", r->discord_distance},
                           {"donor_index", r->donor_index},
                           {"donor_distance", r->donor_distance}});
    }
    result.metadata["windows"] = windows;
    result.metadata["discords_found"] = reps.size();
    result.metadata["donor_rule"] = "nearest z-normalized time-aligned target-class window, rescaled to local context";
    settle_validity(result, probe.predict(result.counterfactual), cfg.target_margin);
    result.model_calls = probe.calls();
    return result;
}

CounterfactualResult greedy_window_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                            ClassLabel target, const GreedyWindowConfig& cfg) {
    const std::size_t T = x.length();
    if (cfg.window == 0 || cfg.window > T) {
        throw ConfigError("window must lie in [1, " + std::to_string(T) + "]");
    }
    check_target(model, target);
    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        return unchanged_result(x, target, initial, "greedy_window", cfg.seed, cfg.target_margin);
    }

    const NUNResult nun = nearest_unlike_neighbor(dataset, x, target, cfg.metric);
    const TimeSeries& donor = nun.instance->series;
    const SaliencyVector saliency = occlusion_saliency(model, x, cfg.window, OcclusionBaseline::nun, &donor);
    const std::size_t occlusion_calls = 1 + x.channels() * (T - cfg.window + 1);

    struct Tile {
        Window w;
        double saliency = 0.0;
        double energy = 0.0;
    };
    std::vector<Tile> tiles;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t s = 0; s < T; s += cfg.window) {
            Tile tile{{c, s, std::min(T, s + cfg.window) - 1}};
            for (std::size_t t = tile.w.start; t <= tile.w.end; ++t) {
                tile.saliency += saliency.at(c, t);
                tile.energy += (x(c, t) - donor(c, t)) * (x(c, t) - donor(c, t));
            }
            tiles.push_back(tile);
        }
    }
    // Tiles are already in index order; the stable sort keeps it as the last tie-break.
    std::stable_sort(tiles.begin(), tiles.end(), [](const Tile& a, const Tile& b) {
        if (a.saliency != b.saliency) return a.saliency > b.saliency;
        return a.energy > b.energy;
    });

    const std::size_t limit = cfg.max_windows == 0 ? tiles.size() : std::min(cfg.max_windows, tiles.size());
    TimeSeries cf = x;
    nlohmann::json windows = nlohmann::json::array();
    bool hit = false;
    std::size_t used = 0;
    for (; used < limit && !hit;) {
        const Window& w = tiles[used].w;
        for (std::size_t t = w.start; t <= w.end; ++t) cf(w.channel, t) = donor(w.channel, t);
        windows.push_back({{"channel", w.channel}, {"start", w.start}, {"end", w.end}, {"saliency", tiles[used].saliency}});
        ++used;
        hit = meets_target(probe.predict(cf), target, cfg.target_margin);
    }

    CounterfactualResult result{x, cf};
    result.target = target;
    result.generator_id = "greedy_window";
    result.seed = cfg.seed;
    result.iterations = used;
    result.metadata["nun_index"] = nun.index;
    result.metadata["windows"] = windows;
    result.metadata["windows_used"] = used;
    settle_validity(result, probe.predict(result.counterfactual), cfg.target_margin);
    result.model_calls = probe.calls() + occlusion_calls;
    return result;
}

}  // namespace cfx
