#include "cfx/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfx/errors.hpp"

namespace cfx {

NUNResult nearest_unlike_neighbor(const Dataset& dataset, const TimeSeries& x, ClassLabel target,
                                  const DistanceConfig& metric) {
    NUNResult best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].label != target) continue;
        const double d = distance(x, dataset[i].series, metric);
        if (best.instance == nullptr || d < best.distance) {
            best = {i, &dataset[i], d};
        }
    }
    if (best.instance == nullptr) {
        throw NoNeighborError("no training instance of class " + std::to_string(target) + " to act as neighbour");
    }
    return best;
}

bool SaliencyVector::all_zero() const {
    return std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; });
}

SaliencyVector occlusion_saliency(const Classifier& model, const TimeSeries& x, std::size_t window,
                                  OcclusionBaseline baseline, const TimeSeries* reference) {
    const std::size_t T = x.length();
    if (window == 0 || window > T) {
        throw ConfigError("occlusion window must lie in [1, " + std::to_string(T) + "]");
    }
    if (baseline == OcclusionBaseline::nun) {
        if (reference == nullptr) throw ConfigError("the nun baseline needs a reference series");
        require_same_shape(x, *reference);
    }

    const ProbVector base = model.predict_proba(x);
    const ClassLabel predicted = base.argmax();
    SaliencyVector out{x.shape(), std::vector<double>(x.size(), 0.0)};
    std::vector<double> covered(T, 0.0);
    for (std::size_t s = 0; s + window <= T; ++s) {
        for (std::size_t t = s; t < s + window; ++t) covered[t] += 1.0;
    }

    for (std::size_t c = 0; c < x.channels(); ++c) {
        double fill = 0.0;
        if (baseline == OcclusionBaseline::series_mean) {
            const auto ch = x.channel(c);
            fill = std::accumulate(ch.begin(), ch.end(), 0.0) / static_cast<double>(T);
        }
        std::vector<double> drop_sum(T, 0.0);
        for (std::size_t s = 0; s + window <= T; ++s) {
            TimeSeries occluded = x;
            for (std::size_t t = s; t < s + window; ++t) {
                occluded(c, t) = baseline == OcclusionBaseline::nun ? (*reference)(c, t) : fill;
            }
            const double drop = base[predicted] - model.predict_proba(occluded)[predicted];
            for (std::size_t t = s; t < s + window; ++t) drop_sum[t] += drop;
        }
        for (std::size_t t = 0; t < T; ++t) out.scores[c * T + t] = std::max(0.0, drop_sum[t] / covered[t]);
    }

    const double top = *std::max_element(out.scores.begin(), out.scores.end());
    if (top > 0.0) {
        for (double& s : out.scores) s /= top;
    }
    return out;
}

TimeSeries substitute_channels(const TimeSeries& x, const TimeSeries& donor, const std::vector<std::size_t>& channels) {
    require_same_shape(x, donor);
    TimeSeries out = x;
    for (auto c : channels) {
        const auto src = donor.channel(c);
        std::copy(src.begin(), src.end(), out.channel(c).begin());
    }
    return out;
}

TimeSeries transplant_window(const TimeSeries& x, const TimeSeries& donor, std::size_t start, std::size_t end) {
    require_same_shape(x, donor);
    TimeSeries out = x;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t t = start; t <= end; ++t) out(c, t) = donor(c, t);
    }
    return out;
}

CounterfactualResult native_guide_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                           ClassLabel target, const NativeGuideConfig& cfg) {
    check_target(model, target);
    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        return unchanged_result(x, target, initial, "native_guide", cfg.seed, cfg.target_margin);
    }

    const NUNResult nun = nearest_unlike_neighbor(dataset, x, target, cfg.metric);
    const TimeSeries& donor = nun.instance->series;
    const std::size_t T = x.length();
    const std::size_t window = std::min(cfg.saliency_window, T);

    const SaliencyVector saliency = occlusion_saliency(model, x, window, OcclusionBaseline::nun, &donor);
    std::size_t occlusion_calls = 1 + x.channels() * (T - window + 1);

    // Peak time step: saliency summed over channels, or the largest
    // disagreement with the NUN when occlusion never moves the prediction.
    std::vector<double> score(T, 0.0);
    const bool informative = !saliency.all_zero();
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < x.channels(); ++c) {
            score[t] += informative ? saliency.at(c, t) : std::abs(x(c, t) - donor(c, t));
        }
    }
    const std::size_t peak = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());

    const std::size_t max_width = cfg.max_expand == 0 ? T : std::min(cfg.max_expand, T);
    std::optional<std::pair<std::size_t, std::size_t>> found;
    std::pair<std::size_t, std::size_t> tried{peak, peak};
    std::size_t rounds = 0;
    for (std::size_t width = 1; width <= max_width && !found; ++width) {
        ++rounds;
        // Windows of this width containing the peak, most centred first.
        const std::size_t lo = peak + 1 >= width ? peak + 1 - width : 0;
        const std::size_t hi = std::min(peak, T - width);
        std::vector<std::size_t> starts;
        for (std::size_t s = lo; s <= hi; ++s) starts.push_back(s);
        const auto offset = [&](std::size_t s) {
            return std::abs(static_cast<double>(s) + 0.5 * static_cast<double>(width - 1) - static_cast<double>(peak));
        };
        std::stable_sort(starts.begin(), starts.end(), [&](std::size_t a, std::size_t b) { return offset(a) < offset(b); });
        for (auto s : starts) {
            tried = {s, s + width - 1};
            if (meets_target(probe.predict(transplant_window(x, donor, s, s + width - 1)), target, cfg.target_margin)) {
                found = tried;
                break;
            }
        }
    }

    // Without success the widest attempt is returned; at full width that is the NUN itself.
    const auto [first, last] = found.value_or(tried);
    TimeSeries cf = transplant_window(x, donor, first, last);
    CounterfactualResult result{x, cf};
    result.target = target;
    result.generator_id = "native_guide";
    result.seed = cfg.seed;
    result.iterations = rounds;
    result.metadata["nun_index"] = nun.index;
    result.metadata["nun_distance"] = nun.distance;
    result.metadata["saliency_peak"] = peak;
    result.metadata["saliency_informative"] = informative;
    result.metadata["window_start"] = first;
    result.metadata["window_end"] = last;
    settle_validity(result, probe.predict(result.counterfactual), cfg.target_margin);
    result.model_calls = probe.calls() + occlusion_calls;
    return result;
}

CounterfactualResult comte_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                    ClassLabel target, const ComteConfig& cfg) {
    check_target(model, target);
    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        return unchanged_result(x, target, initial, "comte", cfg.seed, cfg.target_margin);
    }

    const NUNResult nun = nearest_unlike_neighbor(dataset, x, target, cfg.metric);
    const TimeSeries& donor = nun.instance->series;
    const std::size_t C = x.channels();

    std::optional<std::vector<std::size_t>> chosen;
    std::string search;
    if (C <= cfg.exact_below) {
        search = "exhaustive";
        // Subsets by size; within the smallest successful size keep the closest.
        for (std::size_t size = 1; size <= C && !chosen; ++size) {
            double best_distance = std::numeric_limits<double>::infinity();
            std::vector<bool> pick(C, false);
            std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
            do {
                std::vector<std::size_t> subset;
                for (std::size_t c = 0; c < C; ++c) {
                    if (pick[c]) subset.push_back(c);
                }
                const TimeSeries candidate = substitute_channels(x, donor, subset);
                if (meets_target(probe.predict(candidate), target, cfg.target_margin)) {
                    const double d = distance(x, candidate, cfg.metric);
                    if (d < best_distance) {
                        best_distance = d;
                        chosen = subset;
                    }
                }
            } while (std::prev_permutation(pick.begin(), pick.end()));
        }
    } else {
        search = "greedy";
        std::vector<std::size_t> selected;
        std::vector<bool> used(C, false);
        while (selected.size() < C) {
            double best_p = -1.0;
            std::size_t best_c = 0;
            bool best_hit = false;
            for (std::size_t c = 0; c < C; ++c) {
                if (used[c]) continue;
                auto trial = selected;
                trial.push_back(c);
                std::sort(trial.begin(), trial.end());
                const ProbVector p = probe.predict(substitute_channels(x, donor, trial));
                if (p[target] > best_p) {
                    best_p = p[target];
                    best_c = c;
                    best_hit = meets_target(p, target, cfg.target_margin);
                }
            }
            used[best_c] = true;
            selected.push_back(best_c);
            std::sort(selected.begin(), selected.end());
            if (best_hit) {
                chosen = selected;
                break;
            }
        }
    }

    std::vector<std::size_t> all(C);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::vector<std::size_t>& channels = chosen ? *chosen : all;
    CounterfactualResult result{x, substitute_channels(x, donor, channels)};
    result.target = target;
    result.generator_id = "comte";
    result.seed = cfg.seed;
    result.metadata["nun_index"] = nun.index;
    result.metadata["channels"] = channels;
    result.metadata["search"] = search;
    settle_validity(result, probe.predict(result.counterfactual), cfg.target_margin);
    result.model_calls = probe.calls();
    return result;
}

}  // namespace cfx
