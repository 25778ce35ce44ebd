#pragma once

#include <cstdint>

#include "cfx/classifier.hpp"
#include "cfx/distances.hpp"
#include "cfx/result.hpp"

namespace cfx {

struct DiscordConfig {
    /// Discord (and replacement window) length.
    std::size_t m = 10;
    /// Number of discords considered, pooled over channels.
    std::size_t k = 3;
    /// Metric for the NUN-free parts; donors are matched by z-normalized distance.
    DistanceConfig metric;
    double target_margin = 0.0;
    std::uint64_t seed = 0;
};

/// Replaces the top discords of x with the best-matching time-aligned window
/// from a target-class training series, rescaled to the mean and stddev of
/// the window's surroundings in x. Tries single discords first, then pairs,
/// and so on, in discord-rank order.
CounterfactualResult discord_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                      ClassLabel target, const DiscordConfig& cfg = {});

struct GreedyWindowConfig {
    std::size_t window = 10;
    /// 0 means as many windows as it takes to tile every channel.
    std::size_t max_windows = 0;
    DistanceConfig metric;
    double target_margin = 0.0;
    std::uint64_t seed = 0;
};

/// Tiles each channel into non-overlapping windows, ranks them by occlusion
/// saliency against the NUN and copies the NUN's values window by window
/// until the target is reached.
CounterfactualResult greedy_window_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                            ClassLabel target, const GreedyWindowConfig& cfg = {});

}  // namespace cfx
