#pragma once

#include <cstdint>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/distances.hpp"
#include "cfx/result.hpp"

namespace cfx {

struct NUNResult {
    std::size_t index = 0;
    const LabeledInstance* instance = nullptr;
    double distance = 0.0;
};

/// Closest training instance labeled `target`; ties go to the lower index.
/// Throws NoNeighborError when the class is absent.
NUNResult nearest_unlike_neighbor(const Dataset& dataset, const TimeSeries& x, ClassLabel target,
                                  const DistanceConfig& metric = {});

enum class OcclusionBaseline { series_mean, zero, nun };

/// Per-(channel, time) importance in [0, 1], same layout as the input.
struct SaliencyVector {
    Shape shape;
    std::vector<double> scores;

    double at(std::size_t channel, std::size_t t) const { return scores[channel * shape.length + t]; }
    bool all_zero() const;
};

/// Slides a window (stride 1) over every channel, replaces it with the
/// baseline and records the drop in probability of the currently predicted
/// class. Each time step gets the mean drop of the windows covering it,
/// clipped at zero and max-normalized. `reference` is required for the nun
/// baseline.
SaliencyVector occlusion_saliency(const Classifier& model, const TimeSeries& x, std::size_t window,
                                  OcclusionBaseline baseline, const TimeSeries* reference = nullptr);

struct NativeGuideConfig {
    DistanceConfig metric;
    /// Occlusion window used to locate the most salient time step.
    std::size_t saliency_window = 5;
    /// Largest transplant width tried; 0 means the full series length.
    std::size_t max_expand = 0;
    double target_margin = 0.0;
    std::uint64_t seed = 0;
};

/// Transplants the NUN's values over a window around the saliency peak,
/// growing the window one step per round until the model predicts the target.
CounterfactualResult native_guide_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                           ClassLabel target, const NativeGuideConfig& cfg = {});

struct ComteConfig {
    DistanceConfig metric;
    /// Exhaustive subset search for C <= exact_below, greedy selection above.
    std::size_t exact_below = 10;
    double target_margin = 0.0;
    std::uint64_t seed = 0;
};

/// Replaces whole channels of x with the NUN's channels, choosing the
/// smallest subset (then the closest) that reaches the target.
CounterfactualResult comte_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                    ClassLabel target, const ComteConfig& cfg = {});

/// x with channels in `channels` replaced by the donor's.
TimeSeries substitute_channels(const TimeSeries& x, const TimeSeries& donor, const std::vector<std::size_t>& channels);

/// x with time steps [start, end] of every channel replaced by the donor's.
TimeSeries transplant_window(const TimeSeries& x, const TimeSeries& donor, std::size_t start, std::size_t end);

}  // namespace cfx
