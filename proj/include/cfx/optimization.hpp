#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/distances.hpp"
#include "cfx/result.hpp"

namespace cfx {

struct OptConfig {
    double lambda_init = 0.1;
    double lambda_growth = 1.5;
    double lambda_max = 1e4;
    double learning_rate = 0.05;
    std::size_t max_iters = 2000;
    std::size_t inner_iters = 200;
    /// l1 or l2; linf is rejected.
    Norm proximity = Norm::l2;
    double smoothness_weight = 0.0;
    double sparsity_weight = 0.0;
    /// Required probability headroom: p_target >= 0.5 + margin.
    double target_margin = 0.05;
    std::uint64_t seed = 0;
    /// Optional per-channel [min, max] clamp, e.g. the training-set range.
    std::optional<std::vector<std::pair<double, double>>> channel_bounds;
};

/// Defaults for the smoothness/sparsity-regularized variant.
OptConfig tscf_defaults();

/// Logit-space hinge margin equivalent to `p_target >= 0.5 + margin`
/// against every other class: log((0.5 + m)(K - 1) / (0.5 - m)).
double logit_margin(double target_margin, std::size_t num_classes);

/// Per-channel [min, max] over a dataset, for OptConfig::channel_bounds.
std::vector<std::pair<double, double>> channel_ranges(const Dataset& data);

/// Minimizes hinge(logits) + d(x, x') / lambda by gradient descent with
/// backtracking, growing lambda each stage and keeping the closest iterate
/// that reaches the target with margin.
CounterfactualResult wachter_generate(const GradientClassifier& model, const TimeSeries& x, ClassLabel target,
                                      const OptConfig& cfg = {});

/// Same loop with total-variation and L1 penalties on the perturbation,
/// both weighted by 1/lambda alongside the proximity term. The kept iterate
/// is the one with the lowest penalized distance.
CounterfactualResult tscf_generate(const GradientClassifier& model, const TimeSeries& x, ClassLabel target,
                                   const OptConfig& cfg = tscf_defaults());

/// Total variation of a perturbation along time, summed over channels.
double total_variation(const TimeSeries& delta);

}  // namespace cfx
