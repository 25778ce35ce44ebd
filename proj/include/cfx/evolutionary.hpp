#pragma once

#include <cstdint>

#include "cfx/classifier.hpp"
#include "cfx/distances.hpp"
#include "cfx/pareto.hpp"
#include "cfx/result.hpp"

namespace cfx {

struct EvoConfig {
    std::size_t population_size = 100;
    std::size_t generations = 100;
    double gaussian_point_prob = 0.05;
    double gaussian_sigma = 0.1;
    double segment_swap_prob = 0.3;
    /// Copies a random window of x back into the child, undoing edits there.
    double segment_revert_prob = 0.3;
    /// Segment lengths for NUN transplants, as fractions of T.
    double segment_min_fraction = 0.05;
    double segment_max_fraction = 0.3;
    double crossover_prob = 0.9;
    double target_margin = 0.05;
    std::size_t max_model_calls = 200000;
    /// Metric for NUN retrieval and the change tolerance for the sparsity objectives.
    DistanceConfig metric;
    std::uint64_t seed = 0;
};

struct ParetoMember {
    TimeSeries series;
    ObjectiveVector objectives;
};

/// Objective vector of a candidate x' for the original x.
ObjectiveVector evaluate_objectives(const TimeSeries& x, const TimeSeries& candidate, const ProbVector& probs,
                                    ClassLabel target, double target_margin, double tolerance);

/// NSGA-II over candidate series seeded from x and NUN-segment
/// transplants. Returns the valid members of the final first front sorted
/// by proximity, or the member with the smallest validity gap (flagged
/// invalid) when none is valid.
CounterfactualSet evolve_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                  ClassLabel target, const EvoConfig& cfg = {});

}  // namespace cfx
