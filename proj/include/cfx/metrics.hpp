#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include <json.hpp>

#include "cfx/classifier.hpp"
#include "cfx/distances.hpp"
#include "cfx/result.hpp"

namespace cfx {

struct MetricReport {
    bool validity = false;
    ClassLabel achieved = 0;
    double p_target = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double dtw = 0.0;
    double frechet = 0.0;
    double l0_count = 0.0;
    double changed_fraction = 0.0;
    double segment_count = 0.0;
    double mean_segment_length = 0.0;
    double autocorr_distance = 0.0;
    double spectral_distance = 0.0;
    /// Absent when the target class has fewer than two training instances.
    std::optional<double> ood_score;
    double generation_time_ms = 0.0;
    double model_calls = 0.0;
};

nlohmann::json to_json(const MetricReport& report, bool include_timing = true);
MetricReport metric_report_from_json(const nlohmann::json& j);

/// Names of the numeric MetricReport fields, in report column order.
const std::vector<std::string>& metric_fields();
/// Numeric field by name; nullopt for an absent ood_score.
std::optional<double> metric_value(const MetricReport& report, std::string_view field);

/// Lag count used when none is given: min(20, T / 2).
std::size_t default_max_lag(std::size_t length);

/// L2 distance between the concatenated per-channel autocorrelations at
/// lags 1..K (biased, mean-removed; constant channels give zeros).
double autocorr_distance(const TimeSeries& a, const TimeSeries& b, std::optional<std::size_t> max_lag = std::nullopt);

/// Normalized one-sided periodogram (bins 0..floor(T/2)) of one channel;
/// uniform for an all-zero spectrum.
std::vector<double> periodogram(std::span<const double> channel);

/// Sum over channels of the L2 distance between normalized periodograms.
double spectral_distance(const TimeSeries& a, const TimeSeries& b);

/// Distance from cf to its nearest target-class instance over the mean
/// leave-one-out nearest-neighbour distance inside that class.
double ood_score(const Dataset& dataset, const TimeSeries& cf, ClassLabel target, const DistanceConfig& metric = {});

/// Mean pairwise distance among the members; 0 for a singleton.
double diversity(const CounterfactualSet& set, const DistanceConfig& metric = {});

struct EvalConfig {
    DistanceConfig metric;
    std::optional<std::size_t> dtw_band;
    double change_tolerance = 1e-6;
    std::optional<std::size_t> max_lag;
};

/// Every metric for one result. Validity is recomputed from the model.
MetricReport evaluate_one(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                          const CounterfactualResult& result, const EvalConfig& cfg = {});

/// Generator under test: (input, seed) -> result.
using GeneratorFn = std::function<CounterfactualResult(const TimeSeries&, std::uint64_t)>;

struct StabilityReport {
    double cf_distance_mean = 0.0;
    double validity_retention = 0.0;
    std::size_t failed_trials = 0;
};

/// Regenerates on x + eps_i and measures the L2 drift of the counterfactual;
/// separately perturbs cf(x) with independent noise and counts how often the
/// model still predicts the target.
StabilityReport stability(const GeneratorFn& generator, const Classifier& model, const TimeSeries& x, ClassLabel target,
                          double sigma, std::size_t n_trials, std::uint64_t seed);

}  // namespace cfx
