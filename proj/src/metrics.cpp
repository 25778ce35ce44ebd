#include "cfx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "cfx/errors.hpp"
#include "cfx/rng.hpp"

namespace cfx {

namespace {

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const std::size_t T = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(T);
    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    std::vector<double> r(max_lag, 0.0);
    if (std::sqrt(denom / static_cast<double>(T)) < 1e-12) return r;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (std::size_t t = 0; t + lag < T; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
        r[lag - 1] = num / denom;
    }
    return r;
}

double l2_between(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

const std::vector<std::string>& metric_fields() {
    static const std::vector<std::string> fields{
        "p_target",   "l1",          "l2",           "linf",          "dtw",
        "frechet",    "l0_count",    "changed_fraction", "segment_count", "mean_segment_length",
        "autocorr_distance", "spectral_distance", "ood_score", "generation_time_ms", "model_calls"};
    return fields;
}

std::optional<double> metric_value(const MetricReport& r, std::string_view f) {
    if (f == "p_target") return r.p_target;
    if (f == "l1") return r.l1;
    if (f == "l2") return r.l2;
    if (f == "linf") return r.linf;
    if (f == "dtw") return r.dtw;
    if (f == "frechet") return r.frechet;
    if (f == "l0_count") return r.l0_count;
    if (f == "changed_fraction") return r.changed_fraction;
    if (f == "segment_count") return r.segment_count;
    if (f == "mean_segment_length") return r.mean_segment_length;
    if (f == "autocorr_distance") return r.autocorr_distance;
    if (f == "spectral_distance") return r.spectral_distance;
    if (f == "ood_score") return r.ood_score;
    if (f == "generation_time_ms") return r.generation_time_ms;
    if (f == "model_calls") return r.model_calls;
    throw ConfigError("unknown metric field '" + std::string(f) + "'");
}

nlohmann::json to_json(const MetricReport& r, bool include_timing) {
    nlohmann::json j;
    j["validity"] = r.validity;
    j["achieved"] = r.achieved;
    for (const auto& f : metric_fields()) {
        if (f == "generation_time_ms" && !include_timing) continue;
        const auto v = metric_value(r, f);
        j[f] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    }
    return j;
}

MetricReport metric_report_from_json(const nlohmann::json& j) {
    MetricReport r;
    r.validity = j.at("validity").get<bool>();
    r.achieved = j.at("achieved").get<ClassLabel>();
    const auto num = [&](const char* key) { return j.contains(key) ? j.at(key).get<double>() : 0.0; };
    r.p_target = num("p_target");
    r.l1 = num("l1");
    r.l2 = num("l2");
    r.linf = num("linf");
    r.dtw = num("dtw");
    r.frechet = num("frechet");
    r.l0_count = num("l0_count");
    r.changed_fraction = num("changed_fraction");
    r.segment_count = num("segment_count");
    r.mean_segment_length = num("mean_segment_length");
    r.autocorr_distance = num("autocorr_distance");
    r.spectral_distance = num("spectral_distance");
    if (j.contains("ood_score") && !j.at("ood_score").is_null()) r.ood_score = j.at("ood_score").get<double>();
    r.generation_time_ms = num("generation_time_ms");
    r.model_calls = num("model_calls");
    return r;
}

std::size_t default_max_lag(std::size_t length) { return std::min<std::size_t>(20, length / 2); }

double autocorr_distance(const TimeSeries& a, const TimeSeries& b, std::optional<std::size_t> max_lag) {
    require_same_shape(a, b);
    const std::size_t T = a.length();
    const std::size_t K = max_lag.value_or(default_max_lag(T));
    if (K >= T) throw ConfigError("max_lag " + std::to_string(K) + " must be below the series length " + std::to_string(T));
    double sq = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        const auto ra = autocorrelation(a.channel(c), K);
        const auto rb = autocorrelation(b.channel(c), K);
        for (std::size_t k = 0; k < K; ++k) sq += (ra[k] - rb[k]) * (ra[k] - rb[k]);
    }
    return std::sqrt(sq);
}

std::vector<double> periodogram(std::span<const double> x) {
    const std::size_t T = x.size();
    const std::size_t bins = T / 2 + 1;
    std::vector<double> power(bins, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * t) % T) / static_cast<double>(T);
            re += x[t] * std::cos(angle);
            im -= x[t] * std::sin(angle);
        }
        power[k] = re * re + im * im;
        total += power[k];
    }
    if (total <= 0.0) {
        std::fill(power.begin(), power.end(), 1.0 / static_cast<double>(bins));
    } else {
        for (double& p : power) p /= total;
    }
    return power;
}

double spectral_distance(const TimeSeries& a, const TimeSeries& b) {
    require_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) sum += l2_between(periodogram(a.channel(c)), periodogram(b.channel(c)));
    return sum;
}

double ood_score(const Dataset& dataset, const TimeSeries& cf, ClassLabel target, const DistanceConfig& metric) {
    const auto members = dataset.indices_of_class(target);
    if (members.size() < 2) throw MetricUnavailable("ood_score needs at least two target-class training instances");
    double nearest = std::numeric_limits<double>::infinity();
    for (auto i : members) nearest = std::min(nearest, distance(cf, dataset[i].series, metric));

    double loo = 0.0;
    for (auto i : members) {
        double best = std::numeric_limits<double>::infinity();
        for (auto j : members) {
            if (i != j) best = std::min(best, distance(dataset[i].series, dataset[j].series, metric));
        }
        loo += best;
    }
    loo /= static_cast<double>(members.size());
    if (nearest == 0.0) return 0.0;
    if (loo == 0.0) throw MetricUnavailable("ood_score undefined: target-class instances coincide");
    return nearest / loo;
}

double diversity(const CounterfactualSet& set, const DistanceConfig& metric) {
    const auto& m = set.members;
    if (m.size() < 2) return 0.0;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            sum += distance(m[i].counterfactual, m[j].counterfactual, metric);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

MetricReport evaluate_one(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                          const CounterfactualResult& result, const EvalConfig& cfg) {
    const TimeSeries& cf = result.counterfactual;
    require_same_shape(x, cf);
    MetricReport r;
    const ProbVector probs = model.predict_proba(cf);
    r.achieved = probs.argmax();
    r.validity = r.achieved == result.target;
    r.p_target = probs[result.target];
    r.l1 = minkowski(x, cf, Norm::l1);
    r.l2 = minkowski(x, cf, Norm::l2);
    r.linf = minkowski(x, cf, Norm::linf);
    DistanceConfig dtw_cfg;
    dtw_cfg.metric = Metric::dtw;
    dtw_cfg.dtw_band = cfg.dtw_band;
    r.dtw = dtw(x, cf, dtw_cfg);
    r.frechet = frechet(x, cf);
    const ChangeMask mask = changed_segments(x, cf, cfg.change_tolerance);
    r.l0_count = static_cast<double>(mask.changed_count());
    r.changed_fraction = r.l0_count / static_cast<double>(x.size());
    r.segment_count = static_cast<double>(mask.segments.size());
    r.mean_segment_length = mask.mean_segment_length();
    r.autocorr_distance = autocorr_distance(x, cf, cfg.max_lag);
    r.spectral_distance = spectral_distance(x, cf);
    try {
        r.ood_score = ood_score(dataset, cf, result.target, cfg.metric);
    } catch (const MetricUnavailable&) {
        r.ood_score.reset();
    }
    r.model_calls = static_cast<double>(result.model_calls);
    return r;
}

StabilityReport stability(const GeneratorFn& generator, const Classifier& model, const TimeSeries& x, ClassLabel target,
                          double sigma, std::size_t n_trials, std::uint64_t seed) {
    if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
    if (n_trials == 0) throw ConfigError("n_trials must be at least 1");
    const auto perturb = [&](const TimeSeries& s, Rng& rng) {
        TimeSeries out = s;
        if (sigma > 0.0) {
            std::normal_distribution<double> noise(0.0, sigma);
            for (double& v : out.values()) v += noise(rng);
        }
        return out;
    };

    StabilityReport report;
    std::optional<CounterfactualResult> base;
    try {
        base = generator(x, seed);
    } catch (const Error&) {
        // Nothing to compare against: every trial counts as failed.
        report.failed_trials = n_trials;
        return report;
    }
    double distance_sum = 0.0;
    std::size_t distance_n = 0;
    std::size_t retained = 0;
    for (std::size_t i = 0; i < n_trials; ++i) {
        Rng input_rng = make_rng(seed, {i, 0});
        Rng cf_rng = make_rng(seed, {i, 1});
        try {
            const CounterfactualResult moved = generator(perturb(x, input_rng), seed);
            distance_sum += minkowski(base->counterfactual, moved.counterfactual, Norm::l2);
            ++distance_n;
        } catch (const Error&) {
            ++report.failed_trials;
        }
        if (model.predict(perturb(base->counterfactual, cf_rng)) == target) ++retained;
    }
    report.cf_distance_mean = distance_n == 0 ? 0.0 : distance_sum / static_cast<double>(distance_n);
    report.validity_retention = static_cast<double>(retained) / static_cast<double>(n_trials);
    return report;
}

}  // namespace cfx
