#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfx/classifier.hpp"
#include "cfx/timeseries.hpp"

namespace cfx {

/// One optimization step as logged by the gradient-based generators.
struct TraceEntry {
    std::size_t iteration = 0;
    double lambda = 0.0;
    double loss = 0.0;
    double validity = 0.0;
    double proximity = 0.0;
    double smoothness = 0.0;
    double sparsity = 0.0;
    double p_target = 0.0;
    bool margin_met = false;
};

struct CounterfactualResult {
    CounterfactualResult(TimeSeries x, TimeSeries cf) : original(std::move(x)), counterfactual(std::move(cf)) {}

    TimeSeries original;
    TimeSeries counterfactual;
    ClassLabel target = 0;
    ClassLabel achieved = 0;
    /// argmax(predict_proba(counterfactual)) == target.
    bool valid = false;
    /// valid and p_target >= 0.5 + target margin (argmax alone when the margin is 0).
    bool margin_met = false;
    std::string generator_id;
    std::size_t iterations = 0;
    std::size_t model_calls = 0;
    std::uint64_t seed = 0;
    std::vector<TraceEntry> trace;
    /// Generator-specific provenance (windows, channels, donors, ...).
    nlohmann::json metadata = nlohmann::json::object();
};

struct CounterfactualSet {
    std::vector<CounterfactualResult> members;
    bool budget_exhausted = false;
    std::size_t generations = 0;
    std::size_t model_calls = 0;

    const CounterfactualResult& best() const { return members.front(); }
};

/// Counts model invocations on behalf of a generator.
class ModelProbe {
public:
    explicit ModelProbe(const Classifier& model) : model_(model) {}

    ProbVector predict(const TimeSeries& x) {
        ++calls_;
        return model_.predict_proba(x);
    }
    std::vector<double> logits(const GradientClassifier& g, const TimeSeries& x) {
        ++calls_;
        return g.logits(x);
    }
    std::vector<double> logit_vjp(const GradientClassifier& g, const TimeSeries& x, std::span<const double> w) {
        ++calls_;
        return g.logit_vjp(x, w);
    }

    const Classifier& model() const noexcept { return model_; }
    std::size_t calls() const noexcept { return calls_; }

private:
    const Classifier& model_;
    std::size_t calls_ = 0;
};

/// Result for an input the model already assigns to `target`: x unchanged.
CounterfactualResult unchanged_result(const TimeSeries& x, ClassLabel target, const ProbVector& probs,
                                      std::string generator_id, std::uint64_t seed, double target_margin);

/// Fills achieved/valid/margin_met from a fresh prediction of result.counterfactual.
void settle_validity(CounterfactualResult& result, const ProbVector& probs, double target_margin);

/// Candidate acceptance used by every generator: argmax hits the target and
/// p_target clears 0.5 + margin. A zero margin reduces to the argmax test.
bool meets_target(const ProbVector& probs, ClassLabel target, double target_margin);

void check_target(const Classifier& model, ClassLabel target);

}  // namespace cfx
