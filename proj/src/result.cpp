#include "cfx/result.hpp"

#include "cfx/errors.hpp"

namespace cfx {

bool meets_target(const ProbVector& probs, ClassLabel target, double target_margin) {
    if (probs.argmax() != target) return false;
    return target_margin <= 0.0 || probs[target] >= 0.5 + target_margin;
}

void settle_validity(CounterfactualResult& result, const ProbVector& probs, double target_margin) {
    result.achieved = probs.argmax();
    result.valid = result.achieved == result.target;
    result.margin_met = meets_target(probs, result.target, target_margin);
}

CounterfactualResult unchanged_result(const TimeSeries& x, ClassLabel target, const ProbVector& probs,
                                      std::string generator_id, std::uint64_t seed, double target_margin) {
    CounterfactualResult r{x, x};
    r.target = target;
    r.generator_id = std::move(generator_id);
    r.seed = seed;
    r.model_calls = 1;
    r.metadata["already_target"] = true;
    settle_validity(r, probs, target_margin);
    return r;
}

void check_target(const Classifier& model, ClassLabel target) {
    if (target >= model.num_classes()) {
        throw ConfigError("target class " + std::to_string(target) + " out of range for " +
                          std::to_string(model.num_classes()) + " classes");
    }
}

}  // namespace cfx
