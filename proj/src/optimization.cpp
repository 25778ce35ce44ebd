#include "cfx/optimization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr std::size_t kMaxHalvings = 8;
// |d| is smoothed to sqrt(d^2 + eps^2) - eps inside the descent so the
// total-variation gradient does not chatter around zero differences.
constexpr double kTvEps = 1e-3;

double smooth_abs(double d) { return std::sqrt(d * d + kTvEps * kTvEps) - kTvEps; }

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct Evaluation {
    double loss = 0.0;
    double validity = 0.0;
    double proximity = 0.0;  // raw d(x, x')
    double smoothness = 0.0;
    double sparsity = 0.0;
    double cost = 0.0;  // proximity plus weighted penalties
    std::vector<double> logits;
    ProbVector probs;
    std::size_t rival = 0;  // strongest non-target class
};

class Objective {
public:
    Objective(const GradientClassifier& model, ModelProbe& probe, const TimeSeries& x, ClassLabel target,
              const OptConfig& cfg)
        : model_(model),
          probe_(probe),
          x_(x),
          target_(target),
          cfg_(cfg),
          margin_(logit_margin(cfg.target_margin, model.num_classes())) {}

    Evaluation evaluate(const TimeSeries& xp, double lambda) {
        Evaluation e;
        e.logits = probe_.logits(model_, xp);
        e.probs = {softmax(e.logits)};
        e.rival = target_ == 0 ? 1 : 0;
        for (std::size_t k = 0; k < e.logits.size(); ++k) {
            if (k != target_ && e.logits[k] > e.logits[e.rival]) e.rival = k;
        }
        e.validity = std::max(0.0, e.logits[e.rival] - e.logits[target_] + margin_);

        const auto a = x_.values();
        const auto b = xp.values();
        double l1 = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = b[i] - a[i];
            l1 += std::abs(d);
            sq += d * d;
        }
        e.proximity = cfg_.proximity == Norm::l1 ? l1 : std::sqrt(sq);
        e.sparsity = l1;
        double smooth_tv = 0.0;
        if (cfg_.smoothness_weight > 0.0) std::tie(e.smoothness, smooth_tv) = tv(xp);
        e.cost = e.proximity + cfg_.smoothness_weight * e.smoothness + cfg_.sparsity_weight * e.sparsity;
        // The penalties share the proximity term's 1/lambda weight.
        e.loss = e.validity +
                 (e.proximity + cfg_.smoothness_weight * smooth_tv + cfg_.sparsity_weight * e.sparsity) / lambda;
        return e;
    }

    std::vector<double> gradient(const TimeSeries& xp, const Evaluation& e, double lambda) {
        const std::size_t n = xp.size();
        std::vector<double> g(n, 0.0);
        if (e.validity > 0.0) {
            std::vector<double> w(model_.num_classes(), 0.0);
            w[e.rival] = 1.0;
            w[target_] = -1.0;
            g = probe_.logit_vjp(model_, xp, w);
        }
        const auto a = x_.values();
        const auto b = xp.values();
        if (cfg_.proximity == Norm::l1) {
            for (std::size_t i = 0; i < n; ++i) g[i] += sign(b[i] - a[i]) / lambda;
        } else if (e.proximity > 0.0) {
            for (std::size_t i = 0; i < n; ++i) g[i] += (b[i] - a[i]) / (e.proximity * lambda);
        }
        if (cfg_.sparsity_weight > 0.0) {
            for (std::size_t i = 0; i < n; ++i) g[i] += cfg_.sparsity_weight * sign(b[i] - a[i]) / lambda;
        }
        if (cfg_.smoothness_weight > 0.0) {
            const std::size_t len = xp.length();
            for (std::size_t c = 0; c < xp.channels(); ++c) {
                for (std::size_t t = 0; t + 1 < len; ++t) {
                    const std::size_t i = c * len + t;
                    const double d = (b[i + 1] - a[i + 1]) - (b[i] - a[i]);
                    const double s = cfg_.smoothness_weight * d / std::sqrt(d * d + kTvEps * kTvEps) / lambda;
                    g[i + 1] += s;
                    g[i] -= s;
                }
            }
        }
        return g;
    }

private:
    /// Exact and smoothed total variation of x' - x.
    std::pair<double, double> tv(const TimeSeries& xp) const {
        double exact = 0.0, smooth = 0.0;
        for (std::size_t c = 0; c < xp.channels(); ++c) {
            for (std::size_t t = 0; t + 1 < xp.length(); ++t) {
                const double d = (xp(c, t + 1) - x_(c, t + 1)) - (xp(c, t) - x_(c, t));
                exact += std::abs(d);
                smooth += smooth_abs(d);
            }
        }
        return {exact, smooth};
    }

    const GradientClassifier& model_;
    ModelProbe& probe_;
    const TimeSeries& x_;
    ClassLabel target_;
    const OptConfig& cfg_;
    double margin_;
};

void validate(const OptConfig& cfg) {
    if (!(cfg.lambda_init > 0.0)) throw ConfigError("lambda_init must be positive");
    if (!(cfg.lambda_growth > 1.0)) throw ConfigError("lambda_growth must exceed 1");
    if (!(cfg.lambda_max >= cfg.lambda_init)) throw ConfigError("lambda_max must be at least lambda_init");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (cfg.inner_iters == 0) throw ConfigError("inner_iters must be positive");
    if (cfg.proximity == Norm::linf) throw ConfigError("proximity must be l1 or l2");
    if (cfg.smoothness_weight < 0.0 || cfg.sparsity_weight < 0.0) throw ConfigError("penalty weights must be >= 0");
    if (cfg.target_margin < 0.0 || cfg.target_margin >= 0.5) throw ConfigError("target_margin must lie in [0, 0.5)");
}

void clamp(TimeSeries& xp, const OptConfig& cfg) {
    if (!cfg.channel_bounds) return;
    const auto& bounds = *cfg.channel_bounds;
    if (bounds.size() != xp.channels()) throw ConfigError("channel_bounds needs one range per channel");
    for (std::size_t c = 0; c < xp.channels(); ++c) {
        for (double& v : xp.channel(c)) v = std::clamp(v, bounds[c].first, bounds[c].second);
    }
}

CounterfactualResult descend(const GradientClassifier& model, const TimeSeries& x, ClassLabel target,
                             const OptConfig& cfg, std::string generator_id) {
    validate(cfg);
    check_target(model, target);
    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        return unchanged_result(x, target, initial, std::move(generator_id), cfg.seed, cfg.target_margin);
    }

    Objective objective(model, probe, x, target, cfg);
    TimeSeries current = x;
    clamp(current, cfg);

    // Best hit by the regularized cost, so TSCF keeps what its penalties bought.
    std::optional<TimeSeries> best;
    double best_cost = std::numeric_limits<double>::infinity();
    // Fallback when the target is never reached: lowest hinge, then closest.
    TimeSeries fallback = current;
    std::pair<double, double> fallback_key{std::numeric_limits<double>::infinity(), 0.0};

    std::vector<TraceEntry> trace;
    std::size_t iteration = 0;
    double lambda = cfg.lambda_init;

    const auto observe = [&](const TimeSeries& xp, const Evaluation& e) {
        const bool hit = meets_target(e.probs, target, cfg.target_margin);
        trace.push_back({iteration, lambda, e.loss, e.validity, e.proximity, e.smoothness, e.sparsity,
                         e.probs[target], hit});
        if (hit && e.cost < best_cost) {
            best_cost = e.cost;
            best = xp;
        }
        const std::pair<double, double> key{e.validity, e.cost};
        if (key < fallback_key) {
            fallback_key = key;
            fallback = xp;
        }
    };

    Evaluation eval = objective.evaluate(current, lambda);
    observe(current, eval);

    while (iteration < cfg.max_iters) {
        eval = objective.evaluate(current, lambda);
        for (std::size_t inner = 0; inner < cfg.inner_iters && iteration < cfg.max_iters; ++inner) {
            ++iteration;
            const auto grad = objective.gradient(current, eval, lambda);
            double step = cfg.learning_rate;
            bool accepted = false;
            for (std::size_t h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
                TimeSeries candidate = current;
                auto v = candidate.values();
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= step * grad[i];
                clamp(candidate, cfg);
                Evaluation next = objective.evaluate(candidate, lambda);
                if (next.loss <= eval.loss) {
                    current = std::move(candidate);
                    eval = std::move(next);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;  // stationary at this lambda; a deterministic retry would fail again
            observe(current, eval);
        }
        lambda = std::min(lambda * cfg.lambda_growth, cfg.lambda_max);
    }

    CounterfactualResult result{x, best ? *best : fallback};
    result.target = target;
    result.generator_id = std::move(generator_id);
    result.iterations = iteration;
    result.seed = cfg.seed;
    result.trace = std::move(trace);
    result.metadata["proximity"] = cfg.proximity == Norm::l1 ? "l1" : "l2";
    result.metadata["final_lambda"] = lambda;
    result.metadata["smoothness_weight"] = cfg.smoothness_weight;
    result.metadata["sparsity_weight"] = cfg.sparsity_weight;
    settle_validity(result, probe.predict(result.counterfactual), cfg.target_margin);
    result.model_calls = probe.calls();
    return result;
}

}  // namespace

OptConfig tscf_defaults() {
    OptConfig cfg;
    cfg.smoothness_weight = 0.5;
    cfg.sparsity_weight = 0.05;
    return cfg;
}

double logit_margin(double target_margin, std::size_t num_classes) {
    const double k = static_cast<double>(std::max<std::size_t>(num_classes, 2) - 1);
    return std::log((0.5 + target_margin) * k / (0.5 - target_margin));
}

std::vector<std::pair<double, double>> channel_ranges(const Dataset& data) {
    std::vector<std::pair<double, double>> out(data.channels(), {std::numeric_limits<double>::infinity(),
                                                                 -std::numeric_limits<double>::infinity()});
    for (const auto& inst : data.instances()) {
        for (std::size_t c = 0; c < data.channels(); ++c) {
            for (double v : inst.series.channel(c)) {
                out[c].first = std::min(out[c].first, v);
                out[c].second = std::max(out[c].second, v);
            }
        }
    }
    return out;
}

double total_variation(const TimeSeries& delta) {
    double total = 0.0;
    for (std::size_t c = 0; c < delta.channels(); ++c) {
        for (std::size_t t = 0; t + 1 < delta.length(); ++t) total += std::abs(delta(c, t + 1) - delta(c, t));
    }
    return total;
}

CounterfactualResult wachter_generate(const GradientClassifier& model, const TimeSeries& x, ClassLabel target,
                                      const OptConfig& cfg) {
    OptConfig plain = cfg;
    plain.smoothness_weight = 0.0;
    plain.sparsity_weight = 0.0;
    return descend(model, x, target, plain, "wachter");
}

CounterfactualResult tscf_generate(const GradientClassifier& model, const TimeSeries& x, ClassLabel target,
                                   const OptConfig& cfg) {
    return descend(model, x, target, cfg, "tscf");
}

}  // namespace cfx
