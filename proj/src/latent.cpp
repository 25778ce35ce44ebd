#include "cfx/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cfx/errors.hpp"
#include "cfx/optimization.hpp"

namespace cfx {

namespace {

constexpr std::size_t kMaxHalvings = 8;
constexpr double kManifoldSlack = 1e-6;

double reconstruction_error(const Autoencoder& ae, const TimeSeries& s) {
    return minkowski(ae.reconstruct(s), s, Norm::l2);
}

struct Point {
    std::vector<double> z;
    TimeSeries decoded;
    std::vector<double> logits;
    std::size_t rival = 0;
    double hinge = 0.0;
    double loss = 0.0;
};

}  // namespace

std::vector<double> latent_logit_vjp(const GradientClassifier& model, const Autoencoder& ae,
                                     std::span<const double> z, std::span<const double> weights) {
    const TimeSeries decoded = ae.decode(z);
    const auto cot = model.logit_vjp(decoded, weights);
    return ae.decoder_vjp(z, cot);
}

CounterfactualResult latentcf_generate(const Classifier& model, const Autoencoder& ae, const TimeSeries& x,
                                       ClassLabel target, const LatentConfig& cfg) {
    if (cfg.latent_weight < 0.0) throw ConfigError("latent_weight must be >= 0");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (cfg.target_margin < 0.0 || cfg.target_margin >= 0.5) throw ConfigError("target_margin must lie in [0, 0.5)");
    const GradientClassifier& grad = require_gradient(model);
    check_target(model, target);
    if (ae.shape() != x.shape()) throw ShapeError("autoencoder shape " + to_string(ae.shape()) + " does not match input " + to_string(x.shape()));

    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        return unchanged_result(x, target, initial, "latentcf", cfg.seed, cfg.target_margin);
    }

    const double margin = logit_margin(cfg.target_margin, model.num_classes());
    const std::vector<double> z0 = ae.encode(x);
    const double x_recon = reconstruction_error(ae, x);

    const auto evaluate = [&](std::vector<double> z) {
        TimeSeries decoded = ae.decode(z);
        Point p{std::move(z), std::move(decoded), {}};
        p.logits = probe.logits(grad, p.decoded);
        p.rival = target == 0 ? 1 : 0;
        for (std::size_t k = 0; k < p.logits.size(); ++k) {
            if (k != target && p.logits[k] > p.logits[p.rival]) p.rival = k;
        }
        p.hinge = std::max(0.0, p.logits[p.rival] - p.logits[target] + margin);
        double anchor = 0.0;
        for (std::size_t i = 0; i < p.z.size(); ++i) anchor += (p.z[i] - z0[i]) * (p.z[i] - z0[i]);
        p.loss = p.hinge + cfg.latent_weight * anchor;
        return p;
    };

    std::optional<TimeSeries> best;
    double best_distance = std::numeric_limits<double>::infinity();
    std::optional<TimeSeries> fallback;
    double fallback_hinge = std::numeric_limits<double>::infinity();
    std::size_t rejected_off_manifold = 0;
    const auto consider = [&](const Point& p) {
        const bool on_manifold = reconstruction_error(ae, p.decoded) <= x_recon + kManifoldSlack;
        if (!on_manifold) {
            ++rejected_off_manifold;
            return;
        }
        if (meets_target(ProbVector{softmax(p.logits)}, target, cfg.target_margin)) {
            const double d = minkowski(x, p.decoded, Norm::l2);
            if (d < best_distance) {
                best_distance = d;
                best = p.decoded;
            }
        } else if (p.hinge < fallback_hinge) {
            fallback_hinge = p.hinge;
            fallback = p.decoded;
        }
    };

    Point current = evaluate(z0);
    consider(current);
    std::vector<TraceEntry> trace;
    std::size_t iterations = 0;
    for (; iterations < cfg.max_iters; ++iterations) {
        std::vector<double> g(current.z.size(), 0.0);
        if (current.hinge > 0.0) {
            std::vector<double> w(model.num_classes(), 0.0);
            w[current.rival] = 1.0;
            w[target] = -1.0;
            const auto cot = probe.logit_vjp(grad, current.decoded, w);
            g = ae.decoder_vjp(current.z, cot);
        }
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * cfg.latent_weight * (current.z[i] - z0[i]);
        if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) break;

        double step = cfg.learning_rate;
        std::optional<Point> next;
        for (std::size_t h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
            std::vector<double> z = current.z;
            for (std::size_t i = 0; i < z.size(); ++i) z[i] -= step * g[i];
            Point trial = evaluate(std::move(z));
            if (trial.loss < current.loss) {
                next = std::move(trial);
                break;
            }
        }
        if (!next) break;
        current = std::move(*next);
        // Projected descent: an iterate the autoencoder cannot reproduce is
        // replaced by encode(decode(z)) before it is judged.
        if (reconstruction_error(ae, current.decoded) > x_recon + kManifoldSlack) {
            current = evaluate(ae.encode(current.decoded));
        }
        consider(current);
        TraceEntry e;
        e.iteration = iterations + 1;
        e.lambda = cfg.latent_weight;
        e.loss = current.loss;
        e.validity = current.hinge;
        e.proximity = minkowski(x, current.decoded, Norm::l2);
        const ProbVector probs{softmax(current.logits)};
        e.p_target = probs[target];
        e.margin_met = meets_target(probs, target, cfg.target_margin);
        trace.push_back(e);
    }

    // With no admissible iterate at all, x itself is the only series known to pass the reconstruction check.
    TimeSeries chosen = best ? *best : (fallback ? *fallback : x);
    CounterfactualResult result{x, std::move(chosen)};
    result.target = target;
    result.generator_id = "latentcf";
    result.seed = cfg.seed;
    result.iterations = iterations;
    result.trace = std::move(trace);
    result.metadata["latent_dim"] = ae.latent_dim();
    result.metadata["latent_weight"] = cfg.latent_weight;
    result.metadata["reconstruction_error_x"] = x_recon;
    result.metadata["rejected_off_manifold"] = rejected_off_manifold;
    settle_validity(result, probe.predict(result.counterfactual), cfg.target_margin);
    result.model_calls = probe.calls();
    return result;
}

}  // namespace cfx
