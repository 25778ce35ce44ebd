#include "cfx/generators.hpp"

#include <algorithm>

#include "cfx/errors.hpp"
#include "cfx/evolutionary.hpp"
#include "cfx/instance.hpp"
#include "cfx/latent.hpp"
#include "cfx/optimization.hpp"
#include "cfx/segment.hpp"

namespace cfx {

namespace {

const std::vector<std::string> kOptimizationKeys{
    "target_margin", "lambda_init", "lambda_growth", "lambda_max", "learning_rate", "max_iters", "inner_iters",
    "proximity",     "smoothness_weight", "sparsity_weight", "clamp"};

std::vector<std::string> with_metric(std::vector<std::string> keys) {
    keys.insert(keys.end(), {"metric", "dtw_band"});
    return keys;
}

DistanceConfig metric_from(const Params& p) {
    DistanceConfig cfg;
    cfg.metric = parse_metric(p.get_string("metric", "l2"));
    cfg.dtw_band = p.get_optional_size("dtw_band");
    return cfg;
}

OptConfig opt_from(const Params& p, OptConfig cfg, const Dataset& train, std::uint64_t seed) {
    cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
    cfg.lambda_init = p.get_double("lambda_init", cfg.lambda_init);
    cfg.lambda_growth = p.get_double("lambda_growth", cfg.lambda_growth);
    cfg.lambda_max = p.get_double("lambda_max", cfg.lambda_max);
    cfg.learning_rate = p.get_double("learning_rate", cfg.learning_rate);
    cfg.max_iters = p.get_size("max_iters", cfg.max_iters);
    cfg.inner_iters = p.get_size("inner_iters", cfg.inner_iters);
    const std::string norm = p.get_string("proximity", cfg.proximity == Norm::l1 ? "l1" : "l2");
    if (norm == "l1") {
        cfg.proximity = Norm::l1;
    } else if (norm == "l2") {
        cfg.proximity = Norm::l2;
    } else {
        throw ConfigError("proximity must be l1 or l2, got '" + norm + "'");
    }
    cfg.smoothness_weight = p.get_double("smoothness_weight", cfg.smoothness_weight);
    cfg.sparsity_weight = p.get_double("sparsity_weight", cfg.sparsity_weight);
    if (p.get_bool("clamp", false)) cfg.channel_bounds = channel_ranges(train);
    cfg.seed = seed;
    return cfg;
}

CounterfactualSet single(CounterfactualResult r) {
    CounterfactualSet set;
    set.model_calls = r.model_calls;
    set.members.push_back(std::move(r));
    return set;
}

}  // namespace

const std::vector<std::string>& generator_ids() {
    static const std::vector<std::string> ids{"wachter", "tscf",    "native_guide",  "comte",
                                              "evo",     "discord", "greedy_window", "latentcf"};
    return ids;
}

bool is_generator_id(std::string_view id) {
    const auto& ids = generator_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

void require_generator_id(std::string_view id) {
    if (is_generator_id(id)) return;
    std::string list;
    for (const auto& g : generator_ids()) list += (list.empty() ? "" : ", ") + g;
    throw ConfigError("unknown method '" + std::string(id) + "'; valid ids: " + list);
}

bool generator_needs_gradient(std::string_view id) { return id == "wachter" || id == "tscf" || id == "latentcf"; }

bool generator_needs_autoencoder(std::string_view id) { return id == "latentcf"; }

const std::vector<std::string>& generator_keys(std::string_view id) {
    static const std::vector<std::string> optimization = kOptimizationKeys;
    static const std::vector<std::string> native_guide =
        with_metric({"target_margin", "saliency_window", "max_expand"});
    static const std::vector<std::string> comte = with_metric({"target_margin", "exact_below"});
    static const std::vector<std::string> evo = with_metric(
        {"target_margin", "population_size", "generations", "gaussian_point_prob", "gaussian_sigma",
         "segment_swap_prob", "segment_revert_prob", "segment_min_fraction", "segment_max_fraction", "crossover_prob", "max_model_calls"});
    static const std::vector<std::string> discord{"target_margin", "m", "k"};
    static const std::vector<std::string> greedy = with_metric({"target_margin", "window", "max_windows"});
    static const std::vector<std::string> latent{"target_margin", "latent_weight", "learning_rate", "max_iters",
                                                 "latent_dim",    "ae_hidden",     "ae_epochs",     "ae_learning_rate"};
    require_generator_id(id);
    if (id == "wachter" || id == "tscf") return optimization;
    if (id == "native_guide") return native_guide;
    if (id == "comte") return comte;
    if (id == "evo") return evo;
    if (id == "discord") return discord;
    if (id == "greedy_window") return greedy;
    return latent;
}

void validate_generator_params(std::string_view id, const Params& params) {
    params.require_known(generator_keys(id), "generator." + std::string(id));
}

std::size_t autoencoder_latent_dim(const Params& params, Shape shape) {
    const std::size_t d = params.get_size("latent_dim", std::min<std::size_t>(16, shape.size()));
    if (d == 0) throw ConfigError("latent_dim must be at least 1");
    return d;
}

MLPSpec autoencoder_spec(const Params& params, std::uint64_t seed) {
    MLPSpec spec;
    spec.hidden_sizes = params.get_size_list("ae_hidden", {64});
    spec.activation = Activation::tanh;
    spec.epochs = params.get_size("ae_epochs", 200);
    spec.learning_rate = params.get_double("ae_learning_rate", 0.05);
    spec.seed = seed;
    return spec;
}

CounterfactualSet run_generator(std::string_view id, const Params& p, const GeneratorContext& ctx, const TimeSeries& x,
                                ClassLabel target, std::uint64_t seed) {
    validate_generator_params(id, p);
    if (id == "wachter") {
        return single(wachter_generate(require_gradient(ctx.model), x, target, opt_from(p, OptConfig{}, ctx.train, seed)));
    }
    if (id == "tscf") {
        return single(tscf_generate(require_gradient(ctx.model), x, target, opt_from(p, tscf_defaults(), ctx.train, seed)));
    }
    if (id == "native_guide") {
        NativeGuideConfig cfg;
        cfg.metric = metric_from(p);
        cfg.saliency_window = p.get_size("saliency_window", cfg.saliency_window);
        cfg.max_expand = p.get_size("max_expand", cfg.max_expand);
        cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
        cfg.seed = seed;
        return single(native_guide_generate(ctx.model, ctx.train, x, target, cfg));
    }
    if (id == "comte") {
        ComteConfig cfg;
        cfg.metric = metric_from(p);
        cfg.exact_below = p.get_size("exact_below", cfg.exact_below);
        cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
        cfg.seed = seed;
        return single(comte_generate(ctx.model, ctx.train, x, target, cfg));
    }
    if (id == "evo") {
        EvoConfig cfg;
        cfg.metric = metric_from(p);
        cfg.population_size = p.get_size("population_size", cfg.population_size);
        cfg.generations = p.get_size("generations", cfg.generations);
        cfg.gaussian_point_prob = p.get_double("gaussian_point_prob", cfg.gaussian_point_prob);
        cfg.gaussian_sigma = p.get_double("gaussian_sigma", cfg.gaussian_sigma);
        cfg.segment_swap_prob = p.get_double("segment_swap_prob", cfg.segment_swap_prob);
        cfg.segment_revert_prob = p.get_double("segment_revert_prob", cfg.segment_revert_prob);
        cfg.segment_min_fraction = p.get_double("segment_min_fraction", cfg.segment_min_fraction);
        cfg.segment_max_fraction = p.get_double("segment_max_fraction", cfg.segment_max_fraction);
        cfg.crossover_prob = p.get_double("crossover_prob", cfg.crossover_prob);
        cfg.max_model_calls = p.get_size("max_model_calls", cfg.max_model_calls);
        cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
        cfg.seed = seed;
        return evolve_generate(ctx.model, ctx.train, x, target, cfg);
    }
    if (id == "discord") {
        DiscordConfig cfg;
        cfg.m = p.get_size("m", cfg.m);
        cfg.k = p.get_size("k", cfg.k);
        cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
        cfg.seed = seed;
        return single(discord_generate(ctx.model, ctx.train, x, target, cfg));
    }
    if (id == "greedy_window") {
        GreedyWindowConfig cfg;
        cfg.metric = metric_from(p);
        cfg.window = p.get_size("window", cfg.window);
        cfg.max_windows = p.get_size("max_windows", cfg.max_windows);
        cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
        cfg.seed = seed;
        return single(greedy_window_generate(ctx.model, ctx.train, x, target, cfg));
    }
    // latentcf
    if (ctx.autoencoder == nullptr) throw ConfigError("latentcf needs a trained autoencoder");
    LatentConfig cfg;
    cfg.latent_weight = p.get_double("latent_weight", cfg.latent_weight);
    cfg.learning_rate = p.get_double("learning_rate", cfg.learning_rate);
    cfg.max_iters = p.get_size("max_iters", cfg.max_iters);
    cfg.target_margin = p.get_double("target_margin", cfg.target_margin);
    cfg.seed = seed;
    return single(latentcf_generate(ctx.model, *ctx.autoencoder, x, target, cfg));
}

}  // namespace cfx
