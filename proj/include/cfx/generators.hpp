#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/autoencoder.hpp"
#include "cfx/classifier.hpp"
#include "cfx/params.hpp"
#include "cfx/result.hpp"

namespace cfx {

/// wachter, tscf, native_guide, comte, evo, discord, greedy_window, latentcf.
const std::vector<std::string>& generator_ids();
bool is_generator_id(std::string_view id);
/// Throws ConfigError listing the valid ids.
void require_generator_id(std::string_view id);

bool generator_needs_gradient(std::string_view id);
bool generator_needs_autoencoder(std::string_view id);

/// Settings accepted by a generator's config section.
const std::vector<std::string>& generator_keys(std::string_view id);
void validate_generator_params(std::string_view id, const Params& params);

/// Autoencoder settings for latentcf: latent_dim (default min(16, C*T)),
/// ae_hidden, ae_epochs, ae_learning_rate.
std::size_t autoencoder_latent_dim(const Params& params, Shape shape);
MLPSpec autoencoder_spec(const Params& params, std::uint64_t seed);

struct GeneratorContext {
    const Classifier& model;
    const Dataset& train;
    /// Required by latentcf only.
    const Autoencoder* autoencoder = nullptr;
};

/// Runs one generator. Single-result generators yield a one-member set.
CounterfactualSet run_generator(std::string_view id, const Params& params, const GeneratorContext& ctx,
                                const TimeSeries& x, ClassLabel target, std::uint64_t seed);

}  // namespace cfx
