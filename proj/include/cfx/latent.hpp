#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cfx/autoencoder.hpp"
#include "cfx/classifier.hpp"
#include "cfx/result.hpp"

namespace cfx {

struct LatentConfig {
    /// Weight mu of the anchor term mu * ||z - z0||^2.
    double latent_weight = 0.01;
    double learning_rate = 0.1;
    std::size_t max_iters = 500;
    double target_margin = 0.05;
    std::uint64_t seed = 0;
};

/// d(weights . logits(decode(z))) / dz.
std::vector<double> latent_logit_vjp(const GradientClassifier& model, const Autoencoder& ae,
                                     std::span<const double> z, std::span<const double> weights);

/// Gradient descent on hinge(logits(decode(z))) + mu ||z - z0||^2 from
/// z0 = encode(x). An iterate whose reconstruction error exceeds x's is
/// replaced by encode(decode(z)) before the next step. Returns the decoded
/// iterate closest to x in L2 among those reaching the target whose
/// reconstruction error does not exceed x's.
CounterfactualResult latentcf_generate(const Classifier& model, const Autoencoder& ae, const TimeSeries& x,
                                       ClassLabel target, const LatentConfig& cfg = {});

}  // namespace cfx
