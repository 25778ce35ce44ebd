#pragma once

#include <span>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/dense.hpp"

namespace cfx {

/// Mirrored fully connected autoencoder. The code layer and the
/// reconstruction layer are linear; hidden layers use spec.activation.
class Autoencoder {
public:
    Autoencoder(DenseNet encoder, DenseNet decoder, Shape shape, MLPSpec spec = {}, double reconstruction_mse = 0.0);

    std::vector<double> encode(const TimeSeries& x) const;
    TimeSeries decode(std::span<const double> z) const;
    TimeSeries reconstruct(const TimeSeries& x) const { return decode(encode(x)); }

    /// d(cotangent . decode(z)) / dz.
    std::vector<double> decoder_vjp(std::span<const double> z, std::span<const double> cotangent) const;

    std::size_t latent_dim() const { return encoder_.output_size(); }
    Shape shape() const noexcept { return shape_; }
    const DenseNet& encoder() const noexcept { return encoder_; }
    const DenseNet& decoder() const noexcept { return decoder_; }
    const MLPSpec& spec() const noexcept { return spec_; }
    double reconstruction_mse() const noexcept { return reconstruction_mse_; }

private:
    DenseNet encoder_;
    DenseNet decoder_;
    Shape shape_;
    MLPSpec spec_;
    double reconstruction_mse_;
};

/// Trains on mean squared reconstruction error; deterministic in spec.seed.
Autoencoder train_autoencoder(const Dataset& train, std::size_t latent_dim, const MLPSpec& spec);

double reconstruction_mse(const Autoencoder& ae, const Dataset& data);

}  // namespace cfx
