#include "cfx/autoencoder.hpp"

#include <algorithm>

#include "cfx/errors.hpp"

namespace cfx {

Autoencoder::Autoencoder(DenseNet encoder, DenseNet decoder, Shape shape, MLPSpec spec, double reconstruction_mse)
    : encoder_(std::move(encoder)),
      decoder_(std::move(decoder)),
      shape_(shape),
      spec_(std::move(spec)),
      reconstruction_mse_(reconstruction_mse) {
    if (encoder_.input_size() != shape_.size() || decoder_.output_size() != shape_.size()) {
        throw ShapeError("autoencoder sizes do not match the series shape");
    }
    if (encoder_.output_size() != decoder_.input_size()) throw ShapeError("encoder and decoder latent sizes differ");
}

std::vector<double> Autoencoder::encode(const TimeSeries& x) const {
    if (x.shape() != shape_) throw ShapeError("autoencoder expects shape " + to_string(shape_));
    return encoder_.forward(x.values());
}

TimeSeries Autoencoder::decode(std::span<const double> z) const {
    return TimeSeries(shape_.channels, shape_.length, decoder_.forward(z));
}

std::vector<double> Autoencoder::decoder_vjp(std::span<const double> z, std::span<const double> cotangent) const {
    return decoder_.input_vjp(decoder_.forward_tape(z), cotangent);
}

double reconstruction_mse(const Autoencoder& ae, const Dataset& data) {
    if (data.empty()) return 0.0;
    double total = 0.0;
    for (const auto& inst : data.instances()) {
        const auto rec = ae.reconstruct(inst.series);
        const auto a = inst.series.values();
        const auto b = rec.values();
        for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return total / static_cast<double>(data.size() * data.shape().size());
}

Autoencoder train_autoencoder(const Dataset& train, std::size_t latent_dim, const MLPSpec& spec) {
    if (latent_dim == 0) throw TrainError("latent dimension must be at least 1");
    if (train.empty()) throw TrainError("cannot train on an empty dataset");
    const std::size_t n = train.shape().size();

    // Joint network input -> hidden... -> latent -> reversed hidden... -> input,
    // split into encoder and decoder after training.
    std::vector<std::size_t> sizes{n};
    sizes.insert(sizes.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
    sizes.push_back(latent_dim);
    sizes.insert(sizes.end(), spec.hidden_sizes.rbegin(), spec.hidden_sizes.rend());
    sizes.push_back(n);

    Rng init_rng = make_rng(spec.seed, {0x61650000ULL});
    DenseNet joint = DenseNet::glorot(sizes, spec.activation, Activation::identity, init_rng);
    const std::size_t code_layer = spec.hidden_sizes.size();
    joint.layers()[code_layer].activation = Activation::identity;

    std::vector<std::vector<double>> inputs;
    inputs.reserve(train.size());
    for (const auto& inst : train.instances()) inputs.emplace_back(inst.series.values().begin(), inst.series.values().end());

    const double inv_n = 1.0 / static_cast<double>(n);
    const auto mse = [&](std::size_t sample, std::span<const double> out, std::span<double> grad) {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = out[i] - inputs[sample][i];
            loss += d * d;
            grad[i] = 2.0 * d * inv_n;
        }
        return loss * inv_n;
    };
    train_sgd(joint, inputs, mse, {spec.learning_rate, spec.epochs, spec.batch_size, spec.momentum, spec.seed});

    const auto& layers = joint.layers();
    DenseNet encoder({layers.begin(), layers.begin() + static_cast<std::ptrdiff_t>(code_layer + 1)});
    DenseNet decoder({layers.begin() + static_cast<std::ptrdiff_t>(code_layer + 1), layers.end()});
    Autoencoder ae(std::move(encoder), std::move(decoder), train.shape(), spec);
    const double mse_value = reconstruction_mse(ae, train);
    return Autoencoder(ae.encoder(), ae.decoder(), train.shape(), spec, mse_value);
}

}  // namespace cfx
