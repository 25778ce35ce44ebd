#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "cfx/rng.hpp"

namespace cfx {

enum class Activation { relu, tanh, identity };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation act);

/// Fully connected layer: out = act(W in + b), W stored row-major [out][in].
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    Activation activation = Activation::identity;
    std::vector<double> weights;
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

/// Stack of dense layers with exact reverse-mode gradients.
class DenseNet {
public:
    DenseNet() = default;
    explicit DenseNet(std::vector<DenseLayer> layers);

    /// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
    static DenseNet glorot(const std::vector<std::size_t>& sizes, Activation hidden, Activation output, Rng& rng);

    /// Pre- and post-activation values of every layer for one input.
    struct Tape {
        std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
        std::vector<std::vector<double>> pre;     // W in + b
        std::vector<double> output;
    };

    std::vector<double> forward(std::span<const double> x) const;
    Tape forward_tape(std::span<const double> x) const;

    /// Vector-Jacobian product: d(cotangent . output) / d input.
    std::vector<double> input_vjp(const Tape& tape, std::span<const double> cotangent) const;

    /// Accumulates d(cotangent . output) / d params into `grads` (same layout as layers).
    void accumulate_param_grads(const Tape& tape, std::span<const double> cotangent,
                                std::vector<DenseLayer>& grads) const;

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    std::size_t input_size() const;
    std::size_t output_size() const;

    bool operator==(const DenseNet&) const = default;

private:
    std::vector<DenseLayer> layers_;
};

struct SgdOptions {
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

/// Per-sample loss: given the network output, returns the loss and writes
/// d loss / d output into `grad`.
using SampleLoss = std::function<double(std::size_t sample, std::span<const double> output, std::span<double> grad)>;

/// Mini-batch SGD with momentum over `inputs`. Returns the mean loss of the
/// last epoch; throws TrainError naming the epoch if the loss stops being finite.
double train_sgd(DenseNet& net, const std::vector<std::vector<double>>& inputs, const SampleLoss& loss,
                 const SgdOptions& options);

}  // namespace cfx
