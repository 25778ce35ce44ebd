#include "cfx/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

double activate(Activation act, double v) {
    switch (act) {
        case Activation::relu: return v > 0.0 ? v : 0.0;
        case Activation::tanh: return std::tanh(v);
        case Activation::identity: return v;
    }
    return v;
}

double derivative(Activation act, double pre) {
    switch (act) {
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            const double t = std::tanh(pre);
            return 1.0 - t * t;
        }
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

// Backpropagates `cotangent` (d/d output) through every layer, optionally
// accumulating parameter gradients. Returns d/d input.
std::vector<double> backward(const std::vector<DenseLayer>& layers, const DenseNet::Tape& tape,
                             std::span<const double> cotangent, std::vector<DenseLayer>* grads) {
    std::vector<double> upstream(cotangent.begin(), cotangent.end());
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const auto& in = tape.inputs[l];
        const auto& pre = tape.pre[l];
        std::vector<double> delta(layer.outputs);
        for (std::size_t o = 0; o < layer.outputs; ++o) delta[o] = upstream[o] * derivative(layer.activation, pre[o]);

        if (grads) {
            auto& g = (*grads)[l];
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                if (delta[o] == 0.0) continue;
                double* row = g.weights.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) row[i] += delta[o] * in[i];
                g.bias[o] += delta[o];
            }
        }

        std::vector<double> down(layer.inputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            if (delta[o] == 0.0) continue;
            const double* row = layer.weights.data() + o * layer.inputs;
            for (std::size_t i = 0; i < layer.inputs; ++i) down[i] += row[i] * delta[o];
        }
        upstream = std::move(down);
    }
    return upstream;
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
    std::vector<DenseLayer> out = layers;
    for (auto& l : out) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return out;
}

}  // namespace

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity" || name == "linear") return Activation::identity;
    throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu, tanh or identity)");
}

std::string_view activation_name(Activation act) {
    switch (act) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "identity";
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs) {
            throw ShapeError("dense layer " + std::to_string(l) + " has inconsistent parameter sizes");
        }
        if (l > 0 && layers_[l - 1].outputs != layer.inputs) {
            throw ShapeError("dense layer " + std::to_string(l) + " input size does not match previous output");
        }
    }
}

DenseNet DenseNet::glorot(const std::vector<std::size_t>& sizes, Activation hidden, Activation output, Rng& rng) {
    if (sizes.size() < 2) throw ConfigError("a dense network needs at least input and output sizes");
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        layer.inputs = sizes[l];
        layer.outputs = sizes[l + 1];
        layer.activation = l + 2 == sizes.size() ? output : hidden;
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        std::uniform_real_distribution<double> dist(-limit, limit);
        layer.weights.resize(layer.inputs * layer.outputs);
        for (double& w : layer.weights) w = dist(rng);
        layer.bias.assign(layer.outputs, 0.0);
        layers.push_back(std::move(layer));
    }
    return DenseNet(std::move(layers));
}

std::size_t DenseNet::input_size() const { return layers_.empty() ? 0 : layers_.front().inputs; }
std::size_t DenseNet::output_size() const { return layers_.empty() ? 0 : layers_.back().outputs; }

DenseNet::Tape DenseNet::forward_tape(std::span<const double> x) const {
    if (x.size() != input_size()) {
        throw ShapeError("network expects " + std::to_string(input_size()) + " inputs, got " +
                         std::to_string(x.size()));
    }
    Tape tape;
    std::vector<double> current(x.begin(), x.end());
    for (const auto& layer : layers_) {
        std::vector<double> pre(layer.outputs);
        std::vector<double> post(layer.outputs);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double* row = layer.weights.data() + o * layer.inputs;
            double acc = layer.bias[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) acc += row[i] * current[i];
            pre[o] = acc;
            post[o] = activate(layer.activation, acc);
        }
        tape.inputs.push_back(std::move(current));
        tape.pre.push_back(std::move(pre));
        current = std::move(post);
    }
    tape.output = std::move(current);
    return tape;
}

std::vector<double> DenseNet::forward(std::span<const double> x) const { return forward_tape(x).output; }

std::vector<double> DenseNet::input_vjp(const Tape& tape, std::span<const double> cotangent) const {
    if (cotangent.size() != output_size()) throw ShapeError("cotangent size does not match network output");
    return backward(layers_, tape, cotangent, nullptr);
}

void DenseNet::accumulate_param_grads(const Tape& tape, std::span<const double> cotangent,
                                      std::vector<DenseLayer>& grads) const {
    backward(layers_, tape, cotangent, &grads);
}

double train_sgd(DenseNet& net, const std::vector<std::vector<double>>& inputs, const SampleLoss& loss,
                 const SgdOptions& options) {
    if (options.epochs == 0) throw TrainError("at least one epoch is required");
    if (options.batch_size == 0) throw TrainError("batch size must be positive");
    if (!(options.learning_rate > 0.0)) throw TrainError("learning rate must be positive");
    if (options.momentum < 0.0 || options.momentum >= 1.0) throw TrainError("momentum must lie in [0, 1)");
    if (inputs.empty()) throw TrainError("cannot train on an empty dataset");

    Rng rng = make_rng(options.seed, {0x73686675ULL});
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    auto velocity = zeros_like(net.layers());
    auto grads = zeros_like(net.layers());
    std::vector<double> out_grad(net.output_size());
    double epoch_loss = 0.0;

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t stop = std::min(order.size(), start + options.batch_size);
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) {
                std::fill(g.weights.begin(), g.weights.end(), 0.0);
                std::fill(g.bias.begin(), g.bias.end(), 0.0);
            }
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t sample = order[k];
                const auto tape = net.forward_tape(inputs[sample]);
                std::fill(out_grad.begin(), out_grad.end(), 0.0);
                epoch_loss += loss(sample, tape.output, out_grad);
                for (double& g : out_grad) g *= scale;
                net.accumulate_param_grads(tape, out_grad, grads);
            }
            auto& layers = net.layers();
            for (std::size_t l = 0; l < layers.size(); ++l) {
                for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
                    velocity[l].weights[i] = options.momentum * velocity[l].weights[i] - options.learning_rate * grads[l].weights[i];
                    layers[l].weights[i] += velocity[l].weights[i];
                }
                for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
                    velocity[l].bias[i] = options.momentum * velocity[l].bias[i] - options.learning_rate * grads[l].bias[i];
                    layers[l].bias[i] += velocity[l].bias[i];
                }
            }
        }
        epoch_loss /= static_cast<double>(inputs.size());
        if (!std::isfinite(epoch_loss)) throw TrainError(epoch, "loss diverged");
    }
    return epoch_loss;
}

}  // namespace cfx
