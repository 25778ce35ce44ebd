#include "cfx/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cfx/errors.hpp"

namespace cfx {

ClassLabel ProbVector::argmax() const {
    return static_cast<ClassLabel>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

ClassLabel ProbVector::runner_up() const {
    const ClassLabel top = argmax();
    std::size_t best = top == 0 ? 1 : 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (k != top && probs[k] > probs[best]) best = k;
    }
    return best;
}

void Classifier::check_input(const TimeSeries& x) const {
    if (x.shape() != input_shape()) {
        throw ShapeError("model expects shape " + to_string(input_shape()) + ", got " + to_string(x.shape()));
    }
}

std::vector<double> GradientClassifier::input_gradient(const TimeSeries& x, ClassLabel k) const {
    if (k >= num_classes()) throw ConfigError("class index " + std::to_string(k) + " out of range");
    std::vector<double> onehot(num_classes(), 0.0);
    onehot[k] = 1.0;
    return logit_vjp(x, onehot);
}

const GradientClassifier& require_gradient(const Classifier& model) {
    const auto* g = dynamic_cast<const GradientClassifier*>(&model);
    if (g == nullptr) throw CapabilityError("this generator needs a gradient-capable classifier (mlp)");
    return *g;
}

std::vector<double> input_gradient(const Classifier& model, const TimeSeries& x, ClassLabel k) {
    return require_gradient(model).input_gradient(x, k);
}

std::vector<double> softmax(std::span<const double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - top);
        total += out[k];
    }
    for (double& p : out) p /= total;
    return out;
}

KnnClassifier::KnnClassifier(Dataset train, std::size_t k, DistanceConfig metric)
    : train_(std::move(train)), k_(k), metric_(metric) {
    if (train_.empty()) throw TrainError("k-NN needs a non-empty training set");
    if (k_ == 0 || k_ > train_.size()) {
        throw TrainError("k must lie in [1, " + std::to_string(train_.size()) + "]");
    }
}

ProbVector KnnClassifier::predict_proba(const TimeSeries& x) const {
    check_input(x);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train_.size());
    for (std::size_t i = 0; i < train_.size(); ++i) dist.emplace_back(distance(x, train_[i].series, metric_), i);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    ProbVector out{std::vector<double>(train_.num_classes(), 0.0)};
    for (std::size_t n = 0; n < k_; ++n) out.probs[train_[dist[n].second].label] += 1.0 / static_cast<double>(k_);
    return out;
}

KnnClassifier train_knn(const Dataset& train, std::size_t k, const DistanceConfig& metric) {
    return KnnClassifier(train, k, metric);
}

MlpClassifier::MlpClassifier(DenseNet net, Shape input_shape, MLPSpec spec, double train_accuracy)
    : net_(std::move(net)), shape_(input_shape), spec_(std::move(spec)), train_accuracy_(train_accuracy) {
    if (net_.input_size() != shape_.size()) throw ShapeError("network input size does not match the series shape");
    if (net_.output_size() < 2) throw ShapeError("a classifier needs at least two outputs");
}

std::vector<double> MlpClassifier::logits(const TimeSeries& x) const {
    check_input(x);
    return net_.forward(x.values());
}

ProbVector MlpClassifier::predict_proba(const TimeSeries& x) const { return {softmax(logits(x))}; }

std::vector<double> MlpClassifier::logit_vjp(const TimeSeries& x, std::span<const double> weights) const {
    check_input(x);
    if (weights.size() != num_classes()) throw ShapeError("logit weights must have one entry per class");
    return net_.input_vjp(net_.forward_tape(x.values()), weights);
}

MlpClassifier train_mlp(const Dataset& train, const MLPSpec& spec) {
    if (train.empty()) throw TrainError("cannot train on an empty dataset");
    if (train.num_classes() < 2) throw TrainError("classification needs at least two classes");
    for (auto h : spec.hidden_sizes) {
        if (h == 0) throw TrainError("hidden layer sizes must be positive");
    }
    std::vector<std::size_t> sizes{train.shape().size()};
    sizes.insert(sizes.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
    sizes.push_back(train.num_classes());

    Rng init_rng = make_rng(spec.seed, {0x696e6974ULL});
    DenseNet net = DenseNet::glorot(sizes, spec.activation, Activation::identity, init_rng);

    std::vector<std::vector<double>> inputs;
    inputs.reserve(train.size());
    for (const auto& inst : train.instances()) inputs.emplace_back(inst.series.values().begin(), inst.series.values().end());

    const auto cross_entropy = [&](std::size_t sample, std::span<const double> logits, std::span<double> grad) {
        const auto p = softmax(logits);
        const ClassLabel y = train[sample].label;
        for (std::size_t k = 0; k < p.size(); ++k) grad[k] = p[k] - (k == y ? 1.0 : 0.0);
        return -std::log(std::max(p[y], 1e-300));
    };
    train_sgd(net, inputs, cross_entropy,
              {spec.learning_rate, spec.epochs, spec.batch_size, spec.momentum, spec.seed});

    MlpClassifier model(std::move(net), train.shape(), spec);
    return MlpClassifier(model.network(), train.shape(), spec, accuracy(model, train));
}

double accuracy(const Classifier& model, const Dataset& data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& inst : data.instances()) hits += model.predict(inst.series) == inst.label ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace cfx
