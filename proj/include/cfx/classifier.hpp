#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cfx/dense.hpp"
#include "cfx/distances.hpp"
#include "cfx/timeseries.hpp"

namespace cfx {

/// Class probabilities; entries in [0, 1] summing to 1.
struct ProbVector {
    std::vector<double> probs;

    std::size_t size() const noexcept { return probs.size(); }
    double operator[](std::size_t k) const { return probs[k]; }
    /// Highest probability; ties go to the lower class index.
    ClassLabel argmax() const;
    /// Second-highest class (the default counterfactual target).
    ClassLabel runner_up() const;
};

class Classifier {
public:
    virtual ~Classifier() = default;

    virtual std::size_t num_classes() const = 0;
    virtual Shape input_shape() const = 0;
    virtual ProbVector predict_proba(const TimeSeries& x) const = 0;

    ClassLabel predict(const TimeSeries& x) const { return predict_proba(x).argmax(); }

protected:
    void check_input(const TimeSeries& x) const;
};

/// Classifier exposing exact input gradients of its pre-softmax logits.
class GradientClassifier : public Classifier {
public:
    virtual std::vector<double> logits(const TimeSeries& x) const = 0;

    /// d(weights . logits) / dx, same layout as x.values(). One backward pass
    /// gives the gradient of any linear combination of logits.
    virtual std::vector<double> logit_vjp(const TimeSeries& x, std::span<const double> weights) const = 0;

    /// d logit_k / dx.
    std::vector<double> input_gradient(const TimeSeries& x, ClassLabel k) const;
};

/// Dispatches to GradientClassifier; CapabilityError for black-box models.
std::vector<double> input_gradient(const Classifier& model, const TimeSeries& x, ClassLabel k);
const GradientClassifier& require_gradient(const Classifier& model);

std::vector<double> softmax(std::span<const double> logits);

/// k-nearest-neighbour vote. Distance ties go to the lower training index.
class KnnClassifier final : public Classifier {
public:
    KnnClassifier(Dataset train, std::size_t k, DistanceConfig metric);

    std::size_t num_classes() const override { return train_.num_classes(); }
    Shape input_shape() const override { return train_.shape(); }
    ProbVector predict_proba(const TimeSeries& x) const override;

    const Dataset& training_set() const noexcept { return train_; }
    std::size_t k() const noexcept { return k_; }
    const DistanceConfig& metric() const noexcept { return metric_; }

private:
    Dataset train_;
    std::size_t k_;
    DistanceConfig metric_;
};

KnnClassifier train_knn(const Dataset& train, std::size_t k, const DistanceConfig& metric);

struct MLPSpec {
    std::vector<std::size_t> hidden_sizes{64};
    Activation activation = Activation::relu;
    std::uint64_t seed = 0;
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double momentum = 0.9;

    bool operator==(const MLPSpec&) const = default;
};

/// Fully connected network over the flattened [channel][time] input with
/// a linear logit layer.
class MlpClassifier final : public GradientClassifier {
public:
    MlpClassifier(DenseNet net, Shape input_shape, MLPSpec spec = {}, double train_accuracy = 0.0);

    std::size_t num_classes() const override { return net_.output_size(); }
    Shape input_shape() const override { return shape_; }
    ProbVector predict_proba(const TimeSeries& x) const override;
    std::vector<double> logits(const TimeSeries& x) const override;
    std::vector<double> logit_vjp(const TimeSeries& x, std::span<const double> weights) const override;

    const DenseNet& network() const noexcept { return net_; }
    const MLPSpec& spec() const noexcept { return spec_; }
    double train_accuracy() const noexcept { return train_accuracy_; }

private:
    DenseNet net_;
    Shape shape_;
    MLPSpec spec_;
    double train_accuracy_;
};

/// Mini-batch SGD with momentum on softmax cross-entropy; deterministic in spec.seed.
MlpClassifier train_mlp(const Dataset& train, const MLPSpec& spec);

/// Fraction of instances whose prediction equals the label.
double accuracy(const Classifier& model, const Dataset& data);

}  // namespace cfx
