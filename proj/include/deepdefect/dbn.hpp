#ifndef DEEPDEFECT_DBN_HPP
#define DEEPDEFECT_DBN_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "deepdefect/data.hpp"
#include "deepdefect/error.hpp"
#include "deepdefect/linalg.hpp"
#include "deepdefect/rbm.hpp"

namespace deepdefect {

/// Hidden layer widths, bottom to top, e.g. {30, 12}.
struct LayerSpec {
    std::vector<int> hidden_sizes;

    void validate() const {
        if (hidden_sizes.empty()) throw InvalidArgumentError("layer spec must have at least one hidden layer");
        for (int s : hidden_sizes)
            if (s < 1) throw InvalidArgumentError("hidden layer sizes must be positive");
    }

    bool operator==(const LayerSpec&) const = default;
};

struct DenseLayer {
    Matrix weights;  // (n_in x n_out)
    Vector bias;

    bool operator==(const DenseLayer& o) const { return weights == o.weights && bias == o.bias; }
};

/// Logistic hidden layers topped by a softmax head. The same type is used
/// as the gradient container in `classifier_loss_and_gradient`.
struct FeedforwardClassifier {
    std::vector<DenseLayer> hidden;
    DenseLayer head;

    Eigen::Index n_inputs() const { return hidden.empty() ? head.weights.rows() : hidden.front().weights.rows(); }
    Eigen::Index n_classes() const { return head.weights.cols(); }

    bool operator==(const FeedforwardClassifier&) const = default;
};

using FineTuneConfig = TrainConfig;

namespace detail {

inline std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer) {
    return seed ^ (0x9E3779B97F4A7C15ULL * (layer + 1));
}

inline void check_classifier_shapes(const FeedforwardClassifier& net) {
    Eigen::Index width = net.n_inputs();
    for (const auto& l : net.hidden) {
        require_dims(l.weights.rows() == width && l.bias.size() == l.weights.cols(), "classifier layers do not chain");
        width = l.weights.cols();
    }
    require_dims(net.head.weights.rows() == width && net.head.bias.size() == net.head.weights.cols(),
                 "softmax head does not chain with the top hidden layer");
}

inline void check_classifier_params(const FeedforwardClassifier& net, const std::string& where) {
    bool ok = within_limit(net.head.weights) && within_limit(net.head.bias);
    for (const auto& l : net.hidden) ok = ok && within_limit(l.weights) && within_limit(l.bias);
    if (!ok) throw NumericOverflowError(where + ": classifier parameters diverged (non-finite or |value| > 1e6)");
}

inline Matrix one_hot(std::span<const Label> labels, Eigen::Index n_classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), class_index(labels[i])) = 1.0;
    return y;
}

}  // namespace detail

/// Trains one RBM per hidden layer, each on the hidden probabilities of the
/// layer below. The bottom RBM has Gaussian visibles (z-scored input).
inline std::vector<RbmParams> greedy_pretrain(const Matrix& train_features, const LayerSpec& spec,
                                              const RbmTrainConfig& config) {
    spec.validate();
    if (train_features.rows() == 0) throw InvalidArgumentError("greedy_pretrain: empty data");
    std::vector<RbmParams> rbms;
    Matrix input = train_features;
    for (std::size_t layer = 0; layer < spec.hidden_sizes.size(); ++layer) {
        const auto kind = layer == 0 ? VisibleKind::Gaussian : VisibleKind::Bernoulli;
        RbmTrainConfig layer_config = config;
        layer_config.seed = detail::layer_seed(config.seed, layer);
        Rng init_rng(layer_config.seed);
        auto init = RbmParams::random(input.cols(), spec.hidden_sizes[layer], kind, init_rng);
        layer_config.seed += 1;
        auto trained = train_rbm(init, input, layer_config);
        input = hidden_probabilities(trained.params, input);
        rbms.push_back(std::move(trained.params));
    }
    return rbms;
}

/// Copies RBM weights and hidden biases into a classifier and adds a fresh
/// softmax head (weights ~ N(0, 0.01^2), bias zero).
inline FeedforwardClassifier unroll_to_classifier(std::span<const RbmParams> rbms, int n_classes, std::uint64_t seed) {
    if (rbms.empty()) throw InvalidArgumentError("unroll_to_classifier: no RBMs");
    if (n_classes < 2) throw InvalidArgumentError("unroll_to_classifier: need at least two classes");
    FeedforwardClassifier net;
    for (std::size_t i = 0; i < rbms.size(); ++i) {
        if (i > 0)
            require_dims(rbms[i].n_visible() == rbms[i - 1].n_hidden(),
                         "RBM " + std::to_string(i + 1) + " has " + std::to_string(rbms[i].n_visible()) +
                             " visible units but the layer below has " + std::to_string(rbms[i - 1].n_hidden()) + " hidden");
        net.hidden.push_back({rbms[i].weights, rbms[i].hidden_bias});
    }
    Rng rng(seed);
    net.head.weights = gaussian_matrix(rbms.back().n_hidden(), n_classes, 0.01, rng);
    net.head.bias = Vector::Zero(n_classes);
    return net;
}

/// Activations of every hidden layer; element 0 is the input itself.
inline std::vector<Matrix> hidden_activations(const FeedforwardClassifier& net, const Matrix& x) {
    require_dims(x.cols() == net.n_inputs(), "classifier input width " + std::to_string(x.cols()) + " != " +
                                                 std::to_string(net.n_inputs()));
    std::vector<Matrix> acts{x};
    acts.reserve(net.hidden.size() + 1);
    for (const auto& l : net.hidden) acts.push_back(logistic(add_row_bias(acts.back() * l.weights, l.bias)));
    return acts;
}

inline Matrix classifier_logits(const FeedforwardClassifier& net, const Matrix& x) {
    return add_row_bias(hidden_activations(net, x).back() * net.head.weights, net.head.bias);
}

struct LossAndGradient {
    double loss = 0.0;
    FeedforwardClassifier gradient;
};

/// Mean softmax cross-entropy over the batch and its gradient w.r.t. every
/// parameter.
inline LossAndGradient classifier_loss_and_gradient(const FeedforwardClassifier& net, const Matrix& x,
                                                    std::span<const Label> labels) {
    require_dims(static_cast<std::size_t>(x.rows()) == labels.size(), "features and labels differ in length");
    if (x.rows() == 0) throw InvalidArgumentError("empty batch");
    const auto acts = hidden_activations(net, x);
    const Matrix logits = add_row_bias(acts.back() * net.head.weights, net.head.bias);
    const Matrix probs = softmax_rows(logits);
    const Matrix y = detail::one_hot(labels, net.n_classes());
    const double m = static_cast<double>(x.rows());

    LossAndGradient out;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double top = logits.row(r).maxCoeff();
        const double log_z = top + std::log((logits.row(r).array() - top).exp().sum());
        out.loss -= (y.row(r).array() * (logits.row(r).array() - log_z)).sum();
    }
    out.loss /= m;

    Matrix delta = (probs - y) / m;
    out.gradient.head.weights = acts.back().transpose() * delta;
    out.gradient.head.bias = delta.colwise().sum().transpose();
    Matrix upstream = delta * net.head.weights.transpose();
    out.gradient.hidden.resize(net.hidden.size());
    for (std::size_t i = net.hidden.size(); i-- > 0;) {
        const Matrix& a = acts[i + 1];
        delta = upstream.array() * a.array() * (1.0 - a.array());
        out.gradient.hidden[i].weights = acts[i].transpose() * delta;
        out.gradient.hidden[i].bias = delta.colwise().sum().transpose();
        if (i > 0) upstream = delta * net.hidden[i].weights.transpose();
    }
    return out;
}

struct Prediction {
    Matrix probabilities;  // (n_samples x n_classes)
    std::vector<Label> labels;
};

/// Hard label is the argmax; ties go to the lower class index.
inline Prediction predict(const FeedforwardClassifier& net, const Matrix& features) {
    if (!features.allFinite()) throw InvalidArgumentError("predict: non-finite input");
    Prediction p;
    p.probabilities = softmax_rows(classifier_logits(net, features));
    p.labels.reserve(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index r = 0; r < p.probabilities.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < p.probabilities.cols(); ++c)
            if (p.probabilities(r, c) > p.probabilities(r, best)) best = c;
        p.labels.push_back(label_from_index(static_cast<int>(best)));
    }
    return p;
}

inline double misclassification_rate(const FeedforwardClassifier& net, const Matrix& x, std::span<const Label> labels) {
    const auto pred = predict(net, x);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) wrong += pred.labels[i] != labels[i];
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

struct FineTuneResult {
    FeedforwardClassifier classifier;
    std::vector<double> error_per_epoch;  // training misclassification rate after each epoch
};

/// Plain mini-batch SGD on softmax cross-entropy through every layer.
inline FineTuneResult fine_tune(const FeedforwardClassifier& classifier, const Matrix& train_features,
                                std::span<const Label> train_labels, const FineTuneConfig& config) {
    detail::check_classifier_shapes(classifier);
    require_dims(train_features.cols() == classifier.n_inputs(), "fine_tune: feature width mismatch");
    require_dims(static_cast<std::size_t>(train_features.rows()) == train_labels.size(), "fine_tune: label count mismatch");
    if (train_features.rows() == 0) throw InvalidArgumentError("fine_tune: empty data");
    config.validate(train_labels.size());

    Rng rng(config.seed);
    FineTuneResult result{classifier, {}};
    auto& net = result.classifier;
    const double lr = config.learning_rate;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto batches = epoch_batches(train_labels.size(), config.batch_size, rng);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            std::vector<Label> y;
            y.reserve(batches[b].size());
            for (std::size_t i : batches[b]) y.push_back(train_labels[i]);
            const auto g = classifier_loss_and_gradient(net, gather_rows(train_features, batches[b]), y);
            net.head.weights -= lr * g.gradient.head.weights;
            net.head.bias -= lr * g.gradient.head.bias;
            for (std::size_t l = 0; l < net.hidden.size(); ++l) {
                net.hidden[l].weights -= lr * g.gradient.hidden[l].weights;
                net.hidden[l].bias -= lr * g.gradient.hidden[l].bias;
            }
            detail::check_classifier_params(net, "fine_tune epoch " + std::to_string(epoch + 1) + ", batch " +
                                                     std::to_string(b + 1));
        }
        result.error_per_epoch.push_back(misclassification_rate(net, train_features, train_labels));
    }
    return result;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_DBN_HPP
