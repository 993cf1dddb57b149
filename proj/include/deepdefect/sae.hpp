#ifndef DEEPDEFECT_SAE_HPP
#define DEEPDEFECT_SAE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "deepdefect/dbn.hpp"
#include "deepdefect/error.hpp"
#include "deepdefect/linalg.hpp"

namespace deepdefect {

enum class OutputKind { Linear, Logistic };

/// Untied sparse autoencoder. The same type carries gradients.
struct SparseAutoencoderParams {
    Matrix encoder_weights;  // (n_in x n_hidden)
    Vector encoder_bias;
    Matrix decoder_weights;  // (n_hidden x n_in)
    Vector decoder_bias;
    OutputKind output_kind = OutputKind::Linear;

    Eigen::Index n_inputs() const noexcept { return encoder_weights.rows(); }
    Eigen::Index n_hidden() const noexcept { return encoder_weights.cols(); }

    static SparseAutoencoderParams random(Eigen::Index n_in, Eigen::Index n_hidden, OutputKind kind, Rng& rng) {
        SparseAutoencoderParams p;
        p.encoder_weights = gaussian_matrix(n_in, n_hidden, 0.01, rng);
        p.encoder_bias = Vector::Zero(n_hidden);
        p.decoder_weights = gaussian_matrix(n_hidden, n_in, 0.01, rng);
        p.decoder_bias = Vector::Zero(n_in);
        p.output_kind = kind;
        return p;
    }

    bool operator==(const SparseAutoencoderParams& o) const {
        return output_kind == o.output_kind && encoder_weights == o.encoder_weights && encoder_bias == o.encoder_bias &&
               decoder_weights == o.decoder_weights && decoder_bias == o.decoder_bias;
    }
};

struct SparsityConfig {
    double rho = 0.05;
    double beta = 3.0;

    void validate() const {
        if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgumentError("sparsity target rho must lie in (0, 1)");
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgumentError("sparsity weight beta must be >= 0");
    }

    bool operator==(const SparsityConfig&) const = default;
};

using SaeTrainConfig = TrainConfig;

inline constexpr double kSparsityClamp = 1e-8;

struct SaeForward {
    Matrix hidden;
    Matrix reconstruction;
};

inline SaeForward sae_forward(const SparseAutoencoderParams& p, const Matrix& x) {
    require_dims(x.cols() == p.n_inputs(), "sae_forward: input width " + std::to_string(x.cols()) + " != " +
                                               std::to_string(p.n_inputs()));
    SaeForward f;
    f.hidden = logistic(add_row_bias(x * p.encoder_weights, p.encoder_bias));
    f.reconstruction = add_row_bias(f.hidden * p.decoder_weights, p.decoder_bias);
    if (p.output_kind == OutputKind::Logistic) f.reconstruction = logistic(f.reconstruction);
    return f;
}

/// Sum over hidden units of KL(rho || rho_hat_j), with rho_hat clamped to
/// [1e-8, 1 - 1e-8].
inline double kl_sparsity(double rho, const Vector& rho_hat) {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgumentError("kl_sparsity: rho must lie in (0, 1)");
    double total = 0.0;
    for (Eigen::Index j = 0; j < rho_hat.size(); ++j) {
        const double q = std::clamp(rho_hat(j), kSparsityClamp, 1.0 - kSparsityClamp);
        total += rho * std::log(rho / q) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - q));
    }
    return std::max(total, 0.0);
}

struct SaeLossAndGradient {
    double loss = 0.0;
    SparseAutoencoderParams gradient;
};

/// loss = (1/2m) sum |x - x_hat|^2 + beta * sum_j KL(rho || rho_hat_j),
/// rho_hat being the batch mean of each hidden activation.
inline SaeLossAndGradient sae_loss_and_gradient(const SparseAutoencoderParams& p, const Matrix& x,
                                                const SparsityConfig& sparsity) {
    if (x.rows() == 0) throw InvalidArgumentError("sae_loss_and_gradient: empty batch");
    sparsity.validate();
    const double m = static_cast<double>(x.rows());
    const auto f = sae_forward(p, x);
    const Vector rho_hat = f.hidden.colwise().mean().transpose();
    const double rho = sparsity.rho;

    SaeLossAndGradient out;
    const Matrix diff = f.reconstruction - x;
    out.loss = diff.squaredNorm() / (2.0 * m) + sparsity.beta * kl_sparsity(rho, rho_hat);

    Matrix d_out = diff / m;
    if (p.output_kind == OutputKind::Logistic)
        d_out = (d_out.array() * f.reconstruction.array() * (1.0 - f.reconstruction.array())).matrix();

    out.gradient.output_kind = p.output_kind;
    out.gradient.decoder_weights = f.hidden.transpose() * d_out;
    out.gradient.decoder_bias = d_out.colwise().sum().transpose();

    // dKL/d(rho_hat_j) spread evenly over the batch; zero where the clamp is active.
    RowVector sparse_term(rho_hat.size());
    for (Eigen::Index j = 0; j < rho_hat.size(); ++j) {
        const double q = rho_hat(j);
        const bool clamped = q < kSparsityClamp || q > 1.0 - kSparsityClamp;
        sparse_term(j) = clamped ? 0.0 : sparsity.beta * (-rho / q + (1.0 - rho) / (1.0 - q)) / m;
    }
    Matrix d_hidden = d_out * p.decoder_weights.transpose();
    d_hidden.rowwise() += sparse_term;
    const Matrix d_pre = (d_hidden.array() * f.hidden.array() * (1.0 - f.hidden.array())).matrix();
    out.gradient.encoder_weights = x.transpose() * d_pre;
    out.gradient.encoder_bias = d_pre.colwise().sum().transpose();
    return out;
}

struct SaeTrainResult {
    SparseAutoencoderParams params;
    std::vector<double> loss_per_epoch;  // mean batch loss within each epoch
};

inline SaeTrainResult train_sae(const SparseAutoencoderParams& init, const Matrix& data, const SparsityConfig& sparsity,
                                const SaeTrainConfig& config) {
    if (data.rows() == 0) throw InvalidArgumentError("train_sae: empty data");
    require_dims(data.cols() == init.n_inputs(), "train_sae: data width mismatch");
    sparsity.validate();
    config.validate(static_cast<std::size_t>(data.rows()));

    Rng rng(config.seed);
    SaeTrainResult result{init, {}};
    auto& p = result.params;
    const double lr = config.learning_rate;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto batches = epoch_batches(static_cast<std::size_t>(data.rows()), config.batch_size, rng);
        double total = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto g = sae_loss_and_gradient(p, gather_rows(data, batches[b]), sparsity);
            total += g.loss;
            p.encoder_weights -= lr * g.gradient.encoder_weights;
            p.encoder_bias -= lr * g.gradient.encoder_bias;
            p.decoder_weights -= lr * g.gradient.decoder_weights;
            p.decoder_bias -= lr * g.gradient.decoder_bias;
            if (!std::isfinite(g.loss) || !within_limit(p.encoder_weights) || !within_limit(p.encoder_bias) ||
                !within_limit(p.decoder_weights) || !within_limit(p.decoder_bias))
                throw NumericOverflowError("train_sae epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(b + 1) +
                                           ": autoencoder parameters diverged (non-finite or |value| > 1e6)");
        }
        result.loss_per_epoch.push_back(total / static_cast<double>(batches.size()));
    }
    return result;
}

/// Layer 1 reconstructs z-scored input linearly; deeper layers reconstruct
/// (0, 1) activations through a logistic output.
inline std::vector<SparseAutoencoderParams> greedy_stack_sae(const Matrix& train_features, const LayerSpec& spec,
                                                             const SparsityConfig& sparsity, const SaeTrainConfig& config) {
    spec.validate();
    if (train_features.rows() == 0) throw InvalidArgumentError("greedy_stack_sae: empty data");
    std::vector<SparseAutoencoderParams> encoders;
    Matrix input = train_features;
    for (std::size_t layer = 0; layer < spec.hidden_sizes.size(); ++layer) {
        const auto kind = layer == 0 ? OutputKind::Linear : OutputKind::Logistic;
        SaeTrainConfig layer_config = config;
        layer_config.seed = detail::layer_seed(config.seed, layer);
        Rng init_rng(layer_config.seed);
        auto init = SparseAutoencoderParams::random(input.cols(), spec.hidden_sizes[layer], kind, init_rng);
        layer_config.seed += 1;
        auto trained = train_sae(init, input, sparsity, layer_config);
        input = sae_forward(trained.params, input).hidden;
        encoders.push_back(std::move(trained.params));
    }
    return encoders;
}

/// Encoder halves become the classifier's hidden layers; the head is fresh.
inline FeedforwardClassifier encoders_to_classifier(std::span<const SparseAutoencoderParams> encoders, int n_classes,
                                                    std::uint64_t seed) {
    if (encoders.empty()) throw InvalidArgumentError("encoders_to_classifier: no encoders");
    if (n_classes < 2) throw InvalidArgumentError("encoders_to_classifier: need at least two classes");
    FeedforwardClassifier net;
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        if (i > 0)
            require_dims(encoders[i].n_inputs() == encoders[i - 1].n_hidden(),
                         "encoder " + std::to_string(i + 1) + " does not chain with the layer below");
        net.hidden.push_back({encoders[i].encoder_weights, encoders[i].encoder_bias});
    }
    Rng rng(seed);
    net.head.weights = gaussian_matrix(encoders.back().n_hidden(), n_classes, 0.01, rng);
    net.head.bias = Vector::Zero(n_classes);
    return net;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_SAE_HPP
