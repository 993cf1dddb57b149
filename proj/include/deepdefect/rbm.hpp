#ifndef DEEPDEFECT_RBM_HPP
#define DEEPDEFECT_RBM_HPP

#include <concepts>
#include <random>
#include <string>
#include <vector>

#include "deepdefect/error.hpp"
#include "deepdefect/linalg.hpp"

namespace deepdefect {

enum class VisibleKind { Gaussian, Bernoulli };

/// Bipartite RBM. `weights` is (n_visible x n_hidden).
struct RbmParams {
    Matrix weights;
    Vector visible_bias;
    Vector hidden_bias;
    VisibleKind visible_kind = VisibleKind::Bernoulli;

    Eigen::Index n_visible() const noexcept { return weights.rows(); }
    Eigen::Index n_hidden() const noexcept { return weights.cols(); }

    /// Weights ~ N(0, 0.01^2), biases zero.
    static RbmParams random(Eigen::Index n_visible, Eigen::Index n_hidden, VisibleKind kind, Rng& rng) {
        RbmParams p;
        p.weights = gaussian_matrix(n_visible, n_hidden, 0.01, rng);
        p.visible_bias = Vector::Zero(n_visible);
        p.hidden_bias = Vector::Zero(n_hidden);
        p.visible_kind = kind;
        return p;
    }

    bool operator==(const RbmParams& o) const {
        return visible_kind == o.visible_kind && weights == o.weights && visible_bias == o.visible_bias &&
               hidden_bias == o.hidden_bias;
    }
};

using RbmTrainConfig = TrainConfig;

/// p(h = 1 | v) for every row of `v`.
inline Matrix hidden_probabilities(const RbmParams& params, const Matrix& v) {
    require_dims(v.cols() == params.n_visible(), "hidden_probabilities: input width " + std::to_string(v.cols()) +
                                                     " != n_visible " + std::to_string(params.n_visible()));
    if (!v.allFinite()) throw InvalidArgumentError("hidden_probabilities: non-finite input");
    return logistic(add_row_bias(v * params.weights, params.hidden_bias));
}

/// Bernoulli visibles give p(v = 1 | h); Gaussian visibles give the
/// unit-variance mean (no noise).
inline Matrix visible_reconstruction(const RbmParams& params, const Matrix& h) {
    require_dims(h.cols() == params.n_hidden(), "visible_reconstruction: input width " + std::to_string(h.cols()) +
                                                    " != n_hidden " + std::to_string(params.n_hidden()));
    Matrix pre = add_row_bias(h * params.weights.transpose(), params.visible_bias);
    if (params.visible_kind == VisibleKind::Bernoulli) return logistic(pre);
    return pre;
}

/// Draws binary hidden states from their probabilities. Swappable so tests
/// can pin h0.
template <typename S>
concept HiddenSampler = requires(S s, const Matrix& probs) {
    { s(probs) } -> std::convertible_to<Matrix>;
};

struct BernoulliSampler {
    Rng* rng;

    Matrix operator()(const Matrix& probs) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix out(probs.rows(), probs.cols());
        for (Eigen::Index c = 0; c < probs.cols(); ++c)
            for (Eigen::Index r = 0; r < probs.rows(); ++r) out(r, c) = u(*rng) < probs(r, c) ? 1.0 : 0.0;
        return out;
    }
};

struct Cd1Result {
    RbmParams params;
    double reconstruction_error = 0.0;
};

inline void check_rbm_params(const RbmParams& p, const std::string& where) {
    if (!within_limit(p.weights) || !within_limit(p.visible_bias) || !within_limit(p.hidden_bias))
        throw NumericOverflowError(where + ": RBM parameters diverged (non-finite or |value| > 1e6)");
}

/// One contrastive-divergence step (k = 1). h0 is sampled; v1 and p1 are
/// mean-field. The returned error is the batch mean of |v0 - v1|^2 / n_visible.
template <HiddenSampler Sampler>
Cd1Result cd1_update(const RbmParams& params, const Matrix& v0, double learning_rate, Sampler&& sample) {
    require_dims(v0.cols() == params.n_visible(), "cd1_update: batch width mismatch");
    if (v0.rows() == 0) throw InvalidArgumentError("cd1_update: empty batch");
    if (!(learning_rate >= 0.0)) throw InvalidArgumentError("cd1_update: learning_rate must be non-negative");

    const Matrix p0 = hidden_probabilities(params, v0);
    const Matrix h0 = sample(p0);
    const Matrix v1 = visible_reconstruction(params, h0);
    const Matrix p1 = hidden_probabilities(params, v1);

    const double scale = learning_rate / static_cast<double>(v0.rows());
    Cd1Result out{params, 0.0};
    out.params.weights += scale * (v0.transpose() * p0 - v1.transpose() * p1);
    out.params.visible_bias += scale * (v0 - v1).colwise().sum().transpose();
    out.params.hidden_bias += scale * (p0 - p1).colwise().sum().transpose();
    check_rbm_params(out.params, "cd1_update");

    out.reconstruction_error =
        (v0 - v1).rowwise().squaredNorm().mean() / static_cast<double>(params.n_visible());
    return out;
}

struct RbmTrainResult {
    RbmParams params;
    std::vector<double> error_per_epoch;
};

/// Mini-batch CD-1 training. Each epoch reshuffles from the seeded stream.
inline RbmTrainResult train_rbm(const RbmParams& init, const Matrix& data, const RbmTrainConfig& config) {
    if (data.rows() == 0) throw InvalidArgumentError("train_rbm: empty data");
    require_dims(data.cols() == init.n_visible(), "train_rbm: data width mismatch");
    config.validate(static_cast<std::size_t>(data.rows()));

    Rng rng(config.seed);
    BernoulliSampler sampler{&rng};
    RbmTrainResult result{init, {}};
    result.error_per_epoch.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto batches = epoch_batches(static_cast<std::size_t>(data.rows()), config.batch_size, rng);
        double total = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            try {
                auto step = cd1_update(result.params, gather_rows(data, batches[b]), config.learning_rate, sampler);
                result.params = std::move(step.params);
                total += step.reconstruction_error;
            } catch (const NumericOverflowError& e) {
                throw NumericOverflowError("epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(b + 1) + ": " +
                                           e.what());
            }
        }
        result.error_per_epoch.push_back(total / static_cast<double>(batches.size()));
    }
    return result;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_RBM_HPP
