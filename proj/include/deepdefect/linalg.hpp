#ifndef DEEPDEFECT_LINALG_HPP
#define DEEPDEFECT_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "deepdefect/error.hpp"

namespace deepdefect {

/// Samples are rows.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

/// Parameters whose magnitude exceeds this are treated as a diverged run.
inline constexpr double kParameterLimit = 1e6;

/// Numerically stable logistic, clamped so the result stays strictly inside
/// (0, 1) even where the exact value rounds to 0 or 1.
inline double logistic(double x) noexcept {
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    double y;
    if (x >= 0.0) {
        y = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        y = e / (1.0 + e);
    }
    return std::clamp(y, lo, hi);
}

inline Matrix logistic(const Matrix& x) {
    return x.unaryExpr([](double v) { return logistic(v); });
}

/// Row-wise softmax, shifted by the row maximum.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double top = logits.row(r).maxCoeff();
        RowVector e = (logits.row(r).array() - top).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

/// Adds `bias` to every row.
inline Matrix add_row_bias(Matrix m, const Vector& bias) {
    m.rowwise() += bias.transpose();
    return m;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline bool within_limit(const Eigen::Ref<const Matrix>& m) {
    return m.allFinite() && (m.size() == 0 || m.cwiseAbs().maxCoeff() <= kParameterLimit);
}

inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

/// Matrix of N(0, stddev^2) entries.
inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
    return m;
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

inline void require_dims(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

/// Shared mini-batch hyperparameters for RBM pretraining, autoencoder
/// pretraining and supervised fine-tuning.
struct TrainConfig {
    int epochs = 1;
    int batch_size = 4;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;

    /// `learning_rate == 0` is tolerated as a probe value.
    void validate(std::size_t n_samples) const {
        if (epochs < 0) throw InvalidArgumentError("epochs must be non-negative");
        if (batch_size < 1) throw InvalidArgumentError("batch_size must be positive");
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw InvalidArgumentError("learning_rate must be finite and non-negative");
        if (n_samples > 0 && static_cast<std::size_t>(batch_size) > n_samples)
            throw InvalidArgumentError("batch_size " + std::to_string(batch_size) + " exceeds sample count " +
                                       std::to_string(n_samples));
    }

    bool operator==(const TrainConfig&) const = default;
};

/// Deterministic per-epoch batch schedule: shuffle then cut into chunks of
/// `batch_size` (the last chunk may be smaller).
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size, Rng& rng) {
    auto order = iota_indices(n);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    const auto step = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < n; start += step) {
        const std::size_t end = std::min(n, start + step);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_LINALG_HPP
