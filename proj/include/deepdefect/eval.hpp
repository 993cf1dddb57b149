#ifndef DEEPDEFECT_EVAL_HPP
#define DEEPDEFECT_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepdefect/data.hpp"
#include "deepdefect/error.hpp"

namespace deepdefect {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> actual, Label positive) {
    if (predicted.size() != actual.size())
        throw DimensionError("confusion: " + std::to_string(predicted.size()) + " predictions vs " +
                             std::to_string(actual.size()) + " labels");
    if (predicted.empty()) throw InvalidArgumentError("confusion: no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == positive;
        const bool a = actual[i] == positive;
        if (p && a) ++cm.tp;
        else if (p) ++cm.fp;
        else if (a) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

/// Ratios are empty when their denominator is zero.
struct MetricsReport {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> lr_plus;
    std::optional<double> lr_minus;
};

namespace detail {
inline std::optional<double> ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}
}  // namespace detail

inline std::optional<double> specificity(const ConfusionMatrix& cm) {
    return detail::ratio(static_cast<double>(cm.tn), static_cast<double>(cm.tn + cm.fp));
}

/// LR+ = sensitivity / (1 - specificity), LR- = (1 - sensitivity) / specificity.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InvalidArgumentError("metrics: empty confusion matrix");
    const auto tp = static_cast<double>(cm.tp);
    const auto fp = static_cast<double>(cm.fp);
    const auto fn = static_cast<double>(cm.fn);
    const auto tn = static_cast<double>(cm.tn);
    MetricsReport m;
    m.accuracy = (tp + tn) / static_cast<double>(cm.total());
    m.precision = detail::ratio(tp, tp + fp);
    m.recall = detail::ratio(tp, tp + fn);
    // Written in count form so LR+ * (1 - spec) reproduces sensitivity exactly.
    if (cm.tp + cm.fn > 0 && cm.fp > 0) m.lr_plus = (tp / (tp + fn)) / (fp / (fp + tn));
    if (cm.tn > 0 && cm.tp + cm.fn > 0) m.lr_minus = (fn / (tp + fn)) / (tn / (tn + fp));
    return m;
}

struct MetricSummary {
    std::optional<double> mean;
    std::optional<double> std;  // population
    std::size_t defined = 0;
    std::size_t undefined = 0;
};

/// Mean and population std of the defined values; undefined ones are counted.
inline MetricSummary summarize(std::span<const std::optional<double>> values) {
    MetricSummary s;
    std::vector<double> v;
    for (const auto& x : values) {
        if (x) v.push_back(*x);
        else ++s.undefined;
    }
    s.defined = v.size();
    if (v.empty()) return s;
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.mean = mean;
    s.std = std::sqrt(ss / n);
    return s;
}

struct CvSummary {
    std::vector<MetricsReport> per_fold;
    MetricSummary accuracy;
    MetricSummary precision;
    MetricSummary recall;
    MetricSummary lr_plus;
    MetricSummary lr_minus;
};

inline CvSummary summarize_folds(std::vector<MetricsReport> per_fold) {
    CvSummary s;
    auto column = [&](std::optional<double> MetricsReport::*field) {
        std::vector<std::optional<double>> v;
        for (const auto& r : per_fold) v.push_back(r.*field);
        return summarize(v);
    };
    s.accuracy = column(&MetricsReport::accuracy);
    s.precision = column(&MetricsReport::precision);
    s.recall = column(&MetricsReport::recall);
    s.lr_plus = column(&MetricsReport::lr_plus);
    s.lr_minus = column(&MetricsReport::lr_minus);
    s.per_fold = std::move(per_fold);
    return s;
}

struct FoldOutcome {
    std::vector<std::size_t> test_indices;
    std::vector<Label> predicted;
    ConfusionMatrix confusion;
    MetricsReport metrics;
};

struct CvResult {
    std::vector<FoldOutcome> folds;
    CvSummary summary;
};

/// A recipe that trains on one fold and predicts its test rows. The last
/// argument is the fold index, for seed derivation.
template <typename F>
concept ModelRecipe = requires(F f, const Matrix& x, std::span<const Label> y, std::size_t fold) {
    { f(x, y, x, fold) } -> std::convertible_to<std::vector<Label>>;
};

template <ModelRecipe Recipe>
CvResult cross_validate(Recipe&& recipe, const Dataset& dataset, const FoldPlan& plan, Label positive) {
    const std::size_t n = dataset.n_samples();
    std::vector<int> seen(n, 0);
    for (const auto& f : plan.folds)
        for (std::size_t i : f.test) {
            if (i >= n) throw InvalidArgumentError("fold plan references sample " + std::to_string(i) + " beyond dataset");
            ++seen[i];
        }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
        throw InvalidArgumentError("fold plan test sets do not partition the dataset");

    CvResult result;
    std::vector<MetricsReport> per_fold;
    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
        const auto& fold = plan.folds[k];
        std::vector<Label> train_y, test_y;
        for (std::size_t i : fold.train) train_y.push_back(dataset.labels[i]);
        for (std::size_t i : fold.test) test_y.push_back(dataset.labels[i]);
        FoldOutcome out;
        out.test_indices = fold.test;
        out.predicted = std::invoke(recipe, gather_rows(dataset.features, fold.train), std::span<const Label>(train_y),
                                    gather_rows(dataset.features, fold.test), k);
        if (out.predicted.size() != test_y.size())
            throw DimensionError("fold " + std::to_string(k + 1) + ": recipe returned " + std::to_string(out.predicted.size()) +
                                 " predictions for " + std::to_string(test_y.size()) + " test samples");
        out.confusion = confusion(out.predicted, test_y, positive);
        out.metrics = metrics(out.confusion);
        per_fold.push_back(out.metrics);
        result.folds.push_back(std::move(out));
    }
    result.summary = summarize_folds(std::move(per_fold));
    return result;
}

// ---------------------------------------------------------------------------
// Cross-method ranking

/// Accuracy per (dataset, method); empty cells are methods not evaluated on
/// that dataset.
struct AccuracyTable {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::vector<std::vector<std::optional<double>>> cells;  // [dataset][method]
};

struct MethodRank {
    std::string method;
    double score = 0.0;  // mean per-dataset rank
    int rank = 0;        // 1 = best; equal scores share a rank
    std::size_t datasets = 0;
};

struct RankResult {
    std::vector<MethodRank> ranking;  // ordered best first
    std::vector<std::string> warnings;
};

/// Per dataset, rank 1 = highest accuracy with ties sharing the mean of their
/// positions; each method scores the mean of its ranks.
inline RankResult weighted_rank(const AccuracyTable& table) {
    const std::size_t m = table.methods.size();
    if (m < 2) throw InvalidArgumentError("weighted_rank needs at least two methods");
    if (table.cells.size() != table.datasets.size()) throw DimensionError("weighted_rank: row count mismatch");

    std::vector<double> rank_sum(m, 0.0);
    std::vector<std::size_t> rank_n(m, 0);
    for (const auto& row : table.cells) {
        if (row.size() != m) throw DimensionError("weighted_rank: ragged table row");
        std::vector<std::size_t> present;
        for (std::size_t j = 0; j < m; ++j)
            if (row[j]) present.push_back(j);
        std::stable_sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) { return *row[a] > *row[b]; });
        for (std::size_t i = 0; i < present.size();) {
            std::size_t end = i + 1;
            while (end < present.size() && *row[present[end]] == *row[present[i]]) ++end;
            const double shared = (static_cast<double>(i + 1) + static_cast<double>(end)) / 2.0;
            for (std::size_t t = i; t < end; ++t) {
                rank_sum[present[t]] += shared;
                ++rank_n[present[t]];
            }
            i = end;
        }
    }

    RankResult out;
    for (std::size_t j = 0; j < m; ++j) {
        if (rank_n[j] == 0) {
            out.warnings.push_back("method '" + table.methods[j] + "' has no values and is excluded");
            continue;
        }
        out.ranking.push_back({table.methods[j], rank_sum[j] / static_cast<double>(rank_n[j]), 0, rank_n[j]});
    }
    std::stable_sort(out.ranking.begin(), out.ranking.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
    for (std::size_t i = 0; i < out.ranking.size(); ++i)
        out.ranking[i].rank = (i > 0 && out.ranking[i].score == out.ranking[i - 1].score) ? out.ranking[i - 1].rank
                                                                                           : static_cast<int>(i + 1);
    return out;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_EVAL_HPP
