#ifndef DEEPDEFECT_DATA_HPP
#define DEEPDEFECT_DATA_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deepdefect/error.hpp"
#include "deepdefect/linalg.hpp"

namespace deepdefect {

/// Binary class tag. The numeric value doubles as the classifier's output
/// index, so index 0 is the non-defective class.
enum class Label : std::uint8_t { NonDefective = 0, Defective = 1 };

inline constexpr int kNumClasses = 2;

inline int class_index(Label l) noexcept { return static_cast<int>(l); }
inline Label label_from_index(int i) noexcept { return i == 0 ? Label::NonDefective : Label::Defective; }

inline std::string_view label_name(Label l) noexcept {
    return l == Label::Defective ? "defective" : "non-defective";
}

struct Dataset {
    Matrix features;
    std::vector<Label> labels;
    std::vector<std::string> feature_names;
    std::string name;

    std::size_t n_samples() const noexcept { return labels.size(); }
    std::size_t n_features() const noexcept { return feature_names.size(); }

    std::size_t count(Label l) const noexcept {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
    }
};

enum class MissingPolicy { Drop, ImputeMean };

struct LoadOptions {
    MissingPolicy missing = MissingPolicy::Drop;
};

/// A loaded dataset plus bookkeeping. `raw_rows == dataset.n_samples() + dropped_rows`.
struct LoadResult {
    Dataset dataset;
    std::size_t raw_rows = 0;
    std::size_t dropped_rows = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string_view unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
        s = s.substr(1, s.size() - 2);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(line.substr(start)));
    return out;
}

inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline bool is_missing(std::string_view s) {
    s = unquote(s);
    return s.empty() || s == "?";
}

/// Maps a class token to a label; nullopt when the token is not recognised.
inline std::optional<Label> parse_label_token(std::string_view token) {
    const std::string t = lower(unquote(token));
    static constexpr std::array<std::string_view, 7> yes{"y", "yes", "true", "t", "1", "defective", "buggy"};
    static constexpr std::array<std::string_view, 7> no{"n", "no", "false", "f", "0", "clean", "non-defective"};
    if (std::find(yes.begin(), yes.end(), t) != yes.end()) return Label::Defective;
    if (std::find(no.begin(), no.end(), t) != no.end()) return Label::NonDefective;
    if (const auto v = parse_real(t)) return *v > 0.0 ? Label::Defective : Label::NonDefective;
    return std::nullopt;
}

struct RawRows {
    std::vector<std::vector<std::optional<double>>> cells;
    std::vector<std::optional<Label>> labels;
};

inline LoadResult finalize(RawRows raw, std::vector<std::string> names, std::string dataset_name,
                           const LoadOptions& options) {
    const std::size_t n_features = names.size();
    LoadResult result;
    result.raw_rows = raw.cells.size();

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < raw.cells.size(); ++r) {
        if (!raw.labels[r]) continue;
        const bool complete = std::all_of(raw.cells[r].begin(), raw.cells[r].end(), [](const auto& c) { return c.has_value(); });
        if (complete || options.missing == MissingPolicy::ImputeMean) keep.push_back(r);
    }
    result.dropped_rows = result.raw_rows - keep.size();
    if (keep.empty()) throw EmptyDatasetError("dataset '" + dataset_name + "' has no usable rows");

    std::vector<double> column_mean(n_features, 0.0);
    if (options.missing == MissingPolicy::ImputeMean) {
        for (std::size_t c = 0; c < n_features; ++c) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t r : keep)
                if (raw.cells[r][c]) {
                    sum += *raw.cells[r][c];
                    ++n;
                }
            column_mean[c] = n > 0 ? sum / static_cast<double>(n) : 0.0;
        }
    }

    Dataset& ds = result.dataset;
    ds.name = std::move(dataset_name);
    ds.feature_names = std::move(names);
    ds.features.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(n_features));
    ds.labels.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const auto& row = raw.cells[keep[i]];
        for (std::size_t c = 0; c < n_features; ++c)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].value_or(column_mean[c]);
        ds.labels.push_back(*raw.labels[keep[i]]);
    }
    return result;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace detail

/// Parses the ARFF subset used by the NASA MDP distribution: numeric
/// attributes followed by one nominal class attribute.
inline LoadResult parse_arff(std::istream& in, std::string name, const LoadOptions& options = {}) {
    using namespace detail;
    std::vector<std::string> names;
    std::vector<std::string> class_values;
    std::optional<Label> class_map[2];
    bool have_class = false;
    bool have_relation = false;
    bool in_data = false;
    RawRows raw;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '%') continue;

        if (!in_data) {
            if (s.front() != '@') throw ParseError("expected a header directive", line_no);
            const std::size_t sp = s.find_first_of(" \t");
            const std::string keyword = lower(s.substr(0, sp));
            const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(s.substr(sp));
            if (keyword == "@relation") {
                have_relation = true;
            } else if (keyword == "@attribute") {
                if (have_class) throw ParseError("the nominal class attribute must be the last attribute", line_no);
                std::string_view attr_name;
                std::string_view type;
                if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
                    const std::size_t close = rest.find(rest.front(), 1);
                    if (close == std::string_view::npos) throw ParseError("unterminated attribute name", line_no);
                    attr_name = rest.substr(1, close - 1);
                    type = trim(rest.substr(close + 1));
                } else {
                    const std::size_t end = rest.find_first_of(" \t{");
                    if (end == std::string_view::npos) throw ParseError("attribute without a type", line_no);
                    attr_name = rest.substr(0, end);
                    type = trim(rest.substr(end));
                }
                if (attr_name.empty() || type.empty()) throw ParseError("malformed @attribute", line_no);
                if (type.front() == '{') {
                    if (type.back() != '}') throw ParseError("unterminated nominal value list", line_no);
                    for (auto v : split_commas(type.substr(1, type.size() - 2)))
                        if (!unquote(v).empty()) class_values.emplace_back(unquote(v));
                    if (class_values.empty()) throw ParseError("empty nominal value list", line_no);
                    if (class_values.size() > 2)
                        throw UnsupportedLabelError("class attribute '" + std::string(attr_name) + "' has " +
                                                    std::to_string(class_values.size()) + " values; only binary labels are supported");
                    for (std::size_t i = 0; i < class_values.size(); ++i) class_map[i] = parse_label_token(class_values[i]);
                    const bool ok = class_values.size() == 1
                                        ? class_map[0].has_value()
                                        : class_map[0] && class_map[1] && *class_map[0] != *class_map[1];
                    if (!ok) throw UnsupportedLabelError("cannot tell which class value marks a defective module");
                    have_class = true;
                } else {
                    const std::string t = lower(type);
                    if (t != "numeric" && t != "real" && t != "integer")
                        throw ParseError("unsupported attribute type '" + std::string(type) + "'", line_no);
                    names.emplace_back(attr_name);
                }
            } else if (keyword == "@data") {
                if (!have_relation) throw ParseError("missing @relation before @data", line_no);
                if (!have_class) throw ParseError("no nominal class attribute declared", line_no);
                if (names.empty()) throw ParseError("no numeric attributes declared", line_no);
                in_data = true;
            } else {
                throw ParseError("unknown directive '" + std::string(s.substr(0, sp)) + "'", line_no);
            }
            continue;
        }

        if (s.front() == '{') throw ParseError("sparse ARFF rows are not supported", line_no);
        const auto fields = split_commas(s);
        if (fields.size() != names.size() + 1)
            throw ParseError("expected " + std::to_string(names.size() + 1) + " fields, found " + std::to_string(fields.size()),
                             line_no);
        std::vector<std::optional<double>> cells(names.size());
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (is_missing(fields[c])) continue;
            cells[c] = parse_real(unquote(fields[c]));
            if (!cells[c]) throw ParseError("non-numeric value '" + std::string(fields[c]) + "'", line_no, c + 1);
        }
        std::optional<Label> label;
        if (!is_missing(fields.back())) {
            const std::string_view token = unquote(fields.back());
            const auto it = std::find(class_values.begin(), class_values.end(), token);
            if (it == class_values.end())
                throw ParseError("undeclared class value '" + std::string(token) + "'", line_no, fields.size());
            label = class_map[it - class_values.begin()];
        }
        raw.cells.push_back(std::move(cells));
        raw.labels.push_back(label);
    }
    if (!in_data) throw ParseError("missing @data section", line_no);
    return finalize(std::move(raw), std::move(names), std::move(name), options);
}

inline LoadResult load_arff(const std::filesystem::path& path, const LoadOptions& options = {}) {
    auto in = detail::open_input(path);
    return parse_arff(in, path.stem().string(), options);
}

/// Header row required; `label_column` is removed from the features.
inline LoadResult parse_csv(std::istream& in, std::string_view label_column, std::string name,
                            const LoadOptions& options = {}) {
    using namespace detail;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        for (auto h : split_commas(line)) header.emplace_back(unquote(h));
        break;
    }
    if (header.empty()) throw ParseError("missing header row");
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw ParseError("label column '" + std::string(label_column) + "' not found in header", line_no);
    const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_pos) names.push_back(header[c]);
    if (names.empty()) throw ParseError("no feature columns", line_no);

    RawRows raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                             line_no);
        std::vector<std::optional<double>> cells;
        cells.reserve(names.size());
        std::optional<Label> label;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == label_pos) {
                if (is_missing(fields[c])) continue;
                label = parse_label_token(fields[c]);
                if (!label) throw UnsupportedLabelError("line " + std::to_string(line_no) + ": unrecognised label '" +
                                                        std::string(fields[c]) + "'");
                continue;
            }
            if (is_missing(fields[c])) {
                cells.emplace_back();
                continue;
            }
            cells.push_back(parse_real(unquote(fields[c])));
            if (!cells.back()) throw ParseError("non-numeric value '" + std::string(fields[c]) + "'", line_no, c + 1);
        }
        raw.cells.push_back(std::move(cells));
        raw.labels.push_back(label);
    }
    return finalize(std::move(raw), std::move(names), std::move(name), options);
}

inline LoadResult load_csv(const std::filesystem::path& path, std::string_view label_column, const LoadOptions& options = {}) {
    auto in = detail::open_input(path);
    return parse_csv(in, label_column, path.stem().string(), options);
}

// ---------------------------------------------------------------------------
// Standardization

struct NormalizationParams {
    Vector mu;
    Vector sigma;
};

/// Column means and population standard deviations (two-pass).
inline NormalizationParams zscore_fit(const Matrix& features) {
    if (features.rows() == 0 || features.cols() == 0) throw InvalidArgumentError("zscore_fit needs a nonempty matrix");
    if (!features.allFinite()) throw InvalidArgumentError("zscore_fit needs finite values");
    const auto n = static_cast<double>(features.rows());
    NormalizationParams p;
    p.mu = features.colwise().sum().transpose() / n;
    p.sigma.resize(features.cols());
    for (Eigen::Index c = 0; c < features.cols(); ++c)
        p.sigma(c) = std::sqrt((features.col(c).array() - p.mu(c)).square().sum() / n);
    return p;
}

/// (x - mu) / sigma per column; columns with sigma == 0 become zeros.
inline Matrix zscore_apply(const Matrix& features, const NormalizationParams& params) {
    require_dims(features.cols() == params.mu.size() && params.mu.size() == params.sigma.size(),
                 "zscore_apply: matrix has " + std::to_string(features.cols()) + " columns, params cover " +
                     std::to_string(params.mu.size()));
    Matrix out(features.rows(), features.cols());
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        if (params.sigma(c) == 0.0)
            out.col(c).setZero();
        else
            out.col(c) = (features.col(c).array() - params.mu(c)) / params.sigma(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stratified k-fold

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// Each class is shuffled and dealt round-robin; the dealing offset carries
/// over between classes so overall fold sizes also differ by at most one.
inline FoldPlan stratified_kfold(std::span<const Label> labels, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgumentError("k must be at least 2");
    const std::size_t n = labels.size();
    if (static_cast<std::size_t>(k) > n)
        throw InvalidArgumentError("k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> test(static_cast<std::size_t>(k));
    std::size_t offset = 0;
    for (Label cls : {Label::NonDefective, Label::Defective}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.empty()) continue;
        if (members.size() < static_cast<std::size_t>(k))
            plan.warnings.push_back("class '" + std::string(label_name(cls)) + "' has " + std::to_string(members.size()) +
                                    " samples, fewer than k = " + std::to_string(k) + "; some test folds will lack it");
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) test[(offset + i) % static_cast<std::size_t>(k)].push_back(members[i]);
        offset = (offset + members.size()) % static_cast<std::size_t>(k);
    }

    for (auto& t : test) {
        std::sort(t.begin(), t.end());
        Fold fold;
        std::vector<bool> in_test(n, false);
        for (std::size_t i : t) in_test[i] = true;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_test[i]) fold.train.push_back(i);
        fold.test = std::move(t);
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

inline FoldPlan stratified_kfold(const Dataset& dataset, int k, std::uint64_t seed) {
    return stratified_kfold(std::span<const Label>(dataset.labels), k, seed);
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_DATA_HPP
