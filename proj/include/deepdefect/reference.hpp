#ifndef DEEPDEFECT_REFERENCE_HPP
#define DEEPDEFECT_REFERENCE_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepdefect/data.hpp"

// Published figures for the fourteen NASA MDP datasets: sample counts,
// per-dataset architectures, cross-validated accuracy of the DBN/SSAE
// models and of the comparison methods, and the per-model metric table.
// Read-only reference data.

namespace deepdefect::reference {

inline constexpr std::string_view kProvenance = "published accuracy, 10-fold CV";

struct DatasetStats {
    std::string_view name;
    std::string_view language;
    std::size_t samples;
    double defective_fraction;
};

inline constexpr std::array<DatasetStats, 14> kDatasets{{
    {"CM1", "C", 505, 0.095},     {"KC1", "C++", 2107, 0.154},  {"KC2", "Java", 522, 0.201},
    {"KC3", "Java", 458, 0.093},  {"KC4", "Perl", 125, 0.6},    {"MC1", "C++", 9466, 0.007},
    {"MC2", "C", 161, 0.322},     {"PC1", "C", 1107, 0.068},    {"PC2", "C", 5589, 0.004},
    {"PC3", "C", 1563, 0.102},    {"PC4", "C", 1458, 0.122},    {"PC5", "C++", 17186, 0.030},
    {"JM1", "C", 10878, 0.19},    {"MW1", "C", 403, 0.08},
}};

inline std::string canonical_name(std::string_view name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return up;
}

inline const DatasetStats* find_dataset(std::string_view name) {
    const auto up = canonical_name(name);
    for (const auto& d : kDatasets)
        if (d.name == up) return &d;
    return nullptr;
}

inline std::string known_dataset_names() {
    std::string out;
    for (const auto& d : kDatasets) out += (out.empty() ? "" : ", ") + std::string(d.name);
    return out;
}

struct Architecture {
    std::string_view dataset;
    std::vector<int> dbn;
    std::vector<int> ssae;
};

inline const std::vector<Architecture>& architectures() {
    static const std::vector<Architecture> table{
        {"CM1", {30, 12}, {25, 15, 7}},
        {"KC1", {20, 15, 10}, {25, 15, 8, 4}},
        {"KC2", {20, 10}, {20, 10}},
        {"KC3", {15, 5}, {15, 10}},
        {"KC4", {15, 5}, {15, 8}},
        {"MC1", {40, 25, 10}, {40, 30, 20, 10}},
        {"MC2", {30, 10}, {30, 15}},
        {"PC1", {20, 15, 10}, {20, 10, 10, 5}},
        {"PC2", {20, 10, 10, 10}, {20, 20, 10, 10, 10}},
        {"PC3", {20, 10}, {20, 10, 10}},
        {"PC4", {30, 20, 10}, {25, 20, 10, 10}},
        {"PC5", {35, 30, 20, 10, 8}, {35, 30, 20, 20, 10}},
        {"JM1", {50, 30, 20, 8}, {40, 30, 10, 8}},
        {"MW1", {30, 15, 4}, {30, 15, 4}},
    };
    return table;
}

inline const Architecture* find_architecture(std::string_view name) {
    const auto up = canonical_name(name);
    for (const auto& a : architectures())
        if (a.dataset == up) return &a;
    return nullptr;
}

struct AccuracyCell {
    double mean;
    std::optional<double> std;
};

inline constexpr std::array<std::string_view, 7> kMethods{"DBN", "SSAE", "VOTE", "CSVS+CSNN", "CSLS+CSNN", "CBA2", "SVM"};

struct AccuracyRow {
    std::string_view dataset;
    std::array<std::optional<AccuracyCell>, 7> cells;  // ordered as kMethods
};

/// Percent accuracy; empty where a method was not reported.
inline const std::vector<AccuracyRow>& accuracy_table() {
    using C = AccuracyCell;
    constexpr std::nullopt_t none = std::nullopt;
    static const std::vector<AccuracyRow> table{
        {"CM1", {C{88.57, 1.9}, C{88.59, 2.61}, C{89.64, 2.30}, C{77.60, 0.42}, C{74.44, 0.56}, C{80.36, {}}, C{68, {}}}},
        {"KC1", {C{85.83, 0.86}, C{85.63, 1.23}, C{85.62, 1.64}, none, none, C{83.71, {}}, none}},
        {"KC2", {C{81.60, 1.1}, C{84.48, 0.85}, C{82.91, 3.38}, C{74.07, 0.59}, C{74.82, 0.68}, none, none}},
        {"KC3", {C{75.36, 0.52}, C{77.60, 2.8}, C{89.98, 3.20}, none, none, C{90.91, {}}, C{66, {}}}},
        {"KC4", {C{69.59, 0.8}, C{69.60, 1.6}, C{75.38, 11.43}, none, none, C{85.37, {}}, C{71, {}}}},
        {"PC1", {C{92.51, 0.78}, C{94.13, 1.46}, C{93.73, 1.45}, C{83.73, 1.93}, C{82.01, 2.23}, C{91.78, {}}, C{71, {}}}},
        {"PC2", {C{97.79, 0.11}, C{99.39, 0.08}, C{99.53, 0.13}, C{99.63, 0.11}, C{99.19, 0.20}, C{99.20, {}}, C{64, {}}}},
        {"PC3", {C{87.26, 0.72}, C{90.21, 0.97}, C{89.12, 1.77}, C{75.80, 0.39}, C{78.80, 0.18}, C{86.48, {}}, C{76, {}}}},
        {"PC4", {C{88.06, 0.48}, C{91.22, 1.17}, C{90.28, 1.75}, C{82.23, 1.09}, C{85.00, 0.25}, C{83.96, {}}, C{82, {}}}},
        {"PC5", {C{97.07, 0.66}, C{97.47, 0.74}, C{97.46, 0.23}, none, none, none, C{69, {}}}},
        {"JM1", {C{81.32, 0.12}, C{84.59, 0.65}, C{81.44, 0.56}, none, none, C{73.52, {}}, none}},
        {"MW1", {C{92.55, 0.53}, C{93.30, 1.78}, C{91.67, 3.07}, C{87.93, 0.43}, C{85.06, 0.59}, C{91.04, {}}, C{71, {}}}},
        {"MC1", {C{99.12, 0.04}, C{99.53, 0.12}, C{99.42, 0.13}, none, none, C{95.00, {}}, C{65, {}}}},
        {"MC2", {C{59.62, 3.10}, C{61.49, 4.75}, C{72.57, 7.14}, none, none, C{69.81, {}}, C{64, {}}}},
    };
    return table;
}

inline const AccuracyRow* find_accuracy(std::string_view name) {
    const auto up = canonical_name(name);
    for (const auto& r : accuracy_table())
        if (r.dataset == up) return &r;
    return nullptr;
}

/// Published ordering of the seven methods (1 = best), aligned with kMethods.
inline constexpr std::array<int, 7> kPublishedRank{3, 1, 2, 6, 7, 4, 5};

struct MetricRow {
    std::string_view dataset;
    std::string_view model;
    double recall, accuracy, precision, lr_plus, lr_minus;
};

inline const std::vector<MetricRow>& metric_table() {
    static const std::vector<MetricRow> table{
        {"CM1", "SSAE", 0.97, 0.90, 0.92, 1.22, 0.16}, {"CM1", "DBN", 0.95, 0.88, 0.91, 1.09, 0.37},
        {"KC1", "SSAE", 0.95, 0.86, 0.89, 1.43, 0.14}, {"KC1", "DBN", 0.96, 0.86, 0.88, 1.41, 0.13},
        {"KC2", "SSAE", 0.91, 0.81, 0.87, 1.45, 0.21}, {"KC2", "DBN", 0.9, 0.83, 0.87, 1.8, 0.16},
        {"KC3", "SSAE", 0.82, 0.77, 0.92, 1.13, 0.66}, {"KC3", "DBN", 0.80, 0.75, 0.91, 1.07, 0.79},
        {"KC4", "SSAE", 0.83, 0.70, 0.66, 1.87, 0.31}, {"KC4", "DBN", 0.83, 0.70, 0.66, 1.87, 0.31},
        {"PC1", "SSAE", 0.98, 0.94, 0.95, 1.58, 0.04}, {"PC1", "DBN", 0.99, 0.93, 0.94, 1.1, 0.13},
        {"PC2", "SSAE", 0.99, 0.99, 0.99, 1.04, 0.05}, {"PC2", "DBN", 0.98, 0.98, 0.99, 0.98, 0},
        {"PC3", "SSAE", 0.97, 0.9, 0.92, 1.39, 0.1},   {"PC3", "DBN", 0.95, 0.87, 0.92, 1.23, 0.23},
        {"PC4", "SSAE", 0.99, 0.91, 0.91, 1.4, 0.04},  {"PC4", "DBN", 0.97, 0.88, 0.9, 1.25, 0.12},
        {"PC5", "SSAE", 0.99, 0.97, 0.98, 1.42, 0.02}, {"PC5", "DBN", 0.99, 0.97, 0.98, 1.37, 0.03},
        {"JM1", "SSAE", 0.99, 0.85, 0.84, 1.25, 0.01}, {"JM1", "DBN", 0.99, 0.81, 0.82, 1.08, 0.15},
        {"MW1", "SSAE", 0.99, 0.93, 0.93, 1.15, 0},    {"MW1", "DBN", 0.99, 0.93, 0.93, 1.03, 0},
        {"MC1", "SSAE", 0.99, 0.99, 0.99, 1.58, 0},    {"MC1", "DBN", 0.99, 0.99, 0.99, 1.04, 0.04},
        {"MC2", "SSAE", 0.85, 0.61, 0.67, 0.96, 1.27}, {"MC2", "DBN", 0.83, 0.6, 0.66, 0.92, 1.72},
    };
    return table;
}

}  // namespace deepdefect::reference

#endif  // DEEPDEFECT_REFERENCE_HPP
