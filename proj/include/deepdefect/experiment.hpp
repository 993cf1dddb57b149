#ifndef DEEPDEFECT_EXPERIMENT_HPP
#define DEEPDEFECT_EXPERIMENT_HPP

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepdefect/data.hpp"
#include "deepdefect/dbn.hpp"
#include "deepdefect/error.hpp"
#include "deepdefect/eval.hpp"
#include "deepdefect/reference.hpp"
#include "deepdefect/sae.hpp"
#include "deepdefect/serialize.hpp"

namespace deepdefect {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class DatasetFormat { Arff, Csv };

struct ExperimentConfig {
    std::string dataset_path;
    DatasetFormat dataset_format = DatasetFormat::Arff;
    std::string label_column = "defects";
    std::string dataset_name;
    std::optional<std::string> dataset_sha256;
    MissingPolicy missing = MissingPolicy::Drop;
    ModelKind model = ModelKind::Ssae;
    LayerSpec hidden_sizes;
    TrainConfig pretrain;
    TrainConfig fine_tune;
    SparsityConfig sparsity;
    int folds = 10;
    std::uint64_t seed = 0;
    Label positive_class = Label::NonDefective;
    bool leak_free_normalization = false;
    std::string output_dir = "results";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Training defaults per model family (epochs, batch size, learning rates).
inline TrainConfig default_pretrain(ModelKind model) {
    if (model == ModelKind::Dbn) return {20, 4, 0.001, 0};
    return {50, 4, 0.01, 0};
}

inline TrainConfig default_fine_tune(ModelKind) { return {150, 4, 0.01, 0}; }

/// Command-line values; each one set here beats the config file.
struct ConfigOverrides {
    std::optional<std::string> dataset_path;
    std::optional<ModelKind> model;
    std::optional<std::vector<int>> layers;
    std::optional<int> folds;
    std::optional<std::uint64_t> seed;
    bool leak_free_normalization = false;
    std::optional<std::string> output_dir;
};

namespace detail {

inline std::string format_name(DatasetFormat f) { return f == DatasetFormat::Arff ? "arff" : "csv"; }

inline DatasetFormat parse_format(const std::string& s) {
    if (s == "arff") return DatasetFormat::Arff;
    if (s == "csv") return DatasetFormat::Csv;
    throw ConfigError("invalid dataset_format '" + s + "' (expected arff or csv)");
}

inline std::string missing_name(MissingPolicy m) { return m == MissingPolicy::Drop ? "drop" : "impute-mean"; }

inline MissingPolicy parse_missing(const std::string& s) {
    if (s == "drop") return MissingPolicy::Drop;
    if (s == "impute-mean") return MissingPolicy::ImputeMean;
    throw ConfigError("invalid missing policy '" + s + "' (expected drop or impute-mean)");
}

inline Label parse_positive_class(const std::string& s) {
    if (s == "non-defective") return Label::NonDefective;
    if (s == "defective") return Label::Defective;
    if (const auto l = parse_label_token(s)) return *l;
    throw ConfigError("invalid positive_class '" + s + "' (expected defective or non-defective)");
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("field '" + where + key + "': " + e.what());
    }
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown field '" + where + key + "'");
}

inline TrainConfig read_train(const nlohmann::json& root, const char* key, TrainConfig base) {
    if (!root.contains(key)) return base;
    const auto& j = root.at(key);
    const std::string where = std::string(key) + ".";
    reject_unknown(j, {"epochs", "batch_size", "learning_rate"}, where);
    if (j.contains("epochs")) base.epochs = get_field<int>(j, "epochs", where);
    if (j.contains("batch_size")) base.batch_size = get_field<int>(j, "batch_size", where);
    if (j.contains("learning_rate")) base.learning_rate = get_field<double>(j, "learning_rate", where);
    base.validate(0);
    return base;
}

inline nlohmann::json train_json(const TrainConfig& c) {
    return {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate}};
}

}  // namespace detail

/// The fully resolved config in the same schema `resolve_config` reads.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j{
        {"dataset_path", c.dataset_path},
        {"dataset_format", detail::format_name(c.dataset_format)},
        {"dataset_name", c.dataset_name},
        {"missing", detail::missing_name(c.missing)},
        {"model", model_kind_name(c.model)},
        {"hidden_sizes", c.hidden_sizes.hidden_sizes},
        {"pretrain", detail::train_json(c.pretrain)},
        {"fine_tune", detail::train_json(c.fine_tune)},
        {"folds", c.folds},
        {"seed", c.seed},
        {"positive_class", std::string(label_name(c.positive_class))},
        {"leak_free_normalization", c.leak_free_normalization},
        {"output_dir", c.output_dir},
    };
    if (c.dataset_format == DatasetFormat::Csv) j["label_column"] = c.label_column;
    if (c.dataset_sha256) j["dataset_sha256"] = *c.dataset_sha256;
    if (c.model == ModelKind::Ssae) j["sparsity"] = {{"rho", c.sparsity.rho}, {"beta", c.sparsity.beta}};
    return j;
}

/// Precedence: override > file value > per-dataset / per-model default.
/// A manifest written by `emit_report` is accepted and its echoed config used.
inline ExperimentConfig resolve_config(const nlohmann::json& input, const ConfigOverrides& overrides = {}) {
    using detail::get_field;
    const nlohmann::json& j = (input.is_object() && input.contains("config") && input.contains("tool_version"))
                                  ? input.at("config")
                                  : input;
    detail::reject_unknown(j,
                           {"dataset_path", "dataset_format", "label_column", "dataset_name", "dataset_sha256", "missing",
                            "model", "hidden_sizes", "pretrain", "fine_tune", "sparsity", "folds", "seed",
                            "positive_class", "leak_free_normalization", "output_dir"},
                           "");
    ExperimentConfig c;

    if (overrides.dataset_path) c.dataset_path = *overrides.dataset_path;
    else if (j.contains("dataset_path")) c.dataset_path = get_field<std::string>(j, "dataset_path", "");
    if (c.dataset_path.empty()) throw ConfigError("no dataset_path given");
    const std::filesystem::path path(c.dataset_path);

    if (j.contains("dataset_format") && !overrides.dataset_path) c.dataset_format = detail::parse_format(get_field<std::string>(j, "dataset_format", ""));
    else c.dataset_format = detail::lower(path.extension().string()) == ".csv" ? DatasetFormat::Csv : DatasetFormat::Arff;
    if (j.contains("label_column")) c.label_column = get_field<std::string>(j, "label_column", "");

    // A file-level dataset name describes the file-level dataset, not one swapped in from the command line.
    if (j.contains("dataset_name") && !overrides.dataset_path) c.dataset_name = get_field<std::string>(j, "dataset_name", "");
    else c.dataset_name = path.stem().string();
    if (j.contains("dataset_sha256") && !overrides.dataset_path)
        c.dataset_sha256 = get_field<std::string>(j, "dataset_sha256", "");
    if (j.contains("missing")) c.missing = detail::parse_missing(get_field<std::string>(j, "missing", ""));

    if (overrides.model) c.model = *overrides.model;
    else if (j.contains("model")) c.model = parse_model_kind(get_field<std::string>(j, "model", ""));
    else throw ConfigError("no model given (expected dbn or ssae)");

    if (overrides.layers) {
        c.hidden_sizes.hidden_sizes = *overrides.layers;
    } else if (j.contains("hidden_sizes")) {
        c.hidden_sizes.hidden_sizes = get_field<std::vector<int>>(j, "hidden_sizes", "");
    } else {
        const auto* arch = reference::find_architecture(c.dataset_name);
        if (!arch)
            throw ConfigError("unknown dataset '" + c.dataset_name + "' and no hidden_sizes given; known datasets: " +
                              reference::known_dataset_names());
        c.hidden_sizes.hidden_sizes = c.model == ModelKind::Dbn ? arch->dbn : arch->ssae;
    }
    try {
        c.hidden_sizes.validate();
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }

    try {
        c.pretrain = detail::read_train(j, "pretrain", default_pretrain(c.model));
        c.fine_tune = detail::read_train(j, "fine_tune", default_fine_tune(c.model));
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }

    if (j.contains("sparsity")) {
        const auto& s = j.at("sparsity");
        detail::reject_unknown(s, {"rho", "beta"}, "sparsity.");
        if (s.contains("rho")) c.sparsity.rho = get_field<double>(s, "rho", "sparsity.");
        if (s.contains("beta")) c.sparsity.beta = get_field<double>(s, "beta", "sparsity.");
    }
    try {
        c.sparsity.validate();
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }

    if (overrides.folds) c.folds = *overrides.folds;
    else if (j.contains("folds")) c.folds = get_field<int>(j, "folds", "");
    if (c.folds < 2) throw ConfigError("folds must be at least 2");

    if (overrides.seed) c.seed = *overrides.seed;
    else if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed", "");

    if (j.contains("positive_class")) c.positive_class = detail::parse_positive_class(get_field<std::string>(j, "positive_class", ""));
    c.leak_free_normalization =
        overrides.leak_free_normalization ||
        (j.contains("leak_free_normalization") && get_field<bool>(j, "leak_free_normalization", ""));

    if (overrides.output_dir) c.output_dir = *overrides.output_dir;
    else if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j, "output_dir", "");
    return c;
}

inline ExperimentConfig resolve_config_file(const std::filesystem::path& file, const ConfigOverrides& overrides = {}) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config '" + file.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + file.string() + "' is not valid JSON: " + e.what());
    }
    return resolve_config(j, overrides);
}

// ---------------------------------------------------------------------------

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("internal", "SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return sha256_hex(bytes);
}

struct DatasetInfo {
    std::string name;
    std::string path;
    std::string sha256;
    std::size_t samples = 0;
    std::size_t features = 0;
    std::size_t defective = 0;
    std::size_t raw_rows = 0;
    std::size_t dropped_rows = 0;
    std::optional<std::size_t> reference_samples;
};

struct ResultsBundle {
    ExperimentConfig config;
    DatasetInfo dataset;
    CvResult cv;
    std::vector<std::vector<double>> fine_tune_curves;              // [fold][epoch]
    std::vector<double> mean_curve;                                 // [epoch]
    std::vector<std::vector<std::vector<double>>> pretrain_curves;  // [fold][layer][epoch]
    std::vector<double> fold_seconds;
    double total_seconds = 0.0;
    std::vector<std::string> warnings;
};

struct FoldSeeds {
    std::uint64_t pretrain;
    std::uint64_t fine_tune;
    std::uint64_t head;
};

inline FoldSeeds fold_seeds(std::uint64_t master, std::size_t fold) {
    const std::uint64_t base = master + fold;
    return {base, base + 1000003, base + 2000006};
}

struct TrainedFold {
    FeedforwardClassifier classifier;
    std::vector<std::vector<double>> pretrain_curves;
    std::vector<double> fine_tune_curve;
};

/// Pretrain (RBM or sparse-autoencoder stack), unroll and fine-tune on one
/// fold's (already normalized) training rows.
inline TrainedFold train_fold(const ExperimentConfig& config, const Matrix& x, std::span<const Label> y, std::size_t fold) {
    const auto seeds = fold_seeds(config.seed, fold);
    TrainConfig pre = config.pretrain;
    pre.seed = seeds.pretrain;
    TrainConfig tune = config.fine_tune;
    tune.seed = seeds.fine_tune;

    TrainedFold out;
    FeedforwardClassifier net;
    if (config.model == ModelKind::Dbn) {
        // Replays greedy_pretrain layer by layer to keep the per-layer curves.
        Matrix input = x;
        std::vector<RbmParams> rbms;
        for (std::size_t layer = 0; layer < config.hidden_sizes.hidden_sizes.size(); ++layer) {
            TrainConfig lc = pre;
            lc.seed = detail::layer_seed(pre.seed, layer);
            Rng init_rng(lc.seed);
            auto init = RbmParams::random(input.cols(), config.hidden_sizes.hidden_sizes[layer],
                                          layer == 0 ? VisibleKind::Gaussian : VisibleKind::Bernoulli, init_rng);
            lc.seed += 1;
            auto trained = train_rbm(init, input, lc);
            input = hidden_probabilities(trained.params, input);
            out.pretrain_curves.push_back(std::move(trained.error_per_epoch));
            rbms.push_back(std::move(trained.params));
        }
        net = unroll_to_classifier(rbms, kNumClasses, seeds.head);
    } else {
        Matrix input = x;
        std::vector<SparseAutoencoderParams> encoders;
        for (std::size_t layer = 0; layer < config.hidden_sizes.hidden_sizes.size(); ++layer) {
            TrainConfig lc = pre;
            lc.seed = detail::layer_seed(pre.seed, layer);
            Rng init_rng(lc.seed);
            auto init = SparseAutoencoderParams::random(input.cols(), config.hidden_sizes.hidden_sizes[layer],
                                                        layer == 0 ? OutputKind::Linear : OutputKind::Logistic, init_rng);
            lc.seed += 1;
            auto trained = train_sae(init, input, config.sparsity, lc);
            input = sae_forward(trained.params, input).hidden;
            out.pretrain_curves.push_back(std::move(trained.loss_per_epoch));
            encoders.push_back(std::move(trained.params));
        }
        net = encoders_to_classifier(encoders, kNumClasses, seeds.head);
    }
    auto tuned = fine_tune(net, x, y, tune);
    out.classifier = std::move(tuned.classifier);
    out.fine_tune_curve = std::move(tuned.error_per_epoch);
    return out;
}

inline LoadResult load_dataset(const ExperimentConfig& config) {
    LoadOptions opts{config.missing};
    auto r = config.dataset_format == DatasetFormat::Arff ? load_arff(config.dataset_path, opts)
                                                          : load_csv(config.dataset_path, config.label_column, opts);
    r.dataset.name = config.dataset_name;
    return r;
}

inline void write_failure_manifest(const ExperimentConfig& config, const std::string& stage, const std::exception& error);

/// Load, normalize, split, train/evaluate each fold, aggregate. On any error
/// a failure manifest is written to the output directory and the error
/// is rethrown.
inline ResultsBundle run_experiment(const ExperimentConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    std::string stage = "load";
    try {
        ResultsBundle bundle;
        bundle.config = config;
        auto loaded = load_dataset(config);
        Dataset& ds = loaded.dataset;

        auto& info = bundle.dataset;
        info.name = ds.name;
        info.path = config.dataset_path;
        info.sha256 = sha256_file(config.dataset_path);
        info.samples = ds.n_samples();
        info.features = ds.n_features();
        info.defective = ds.count(Label::Defective);
        info.raw_rows = loaded.raw_rows;
        info.dropped_rows = loaded.dropped_rows;
        if (const auto* ref = reference::find_dataset(ds.name)) info.reference_samples = ref->samples;
        if (config.dataset_sha256 && *config.dataset_sha256 != info.sha256)
            throw ConfigError("dataset checksum mismatch: expected " + *config.dataset_sha256 + ", file has " + info.sha256);
        if (loaded.dropped_rows > 0)
            bundle.warnings.push_back(std::to_string(loaded.dropped_rows) + " rows with missing values dropped");
        if (info.reference_samples && *info.reference_samples != info.samples)
            bundle.warnings.push_back("loaded " + std::to_string(info.samples) + " samples; published count is " +
                                      std::to_string(*info.reference_samples));

        stage = "normalize";
        if (!config.leak_free_normalization) ds.features = zscore_apply(ds.features, zscore_fit(ds.features));

        stage = "split";
        const auto plan = stratified_kfold(ds, config.folds, config.seed);
        bundle.warnings.insert(bundle.warnings.end(), plan.warnings.begin(), plan.warnings.end());

        const std::size_t k = plan.folds.size();
        bundle.fine_tune_curves.resize(k);
        bundle.pretrain_curves.resize(k);
        bundle.fold_seconds.resize(k);
        auto recipe = [&](const Matrix& train_x, std::span<const Label> train_y, const Matrix& test_x,
                          std::size_t fold) -> std::vector<Label> {
            const auto fold_start = clock::now();
            stage = "fold " + std::to_string(fold + 1);
            Matrix tx = train_x;
            Matrix sx = test_x;
            if (config.leak_free_normalization) {
                const auto params = zscore_fit(tx);
                tx = zscore_apply(tx, params);
                sx = zscore_apply(sx, params);
            }
            auto trained = train_fold(config, tx, train_y, fold);
            bundle.fine_tune_curves[fold] = std::move(trained.fine_tune_curve);
            bundle.pretrain_curves[fold] = std::move(trained.pretrain_curves);
            auto labels = predict(trained.classifier, sx).labels;
            bundle.fold_seconds[fold] = std::chrono::duration<double>(clock::now() - fold_start).count();
            return labels;
        };
        bundle.cv = cross_validate(recipe, ds, plan, config.positive_class);

        stage = "aggregate";
        const auto epochs = static_cast<std::size_t>(config.fine_tune.epochs);
        bundle.mean_curve.assign(epochs, 0.0);
        for (std::size_t e = 0; e < epochs; ++e) {
            for (const auto& curve : bundle.fine_tune_curves) bundle.mean_curve[e] += curve[e];
            bundle.mean_curve[e] /= static_cast<double>(k);
        }
        bundle.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
        return bundle;
    } catch (const std::exception& e) {
        write_failure_manifest(config, stage, e);
        throw;
    }
}

// ---------------------------------------------------------------------------
// Report files

namespace detail {

inline std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

inline std::string pct(const std::optional<double>& v) { return v ? fmt("%.2f", 100.0 * *v) : "NA"; }
inline std::string ratio4(const std::optional<double>& v) { return v ? fmt("%.4f", *v) : "NA"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string curve_csv(const std::vector<double>& curve) {
    std::string s = "epoch,error\n";
    for (std::size_t e = 0; e < curve.size(); ++e) s += std::to_string(e + 1) + "," + fmt("%.17g", curve[e]) + "\n";
    return s;
}

inline std::string accuracy_cell(const reference::AccuracyCell& c) {
    return c.std ? fmt("%.2f", c.mean) + " ± " + fmt("%.2f", *c.std) : fmt("%.2f", c.mean);
}

inline nlohmann::json summary_json(const MetricSummary& s) {
    nlohmann::json j{{"defined", s.defined}, {"undefined", s.undefined}};
    j["mean"] = s.mean ? nlohmann::json(*s.mean) : nlohmann::json(nullptr);
    j["std"] = s.std ? nlohmann::json(*s.std) : nlohmann::json(nullptr);
    return j;
}

}  // namespace detail

inline std::string metrics_csv(const CvResult& cv) {
    using detail::pct;
    using detail::ratio4;
    std::string s = "fold,accuracy_pct,precision_pct,recall_pct,lr_plus,lr_minus,tp,fp,fn,tn\n";
    for (std::size_t i = 0; i < cv.folds.size(); ++i) {
        const auto& m = cv.folds[i].metrics;
        const auto& c = cv.folds[i].confusion;
        s += std::to_string(i + 1) + "," + pct(m.accuracy) + "," + pct(m.precision) + "," + pct(m.recall) + "," +
             ratio4(m.lr_plus) + "," + ratio4(m.lr_minus) + "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," +
             std::to_string(c.fn) + "," + std::to_string(c.tn) + "\n";
    }
    const auto& sm = cv.summary;
    s += "mean," + pct(sm.accuracy.mean) + "," + pct(sm.precision.mean) + "," + pct(sm.recall.mean) + "," +
         ratio4(sm.lr_plus.mean) + "," + ratio4(sm.lr_minus.mean) + ",,,,\n";
    s += "std," + pct(sm.accuracy.std) + "," + pct(sm.precision.std) + "," + pct(sm.recall.std) + "," +
         ratio4(sm.lr_plus.std) + "," + ratio4(sm.lr_minus.std) + ",,,,\n";
    return s;
}

/// Metadata columns in comparison.csv that are not methods.
inline const std::set<std::string>& comparison_metadata_columns() {
    static const std::set<std::string> cols{"dataset", "samples_loaded", "samples_expected", "sample_count_ok"};
    return cols;
}

inline std::string comparison_csv(const ResultsBundle& bundle, const std::vector<reference::AccuracyRow>& reference) {
    std::string s = "dataset,samples_loaded,samples_expected,sample_count_ok,this run (" + model_kind_name(bundle.config.model) + ")";
    for (auto m : reference::kMethods) s += "," + std::string(m);
    s += "\n";
    const auto name = reference::canonical_name(bundle.dataset.name);
    const auto& ds = bundle.dataset;
    s += name + "," + std::to_string(ds.samples) + "," +
         (ds.reference_samples ? std::to_string(*ds.reference_samples) : std::string("-")) + "," +
         (ds.reference_samples ? (*ds.reference_samples == ds.samples ? "yes" : "no") : "unknown") + ",";
    const auto& acc = bundle.cv.summary.accuracy;
    s += acc.mean ? detail::fmt("%.2f", 100.0 * *acc.mean) + " ± " + detail::fmt("%.2f", 100.0 * acc.std.value_or(0.0)) : "-";
    const reference::AccuracyRow* row = nullptr;
    for (const auto& r : reference)
        if (r.dataset == name) row = &r;
    for (std::size_t m = 0; m < reference::kMethods.size(); ++m)
        s += "," + ((row && row->cells[m]) ? detail::accuracy_cell(*row->cells[m]) : std::string("-"));
    s += "\n";
    return s;
}

inline nlohmann::json manifest_json(const ResultsBundle& bundle) {
    const auto& ds = bundle.dataset;
    nlohmann::json j{
        {"tool", "deepdefect"},
        {"tool_version", kToolVersion},
        {"status", "ok"},
        {"config", config_to_json(bundle.config)},
        {"seed", bundle.config.seed},
        {"dataset",
         {{"name", ds.name},
          {"path", ds.path},
          {"checksum", {{"algorithm", "sha256"}, {"value", ds.sha256}}},
          {"samples", ds.samples},
          {"features", ds.features},
          {"defective", ds.defective},
          {"raw_rows", ds.raw_rows},
          {"dropped_rows", ds.dropped_rows}}},
        {"fold_seed_rule", "pretrain = seed + fold, fine_tune = seed + fold + 1000003, head = seed + fold + 2000006"},
        {"summary",
         {{"accuracy", detail::summary_json(bundle.cv.summary.accuracy)},
          {"precision", detail::summary_json(bundle.cv.summary.precision)},
          {"recall", detail::summary_json(bundle.cv.summary.recall)},
          {"lr_plus", detail::summary_json(bundle.cv.summary.lr_plus)},
          {"lr_minus", detail::summary_json(bundle.cv.summary.lr_minus)}}},
        {"durations_seconds", {{"total", bundle.total_seconds}, {"folds", bundle.fold_seconds}}},
        {"warnings", bundle.warnings},
    };
    j["dataset"]["samples_expected"] = ds.reference_samples ? nlohmann::json(*ds.reference_samples) : nlohmann::json(nullptr);
    return j;
}

/// Writes metrics.csv, curve_fold<i>.csv (1-based), curve_mean.csv,
/// comparison.csv and manifest.json. Existing files are overwritten.
inline std::vector<std::filesystem::path> emit_report(const ResultsBundle& bundle,
                                                      const std::vector<reference::AccuracyRow>& reference,
                                                      const std::filesystem::path& output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create '" + output_dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& file, const std::string& text) {
        detail::write_text(output_dir / file, text);
        written.push_back(output_dir / file);
    };
    put("metrics.csv", metrics_csv(bundle.cv));
    for (std::size_t f = 0; f < bundle.fine_tune_curves.size(); ++f)
        put("curve_fold" + std::to_string(f + 1) + ".csv", detail::curve_csv(bundle.fine_tune_curves[f]));
    put("curve_mean.csv", detail::curve_csv(bundle.mean_curve));
    put("comparison.csv", comparison_csv(bundle, reference));
    put("manifest.json", manifest_json(bundle).dump(2) + "\n");
    return written;
}

inline void write_failure_manifest(const ExperimentConfig& config, const std::string& stage, const std::exception& error) {
    if (config.output_dir.empty()) return;
    nlohmann::json j{
        {"tool", "deepdefect"},
        {"tool_version", kToolVersion},
        {"status", "failed"},
        {"config", config_to_json(config)},
        {"failure",
         {{"stage", stage},
          {"kind", dynamic_cast<const Error*>(&error) ? dynamic_cast<const Error&>(error).kind() : std::string("internal")},
          {"message", error.what()}}},
    };
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    std::ofstream out(std::filesystem::path(config.output_dir) / "manifest.json", std::ios::trunc);
    if (out) out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Methods x datasets accuracy tables (comparison.csv and friends)

/// First column names the dataset; metadata columns are skipped; every other
/// column is a method. A cell's leading number is its accuracy ("88.59 ± 2.61"
/// reads as 88.59); "-", "NA" or empty mean no value.
inline AccuracyTable parse_accuracy_table(std::istream& in) {
    AccuracyTable t;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> method_cols;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_commas(line);
        if (header) {
            for (std::size_t c = 1; c < fields.size(); ++c)
                if (!comparison_metadata_columns().contains(std::string(detail::unquote(fields[c])))) {
                    method_cols.push_back(c);
                    t.methods.emplace_back(detail::unquote(fields[c]));
                }
            header = false;
            continue;
        }
        if (fields.size() < 1 + (method_cols.empty() ? 0 : method_cols.back()))
            throw ParseError("too few columns", line_no);
        t.datasets.emplace_back(detail::unquote(fields[0]));
        std::vector<std::optional<double>> row;
        for (std::size_t c : method_cols) {
            const std::string cell(detail::unquote(fields[c]));
            if (cell.empty() || cell == "-" || cell == "NA") {
                row.emplace_back();
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || !std::isfinite(v)) throw ParseError("non-numeric accuracy '" + cell + "'", line_no, c + 1);
            row.emplace_back(v);
        }
        t.cells.push_back(std::move(row));
    }
    if (header) throw ParseError("empty table");
    return t;
}

/// The embedded published table in AccuracyTable form.
inline AccuracyTable published_accuracy_table() {
    AccuracyTable t;
    for (auto m : reference::kMethods) t.methods.emplace_back(m);
    for (const auto& r : reference::accuracy_table()) {
        t.datasets.emplace_back(r.dataset);
        std::vector<std::optional<double>> row;
        for (const auto& c : r.cells) row.push_back(c ? std::optional<double>(c->mean) : std::nullopt);
        t.cells.push_back(std::move(row));
    }
    return t;
}

}  // namespace deepdefect

#endif  // DEEPDEFECT_EXPERIMENT_HPP
