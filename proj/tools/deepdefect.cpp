// deepdefect command-line front end: run an experiment, score label files,
// or rank methods from an accuracy table.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deepdefect/deepdefect.hpp"

namespace dd = deepdefect;

namespace {

std::vector<dd::Label> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dd::IoError("cannot open '" + path + "'");
    std::vector<dd::Label> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto token = dd::detail::trim(line);
        if (token.empty()) continue;
        std::optional<dd::Label> l;
        if (token == "defective") l = dd::Label::Defective;
        else if (token == "non-defective") l = dd::Label::NonDefective;
        else l = dd::detail::parse_label_token(token);
        if (!l) throw dd::ParseError(path + ": unrecognised label '" + std::string(token) + "'", line_no);
        labels.push_back(*l);
    }
    return labels;
}

std::vector<int> parse_layers(const std::string& text) {
    std::vector<int> out;
    for (auto part : dd::detail::split_commas(text)) {
        const auto v = dd::detail::parse_real(part);
        if (!v || *v < 1 || *v != static_cast<int>(*v)) throw dd::ConfigError("invalid --layers value '" + text + "'");
        out.push_back(static_cast<int>(*v));
    }
    return out;
}

std::string opt(const std::optional<double>& v, const char* pattern) {
    if (!v) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, *v);
    return buf;
}

int cmd_run(const std::string& config_path, const dd::ConfigOverrides& overrides) {
    const auto config = dd::resolve_config_file(config_path, overrides);
    const auto bundle = dd::run_experiment(config);
    dd::emit_report(bundle, dd::reference::accuracy_table(), config.output_dir);
    const auto& acc = bundle.cv.summary.accuracy;
    std::cout << bundle.dataset.name << " " << dd::model_kind_name(config.model) << " accuracy "
              << opt(acc.mean ? std::optional<double>(100.0 * *acc.mean) : std::nullopt, "%.2f") << " ± "
              << opt(acc.std ? std::optional<double>(100.0 * *acc.std) : std::nullopt, "%.2f") << " over " << config.folds
              << " folds; outputs in " << config.output_dir << "\n";
    for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_metrics(const std::string& predictions, const std::string& labels, const std::string& positive) {
    const auto pred = read_label_file(predictions);
    const auto actual = read_label_file(labels);
    const auto cm = dd::confusion(pred, actual, dd::detail::parse_positive_class(positive));
    const auto m = dd::metrics(cm);
    std::cout << "accuracy,precision,recall,lr_plus,lr_minus,tp,fp,fn,tn\n"
              << opt(m.accuracy, "%.6f") << "," << opt(m.precision, "%.6f") << "," << opt(m.recall, "%.6f") << ","
              << opt(m.lr_plus, "%.6f") << "," << opt(m.lr_minus, "%.6f") << "," << cm.tp << "," << cm.fp << "," << cm.fn
              << "," << cm.tn << "\n";
    return 0;
}

int cmd_rank(const std::string& table_path) {
    std::ifstream in(table_path);
    if (!in) throw dd::IoError("cannot open '" + table_path + "'");
    const auto result = dd::weighted_rank(dd::parse_accuracy_table(in));
    std::cout << "rank,method,mean_rank,datasets\n";
    for (const auto& r : result.ranking)
        std::cout << r.rank << "," << r.method << "," << opt(r.score, "%.4f") << "," << r.datasets << "\n";
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep generative defect prediction (DBN / stacked sparse autoencoder)"};
    app.require_subcommand(1);

    std::string config_path, dataset, model, layers, out_dir;
    int folds = 0;
    std::uint64_t seed = 0;
    bool leak_free = false;
    auto* run = app.add_subcommand("run", "Cross-validate a model and write the report files");
    run->add_option("--config", config_path, "Experiment config (JSON) or a previous manifest.json")->required();
    auto* o_dataset = run->add_option("--dataset", dataset, "Dataset file (.arff or .csv)");
    auto* o_model = run->add_option("--model", model, "dbn or ssae")->check(CLI::IsMember({"dbn", "ssae"}));
    auto* o_layers = run->add_option("--layers", layers, "Hidden layer sizes, e.g. 30,12");
    auto* o_folds = run->add_option("--folds", folds, "Number of CV folds");
    auto* o_seed = run->add_option("--seed", seed, "Master RNG seed");
    run->add_flag("--leak-free-norm", leak_free, "Fit standardization on each training fold only");
    auto* o_out = run->add_option("--out", out_dir, "Output directory");

    std::string predictions, labels, positive = "non-defective";
    auto* met = app.add_subcommand("metrics", "Confusion-matrix metrics from label files (one label per line)");
    met->add_option("--predictions", predictions, "Predicted labels")->required();
    met->add_option("--labels", labels, "True labels")->required();
    met->add_option("--positive-class", positive, "defective or non-defective (default non-defective)");

    std::string table;
    auto* rank = app.add_subcommand("rank", "Weighted rank over a methods x datasets accuracy table");
    rank->add_option("--table", table, "CSV table, e.g. a comparison.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*run) {
            dd::ConfigOverrides ov;
            if (*o_dataset) ov.dataset_path = dataset;
            if (*o_model) ov.model = dd::parse_model_kind(model);
            if (*o_layers) ov.layers = parse_layers(layers);
            if (*o_folds) ov.folds = folds;
            if (*o_seed) ov.seed = seed;
            if (*o_out) ov.output_dir = out_dir;
            ov.leak_free_normalization = leak_free;
            return cmd_run(config_path, ov);
        }
        if (*met) return cmd_metrics(predictions, labels, positive);
        return cmd_rank(table);
    } catch (const dd::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
    }
    return 1;
}
