// Trains a DBN and a stacked sparse autoencoder on a synthetic two-cluster
// problem and reports 5-fold accuracy for each.

#include <cstdio>
#include <random>

#include "deepdefect/deepdefect.hpp"

namespace dd = deepdefect;

static dd::Dataset make_dataset(std::size_t n, Eigen::Index features, std::uint64_t seed) {
    dd::Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution defective(0.2);
    dd::Dataset ds;
    ds.name = "synthetic";
    ds.features.resize(static_cast<Eigen::Index>(n), features);
    for (std::size_t i = 0; i < n; ++i) {
        const bool d = defective(rng);
        ds.labels.push_back(d ? dd::Label::Defective : dd::Label::NonDefective);
        for (Eigen::Index c = 0; c < features; ++c) ds.features(static_cast<Eigen::Index>(i), c) = (d ? 1.0 : -0.5) + noise(rng);
    }
    return ds;
}

int main() {
    auto ds = make_dataset(300, 8, 7);
    ds.features = dd::zscore_apply(ds.features, dd::zscore_fit(ds.features));
    const auto plan = dd::stratified_kfold(ds, 5, 1);
    const dd::LayerSpec layers{{10, 5}};
    // Fine-tune rate 0.1: at the 0.01 default this small problem stays at the majority class.

    auto dbn = [&](const dd::Matrix& x, std::span<const dd::Label> y, const dd::Matrix& test, std::size_t fold) {
        const auto rbms = dd::greedy_pretrain(x, layers, {10, 4, 0.001, fold});
        const auto net = dd::unroll_to_classifier(rbms, dd::kNumClasses, fold + 1);
        return dd::predict(dd::fine_tune(net, x, y, {60, 4, 0.1, fold + 2}).classifier, test).labels;
    };
    auto ssae = [&](const dd::Matrix& x, std::span<const dd::Label> y, const dd::Matrix& test, std::size_t fold) {
        const auto enc = dd::greedy_stack_sae(x, layers, {0.05, 3.0}, {10, 4, 0.01, fold});
        const auto net = dd::encoders_to_classifier(enc, dd::kNumClasses, fold + 1);
        return dd::predict(dd::fine_tune(net, x, y, {60, 4, 0.1, fold + 2}).classifier, test).labels;
    };

    for (auto& [name, cv] : {std::pair{"dbn", dd::cross_validate(dbn, ds, plan, dd::Label::NonDefective)},
                             std::pair{"ssae", dd::cross_validate(ssae, ds, plan, dd::Label::NonDefective)}}) {
        const auto& acc = cv.summary.accuracy;
        std::printf("%-4s accuracy %.2f%% +- %.2f over %zu folds\n", name, 100.0 * *acc.mean, 100.0 * *acc.std, cv.folds.size());
    }
    return 0;
}
