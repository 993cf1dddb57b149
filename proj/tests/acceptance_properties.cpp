// Property-level acceptance checks. Runs without any external data and prints
// one PASS/FAIL line per criterion; exits non-zero if any criterion fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace dd = deepdefect;
namespace fs = std::filesystem;
using dd::Label;
using dd::Matrix;
using dd::Vector;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

dd::FeedforwardClassifier random_net(dd::Rng& rng) {
    dd::FeedforwardClassifier net;
    net.hidden.push_back({dd::test::random_matrix(4, 3, rng), dd::test::random_matrix(3, 1, rng)});
    net.head = {dd::test::random_matrix(3, 2, rng), dd::test::random_matrix(2, 1, rng)};
    return net;
}

dd::SparseAutoencoderParams random_sae(dd::OutputKind kind, dd::Rng& rng) {
    return {dd::test::random_matrix(4, 3, rng), dd::test::random_matrix(3, 1, rng), dd::test::random_matrix(3, 4, rng),
            dd::test::random_matrix(4, 1, rng), kind};
}

dd::ExperimentConfig smoke_config(const fs::path& out, std::uint64_t seed, dd::ModelKind model) {
    dd::ExperimentConfig c;
    c.dataset_path = std::string(DEEPDEFECT_FIXTURE_DIR) + "/smoke10.arff";
    c.dataset_name = "smoke10";
    c.model = model;
    c.hidden_sizes.hidden_sizes = {4};
    c.pretrain = {2, 2, 0.01, 0};
    c.fine_tune = {6, 2, 0.1, 0};
    c.folds = 2;
    c.seed = seed;
    c.output_dir = out.string();
    return c;
}

// Criterion 6: LR identities on the confusion matrices of actual runs, plus
// the CM1 reverse-solved fixture.
Outcome likelihood_ratio_consistency() {
    Outcome o;
    const auto out = fs::temp_directory_path() / "deepdefect_acceptance_c6";
    std::size_t checked = 0;
    auto check_run = [&](const dd::CvResult& cv) {
        for (const auto& f : cv.folds) {
            const auto& c = f.confusion;
            const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
            const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
            if (f.metrics.lr_plus) {
                const double sens = tp / (tp + fn), spec = tn / (tn + fp);
                o.require(std::abs(*f.metrics.lr_plus * (1.0 - spec) - sens) <= 1e-12, "LR+ identity broken on a run");
                ++checked;
            }
            if (f.metrics.lr_minus) {
                const double sens = tp / (tp + fn), spec = tn / (tn + fp);
                o.require(std::abs(*f.metrics.lr_minus * spec - (1.0 - sens)) <= 1e-12, "LR- identity broken on a run");
                ++checked;
            }
        }
    };
    for (std::uint64_t seed = 0; seed < 4; ++seed)
        for (auto model : {dd::ModelKind::Dbn, dd::ModelKind::Ssae})
            for (auto positive : {Label::NonDefective, Label::Defective}) {
                auto c = smoke_config(out, seed, model);
                c.positive_class = positive;
                check_run(dd::run_experiment(c).cv);
            }
    // Synthetic CV with a noisy predictor so both ratios are usually defined.
    dd::Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ds = dd::test::two_cluster_dataset(200, 3, 0.5, 1.0, rng(), 0.3);
        const auto plan = dd::stratified_kfold(ds, 10, rng());
        check_run(dd::cross_validate(
            [&](const Matrix&, std::span<const Label>, const Matrix& test, std::size_t) {
                std::vector<Label> p;
                for (Eigen::Index r = 0; r < test.rows(); ++r)
                    p.push_back(test(r, 0) + 0.5 * (static_cast<double>(rng() % 1000) / 500.0 - 1.0) > 0 ? Label::Defective
                                                                                                             : Label::NonDefective);
                return p;
            },
            ds, plan, Label::NonDefective));
    }
    o.require(checked > 500, "too few defined ratios checked");

    const auto m = dd::metrics({443, 38, 14, 10});
    o.require(std::abs(*m.lr_plus - 1.22) <= 0.03, "fixture LR+ off");
    o.require(std::abs(*m.lr_minus - 0.16) <= 0.03, "fixture LR- off");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu ratios on run confusion matrices; fixture LR+ %.4f, LR- %.4f", checked, *m.lr_plus,
                  *m.lr_minus);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome gradient_checks() {
    Outcome o;
    dd::Rng rng(7);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        auto net = random_net(rng);
        const Matrix x = dd::test::random_matrix(5, 4, rng);
        const auto y = dd::test::random_labels(5, 0.5, rng);
        const auto g = dd::classifier_loss_and_gradient(net, x, y);
        auto loss = [&] { return dd::test::naive_classifier_loss(net, x, y); };
        worst = std::max({worst, dd::test::relative_error(g.gradient.hidden[0].weights, dd::test::numeric_gradient(net.hidden[0].weights, loss)),
                          dd::test::relative_error(g.gradient.hidden[0].bias, dd::test::numeric_gradient(net.hidden[0].bias, loss)),
                          dd::test::relative_error(g.gradient.head.weights, dd::test::numeric_gradient(net.head.weights, loss)),
                          dd::test::relative_error(g.gradient.head.bias, dd::test::numeric_gradient(net.head.bias, loss))});
    }
    for (double beta : {0.0, 3.0, 10.0})
        for (int draw = 0; draw < 100; ++draw) {
            auto p = random_sae(draw % 2 ? dd::OutputKind::Logistic : dd::OutputKind::Linear, rng);
            const Matrix x = dd::test::random_matrix(6, 4, rng);
            const auto g = dd::sae_loss_and_gradient(p, x, {0.05, beta});
            auto loss = [&] { return dd::test::naive_sae_loss(p, x, 0.05, beta); };
            worst = std::max({worst, dd::test::relative_error(g.gradient.encoder_weights, dd::test::numeric_gradient(p.encoder_weights, loss)),
                              dd::test::relative_error(g.gradient.encoder_bias, dd::test::numeric_gradient(p.encoder_bias, loss)),
                              dd::test::relative_error(g.gradient.decoder_weights, dd::test::numeric_gradient(p.decoder_weights, loss)),
                              dd::test::relative_error(g.gradient.decoder_bias, dd::test::numeric_gradient(p.decoder_bias, loss))});
        }
    o.require(worst < 1e-5, "relative error too large");
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst relative error %.2e over 400 draws", worst);
    o.detail = (o.pass ? "" : o.detail + "; ") + buf;
    return o;
}

Outcome cd1_brute_force() {
    Outcome o;
    dd::Rng rng(8);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        dd::RbmParams p{dd::test::random_matrix(3, 2, rng, -2, 2), dd::test::random_matrix(3, 1, rng),
                        dd::test::random_matrix(2, 1, rng), dd::VisibleKind::Bernoulli};
        const std::vector<double> v0{static_cast<double>(rng() % 2), static_cast<double>(rng() % 2), static_cast<double>(rng() % 2)};
        Matrix v(1, 3);
        v << v0[0], v0[1], v0[2];
        for (int state = 0; state < 4; ++state) {
            const std::vector<double> h0{static_cast<double>(state & 1), static_cast<double>((state >> 1) & 1)};
            Matrix h(1, 2);
            h << h0[0], h0[1];
            const auto got = dd::cd1_update(p, v, 0.1, dd::test::FixedSampler{h}).params;
            const auto want = dd::test::naive_cd1(p, v0, h0, 0.1);
            worst = std::max({worst, (got.weights - p.weights - want.dw).cwiseAbs().maxCoeff(),
                              (got.visible_bias - p.visible_bias - want.dvb).cwiseAbs().maxCoeff(),
                              (got.hidden_bias - p.hidden_bias - want.dhb).cwiseAbs().maxCoeff()});
        }
    }
    o.require(worst <= 1e-8, "update differs from oracle");
    char buf[96];
    std::snprintf(buf, sizeof buf, "max deviation %.2e over 200 stubbed updates", worst);
    o.detail = buf;
    return o;
}

Outcome fold_invariants() {
    Outcome o;
    dd::Rng rng(9);
    for (int trial = 0; trial < 500 && o.pass; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 9);
        const std::size_t n = static_cast<std::size_t>(k) + rng() % 300;
        std::bernoulli_distribution b(0.05 + 0.9 * static_cast<double>(rng() % 100) / 100.0);
        std::vector<Label> y(n);
        for (auto& l : y) l = b(rng) ? Label::Defective : Label::NonDefective;
        const auto plan = dd::stratified_kfold(y, k, rng());
        o.require(plan.folds.size() == static_cast<std::size_t>(k), "wrong fold count");
        std::vector<int> seen(n, 0);
        for (auto cls : {Label::Defective, Label::NonDefective}) {
            std::size_t lo = n, hi = 0;
            for (const auto& f : plan.folds) {
                std::size_t c = 0;
                for (auto i : f.test) c += y[i] == cls;
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            o.require(hi - lo <= 1, "per-class balance off by more than one");
        }
        for (const auto& f : plan.folds) {
            std::vector<int> in_test(n, 0);
            for (auto i : f.test) {
                ++seen[i];
                in_test[i] = 1;
            }
            o.require(f.train.size() + f.test.size() == n, "train/test do not cover dataset");
            for (auto i : f.train) o.require(!in_test[i], "train and test overlap");
        }
        for (int s : seen) o.require(s == 1, "sample not tested exactly once");
    }
    if (o.pass) o.detail = "500 random label vectors";
    return o;
}

Outcome metric_oracle() {
    Outcome o;
    dd::Rng rng(10);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const auto pred = dd::test::random_labels(n, static_cast<double>(rng() % 100) / 100.0, rng);
        const auto act = dd::test::random_labels(n, static_cast<double>(rng() % 100) / 100.0, rng);
        const Label pos = trial % 2 ? Label::Defective : Label::NonDefective;
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] == pos) (act[i] == pos ? tp : fp)++;
            else (act[i] == pos ? fn : tn)++;
        }
        const auto cm = dd::confusion(pred, act, pos);
        o.require(cm.tp == tp && cm.fp == fp && cm.fn == fn && cm.tn == tn, "confusion counts differ");
        const auto m = dd::metrics(cm);
        const double TP = static_cast<double>(tp), FP = static_cast<double>(fp), FN = static_cast<double>(fn),
                     TN = static_cast<double>(tn);
        o.require(*m.accuracy == (TP + TN) / static_cast<double>(n), "accuracy differs");
        o.require(m.precision.has_value() == (tp + fp > 0), "precision definedness");
        if (m.precision) o.require(*m.precision == TP / (TP + FP), "precision differs");
        o.require(m.recall.has_value() == (tp + fn > 0), "recall definedness");
        if (m.recall) o.require(*m.recall == TP / (TP + FN), "recall differs");
        o.require(m.lr_plus.has_value() == (tp + fn > 0 && fp > 0), "LR+ definedness");
        if (m.lr_plus) o.require(*m.lr_plus == (TP / (TP + FN)) / (FP / (FP + TN)), "LR+ differs");
        o.require(m.lr_minus.has_value() == (tp + fn > 0 && tn > 0), "LR- definedness");
        if (m.lr_minus) o.require(*m.lr_minus == (FN / (TP + FN)) / (TN / (TN + FP)), "LR- differs");
    }
    if (o.pass) o.detail = "1000 random prediction/label pairs";
    return o;
}

Outcome zscore_invariants() {
    Outcome o;
    dd::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rows = 2 + static_cast<Eigen::Index>(rng() % 100);
        const auto cols = 1 + static_cast<Eigen::Index>(rng() % 10);
        const double scale = std::pow(10.0, static_cast<double>(rng() % 9) - 4.0);
        Matrix m = dd::test::random_matrix(rows, cols, rng, -scale, scale);
        m.col(0).array() += 1000.0 * scale;
        const Eigen::Index flat = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(cols));
        if (trial % 3 == 0) m.col(flat).setConstant(3.5);
        const auto z = dd::zscore_apply(m, dd::zscore_fit(m));
        for (Eigen::Index c = 0; c < cols; ++c) {
            double mean = 0.0, ss = 0.0;
            for (Eigen::Index r = 0; r < rows; ++r) mean += z(r, c);
            mean /= static_cast<double>(rows);
            for (Eigen::Index r = 0; r < rows; ++r) ss += (z(r, c) - mean) * (z(r, c) - mean);
            const double sd = std::sqrt(ss / static_cast<double>(rows));
            o.require(std::abs(mean) < 1e-9, "column mean not zero");
            if (trial % 3 == 0 && c == flat) o.require(z.col(c).isZero(0.0), "constant column not mapped to zero");
            else o.require(std::abs(sd - 1.0) < 1e-9, "column std not one");
        }
    }
    if (o.pass) o.detail = "200 random matrices, a third with a constant column";
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto a = fs::temp_directory_path() / "deepdefect_acceptance_c12a";
    const auto b = fs::temp_directory_path() / "deepdefect_acceptance_c12b";
    for (auto model : {dd::ModelKind::Dbn, dd::ModelKind::Ssae}) {
        const auto ra = dd::run_experiment(smoke_config(a, 5, model));
        const auto rb = dd::run_experiment(smoke_config(b, 5, model));
        dd::emit_report(ra, dd::reference::accuracy_table(), a);
        dd::emit_report(rb, dd::reference::accuracy_table(), b);
        std::ifstream fa(a / "metrics.csv", std::ios::binary), fb(b / "metrics.csv", std::ios::binary);
        const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
        o.require(!sa.empty() && sa == sb, "metrics.csv differs between identical runs");
    }
    if (o.pass) o.detail = "metrics.csv byte-identical for dbn and ssae on the 10-sample smoke dataset";
    return o;
}

Outcome softmax_properties() {
    Outcome o;
    dd::Rng rng(13);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        auto net = random_net(rng);
        net.head.weights *= 20.0;
        const Matrix x = dd::test::random_matrix(100, 4, rng, -100, 100);
        const auto p = dd::predict(net, x);
        for (Eigen::Index r = 0; r < x.rows(); ++r) worst = std::max(worst, std::abs(p.probabilities.row(r).sum() - 1.0));
        auto shifted = net;
        shifted.head.bias.array() += static_cast<double>(rng() % 1000) - 500.0;
        o.require(dd::predict(shifted, x).labels == p.labels, "argmax changed under logit shift");
    }
    o.require(worst <= 1e-9, "softmax rows do not sum to one");
    char buf[96];
    std::snprintf(buf, sizeof buf, "1000 inputs, max |sum - 1| = %.1e", worst);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome kl_properties() {
    Outcome o;
    const double spot = dd::kl_sparsity(0.05, Vector::Constant(1, 0.2));
    o.require(std::abs(spot - 0.09394) < 5e-6, "spot value off");
    o.require(dd::kl_sparsity(0.05, Vector::Constant(1, 0.05)) == 0.0, "not zero at target");
    for (double q = 0.001; q < 1.0; q += 0.0137)
        if (std::abs(q - 0.05) > 1e-12) o.require(dd::kl_sparsity(0.05, Vector::Constant(1, q)) > 0.0, "not positive off target");
    for (double q : {0.0, 1e-300, 1.0, 1.0 - 1e-17})
        o.require(std::isfinite(dd::kl_sparsity(0.05, Vector::Constant(1, q))), "non-finite at clamp boundary");
    char buf[64];
    std::snprintf(buf, sizeof buf, "KL(0.05 || 0.2) = %.5f", spot);
    if (o.pass) o.detail = buf;
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {6, "likelihood-ratio consistency", likelihood_ratio_consistency},
        {7, "finite-difference gradients", gradient_checks},
        {8, "CD-1 brute-force oracle", cd1_brute_force},
        {9, "stratified fold invariants", fold_invariants},
        {10, "metrics vs counting oracle", metric_oracle},
        {11, "z-score invariants", zscore_invariants},
        {12, "seeded determinism", determinism},
        {13, "softmax normalisation and shift invariance", softmax_properties},
        {14, "KL sparsity penalty", kl_properties},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        failed += !o.pass;
    }
    std::fflush(stdout);
    return failed ? 1 : 0;
}
