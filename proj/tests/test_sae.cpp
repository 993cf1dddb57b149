#include <gtest/gtest.h>

#include "deepdefect/sae.hpp"
#include "test_support.hpp"

namespace dd = deepdefect;
using dd::Matrix;
using dd::OutputKind;
using dd::Vector;

namespace {

dd::SparseAutoencoderParams random_sae(Eigen::Index n_in, Eigen::Index n_h, OutputKind kind, dd::Rng& rng) {
    dd::SparseAutoencoderParams p;
    p.encoder_weights = dd::test::random_matrix(n_in, n_h, rng);
    p.encoder_bias = dd::test::random_matrix(n_h, 1, rng);
    p.decoder_weights = dd::test::random_matrix(n_h, n_in, rng);
    p.decoder_bias = dd::test::random_matrix(n_in, 1, rng);
    p.output_kind = kind;
    return p;
}

double mean_sparsity_gap(const dd::SparseAutoencoderParams& p, const Matrix& x, double rho) {
    const Vector rho_hat = dd::sae_forward(p, x).hidden.colwise().mean().transpose();
    return (rho_hat.array() - rho).abs().mean();
}

}  // namespace

TEST(SaeForward, ZeroParameters) {
    dd::SparseAutoencoderParams p{Matrix::Zero(3, 2), Vector::Zero(2), Matrix::Zero(2, 3), Vector::Zero(3), OutputKind::Linear};
    dd::Rng rng(1);
    const auto f = dd::sae_forward(p, dd::test::random_matrix(4, 3, rng));
    EXPECT_TRUE(f.hidden.isConstant(0.5));
    EXPECT_TRUE(f.reconstruction.isZero(0.0));
    p.output_kind = OutputKind::Logistic;
    EXPECT_TRUE(dd::sae_forward(p, Matrix::Ones(2, 3)).reconstruction.isConstant(0.5));
}

TEST(SaeForward, OneByOneHandCase) {
    dd::SparseAutoencoderParams p{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Matrix::Constant(1, 1, 2.0),
                                  Vector::Constant(1, -1.0), OutputKind::Linear};
    const Matrix x = Matrix::Constant(1, 1, 1.0);
    const auto f = dd::sae_forward(p, x);
    EXPECT_NEAR(f.hidden(0, 0), 0.731059, 1e-6);
    EXPECT_NEAR(f.reconstruction(0, 0), 0.462117, 1e-6);
    EXPECT_NEAR(dd::sae_loss_and_gradient(p, x, {0.05, 0.0}).loss, 0.144659, 1e-6);
}

TEST(SaeForward, BatchEqualsRowByRow) {
    dd::Rng rng(2);
    for (auto kind : {OutputKind::Linear, OutputKind::Logistic}) {
        const auto p = random_sae(5, 3, kind, rng);
        const Matrix x = dd::test::random_matrix(7, 5, rng);
        const auto batch = dd::sae_forward(p, x);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const auto single = dd::sae_forward(p, x.row(r));
            EXPECT_TRUE(single.hidden.row(0).isApprox(batch.hidden.row(r), 1e-15));
            EXPECT_TRUE(single.reconstruction.row(0).isApprox(batch.reconstruction.row(r), 1e-15));
        }
    }
    EXPECT_THROW(dd::sae_forward(random_sae(5, 3, OutputKind::Linear, rng), Matrix::Zero(1, 4)), dd::DimensionError);
}

TEST(KlSparsity, SpotValueZeroAtTargetAndFiniteAtClamp) {
    EXPECT_NEAR(dd::kl_sparsity(0.05, Vector::Constant(1, 0.2)), 0.09394, 1e-5);
    EXPECT_NEAR(dd::kl_sparsity(0.05, Vector::Constant(4, 0.2)), 4 * 0.0939430, 1e-6);
    EXPECT_EQ(dd::kl_sparsity(0.05, Vector::Constant(3, 0.05)), 0.0);
    EXPECT_TRUE(std::isfinite(dd::kl_sparsity(0.05, Vector::Constant(2, 0.0))));
    EXPECT_TRUE(std::isfinite(dd::kl_sparsity(0.05, Vector::Constant(2, 1.0))));
    EXPECT_THROW(dd::kl_sparsity(0.0, Vector::Constant(1, 0.2)), dd::InvalidArgumentError);
    EXPECT_THROW(dd::kl_sparsity(1.0, Vector::Constant(1, 0.2)), dd::InvalidArgumentError);
}

TEST(SaeGradient, MatchesFiniteDifferences) {
    dd::Rng rng(3);
    for (auto kind : {OutputKind::Linear, OutputKind::Logistic})
        for (double beta : {0.0, 3.0, 10.0})
            for (int draw = 0; draw < 10; ++draw) {
                auto p = random_sae(4, 3, kind, rng);
                const Matrix x = dd::test::random_matrix(6, 4, rng);
                const dd::SparsityConfig s{0.05, beta};
                const auto g = dd::sae_loss_and_gradient(p, x, s);
                auto loss = [&] { return dd::test::naive_sae_loss(p, x, s.rho, s.beta); };
                EXPECT_NEAR(g.loss, loss(), 1e-10);
                EXPECT_LT(dd::test::relative_error(g.gradient.encoder_weights, dd::test::numeric_gradient(p.encoder_weights, loss)), 1e-5);
                EXPECT_LT(dd::test::relative_error(g.gradient.encoder_bias, dd::test::numeric_gradient(p.encoder_bias, loss)), 1e-5);
                EXPECT_LT(dd::test::relative_error(g.gradient.decoder_weights, dd::test::numeric_gradient(p.decoder_weights, loss)), 1e-5);
                EXPECT_LT(dd::test::relative_error(g.gradient.decoder_bias, dd::test::numeric_gradient(p.decoder_bias, loss)), 1e-5);
            }
}

TEST(SaeLoss, PerfectReconstructionWithoutSparsityIsZero) {
    Matrix x(3, 2);
    x << 0.4, -1.5, 0.4, -1.5, 0.4, -1.5;
    dd::SparseAutoencoderParams p{Matrix::Zero(2, 2), Vector::Zero(2), Matrix::Zero(2, 2), x.row(0).transpose(),
                                  OutputKind::Linear};
    EXPECT_EQ(dd::sae_loss_and_gradient(p, x, {0.05, 0.0}).loss, 0.0);
    EXPECT_GT(dd::sae_loss_and_gradient(p, x, {0.05, 3.0}).loss, 0.0);
}

TEST(TrainSae, LossAndSparsityGapDecrease) {
    const auto ds = dd::test::two_cluster_dataset(20, 6, 1.0, 0.5, 4);
    dd::Rng rng(5);
    const auto init = dd::SparseAutoencoderParams::random(6, 4, OutputKind::Linear, rng);
    const dd::SparsityConfig s{0.05, 3.0};
    const auto out = dd::train_sae(init, ds.features, s, {50, 4, 0.01, 6});
    ASSERT_EQ(out.loss_per_epoch.size(), 50u);
    EXPECT_LT(out.loss_per_epoch.back(), out.loss_per_epoch.front());
    EXPECT_LT(mean_sparsity_gap(out.params, ds.features, s.rho), mean_sparsity_gap(init, ds.features, s.rho));
}

TEST(TrainSae, DeterministicAndZeroEpochIdentity) {
    const auto ds = dd::test::two_cluster_dataset(12, 4, 1.0, 0.5, 7);
    dd::Rng rng(8);
    const auto init = dd::SparseAutoencoderParams::random(4, 3, OutputKind::Logistic, rng);
    const auto a = dd::train_sae(init, ds.features, {}, {5, 3, 0.01, 9});
    const auto b = dd::train_sae(init, ds.features, {}, {5, 3, 0.01, 9});
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.loss_per_epoch, b.loss_per_epoch);
    EXPECT_EQ(dd::train_sae(init, ds.features, {}, {0, 3, 0.01, 9}).params, init);
    EXPECT_THROW(dd::train_sae(init, ds.features, {1.5, 3.0}, {1, 3, 0.01, 9}), dd::InvalidArgumentError);
    EXPECT_THROW(dd::train_sae(init, ds.features, {}, {1, 13, 0.01, 9}), dd::InvalidArgumentError);
}

TEST(TrainSae, DivergenceRaisesNumericOverflow) {
    dd::Rng rng(10);
    const auto init = random_sae(3, 2, OutputKind::Linear, rng);
    const Matrix x = dd::test::random_matrix(8, 3, rng, -1e5, 1e5);
    EXPECT_THROW(dd::train_sae(init, x, {}, {50, 2, 10.0, 1}), dd::NumericOverflowError);
}

TEST(GreedyStackSae, ShapesOutputKindsAndComposition) {
    const auto ds = dd::test::two_cluster_dataset(30, 37, 1.0, 1.0, 11);
    const auto enc = dd::greedy_stack_sae(ds.features, {{25, 15, 7}}, {}, {2, 5, 0.01, 12});
    ASSERT_EQ(enc.size(), 3u);
    const std::vector<std::pair<int, int>> shapes{{37, 25}, {25, 15}, {15, 7}};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(enc[i].encoder_weights.rows(), shapes[i].first);
        EXPECT_EQ(enc[i].encoder_weights.cols(), shapes[i].second);
        EXPECT_EQ(enc[i].decoder_weights.rows(), shapes[i].second);
        EXPECT_EQ(enc[i].decoder_weights.cols(), shapes[i].first);
        EXPECT_EQ(enc[i].output_kind, i == 0 ? OutputKind::Linear : OutputKind::Logistic);
    }
    const auto net = dd::encoders_to_classifier(enc, 2, 13);
    Matrix composed = ds.features;
    for (const auto& e : enc) composed = dd::sae_forward(e, composed).hidden;
    EXPECT_TRUE(dd::hidden_activations(net, ds.features).back().isApprox(composed, 1e-14));
    EXPECT_EQ(net.head.weights.rows(), 7);
    EXPECT_TRUE(net.head.bias.isZero(0.0));
}

TEST(GreedyStackSae, OvercompleteLayersTrain) {
    const auto ds = dd::test::two_cluster_dataset(20, 5, 1.0, 1.0, 14);
    const auto enc = dd::greedy_stack_sae(ds.features, {{20, 30}}, {}, {50, 4, 0.01, 15});
    ASSERT_EQ(enc.size(), 2u);
    EXPECT_EQ(enc[1].n_hidden(), 30);
    EXPECT_TRUE(enc[1].encoder_weights.allFinite());
}

TEST(EncodersToClassifier, RejectsBrokenChain) {
    dd::Rng rng(16);
    std::vector<dd::SparseAutoencoderParams> enc{random_sae(4, 3, OutputKind::Linear, rng),
                                                 random_sae(2, 2, OutputKind::Logistic, rng)};
    EXPECT_THROW(dd::encoders_to_classifier(enc, 2, 1), dd::DimensionError);
}
