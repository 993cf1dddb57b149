#include <gtest/gtest.h>

#include <sstream>

#include "deepdefect/serialize.hpp"
#include "test_support.hpp"

namespace dd = deepdefect;

namespace {

dd::FeedforwardClassifier sample_net(dd::Rng& rng) {
    dd::FeedforwardClassifier net;
    net.hidden.push_back({dd::test::random_matrix(5, 4, rng, -3, 3), dd::test::random_matrix(4, 1, rng)});
    net.hidden.push_back({dd::test::random_matrix(4, 3, rng, -1e-300, 1e-300), dd::test::random_matrix(3, 1, rng, -1e8, 1e8)});
    net.head = {dd::test::random_matrix(3, 2, rng), dd::test::random_matrix(2, 1, rng)};
    return net;
}

}  // namespace

TEST(Serialize, RoundTripIsBitExact) {
    dd::Rng rng(1);
    for (auto kind : {dd::ModelKind::Dbn, dd::ModelKind::Ssae}) {
        const dd::SavedModel model{kind, sample_net(rng)};
        std::stringstream buf;
        dd::save_model(buf, model);
        const auto back = dd::load_model(buf);
        EXPECT_EQ(back.kind, kind);
        EXPECT_EQ(back.classifier, model.classifier);
        const dd::Matrix x = dd::test::random_matrix(10, 5, rng);
        EXPECT_EQ(dd::predict(back.classifier, x).probabilities, dd::predict(model.classifier, x).probabilities);
    }
}

TEST(Serialize, ModelKindNames) {
    EXPECT_EQ(dd::parse_model_kind("dbn"), dd::ModelKind::Dbn);
    EXPECT_EQ(dd::parse_model_kind("ssae"), dd::ModelKind::Ssae);
    EXPECT_THROW(dd::parse_model_kind("svm"), dd::ConfigError);
}

TEST(Serialize, RejectsMalformedInput) {
    dd::Rng rng(2);
    std::stringstream good;
    dd::save_model(good, {dd::ModelKind::Dbn, sample_net(rng)});
    const std::string text = good.str();

    auto load = [](const std::string& s) {
        std::istringstream in(s);
        return dd::load_model(in);
    };
    EXPECT_THROW(load("not-a-model\n"), dd::ParseError);
    EXPECT_THROW(load("deepdefect-model\nversion 2\n"), dd::ParseError);
    EXPECT_THROW(load("deepdefect-model\nversion 1\nkind svm\n"), dd::ParseError);
    EXPECT_THROW(load(text.substr(0, text.size() / 2)), dd::ParseError);

    std::string broken = text;
    broken.replace(broken.find("matrix 4 3"), 10, "matrix 2 3");
    EXPECT_ANY_THROW(load(broken));
}
