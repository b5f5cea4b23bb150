// SPDX-License-Identifier: Apache-2.0
#include "spgd/error.hpp"
#include "spgd/io.hpp"
#include "spgd/separated_model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace spgd;

namespace {

SeparatedModel xy_model(int copies = 1) {
    SeparatedModel model(std::vector<BasisSpec>(2, BasisSpec{BasisFamily::monomial, 1, {-1, 1}}));
    for (int i = 0; i < copies; ++i) {
        Mode mode = Mode::zeros({1, 1});
        mode.coeffs[0] << 0, 1;
        mode.coeffs[1] << 0, 1;
        model.push_mode(mode);
    }
    return model;
}

SeparatedModel random_model(std::mt19937_64& rng, int d, int rank) {
    std::uniform_int_distribution<int> deg(0, 4);
    std::normal_distribution<double> g;
    std::vector<BasisSpec> specs;
    for (int k = 0; k < d; ++k) specs.push_back({k % 2 ? BasisFamily::monomial : BasisFamily::chebyshev, 4, {-1.0 - k, 2.0}});
    SeparatedModel model(specs, {"spgd", 7});
    for (int m = 0; m < rank; ++m) {
        std::vector<int> degrees(static_cast<std::size_t>(d));
        for (auto& x : degrees) x = deg(rng);
        Mode mode = Mode::zeros(degrees);
        for (auto& a : mode.coeffs)
            for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
        model.push_mode(mode);
    }
    return model;
}

Eigen::MatrixXd random_points(std::mt19937_64& rng, int n, int d) {
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    Eigen::MatrixXd p(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) p(i, k) = u(rng);
    return p;
}

}  // namespace

TEST(SeparatedModel, EmptyModelEvaluatesToZero) {
    const SeparatedModel model(std::vector<BasisSpec>(2, BasisSpec{}));
    EXPECT_EQ(model.evaluate(Eigen::Vector2d(0.3, -0.2)), 0.0);
    EXPECT_TRUE(model.evaluate_batch(Eigen::MatrixXd::Random(2, 2)).isZero());
}

TEST(SeparatedModel, RankOneProduct) { EXPECT_NEAR(xy_model().evaluate(Eigen::Vector2d(0.5, 0.4)), 0.2, 1e-15); }

TEST(SeparatedModel, ModesAdd) { EXPECT_NEAR(xy_model(2).evaluate(Eigen::Vector2d(0.5, 0.4)), 0.4, 1e-15); }

TEST(SeparatedModel, BatchEvaluation) {
    Eigen::MatrixXd p(3, 2);
    p << 1, 1, 0, 5, -1, 1;
    EXPECT_TRUE(xy_model().evaluate_batch(p).isApprox(Eigen::Vector3d(1, 0, -1)));
    EXPECT_EQ(xy_model().evaluate_batch(Eigen::MatrixXd(0, 2)).size(), 0);
}

TEST(SeparatedModel, WrongDimensionThrows) {
    EXPECT_THROW(xy_model().evaluate(Eigen::Vector3d(1, 2, 3)), InvalidInput);
    EXPECT_THROW(xy_model().evaluate_batch(Eigen::MatrixXd::Zero(2, 3)), InvalidInput);
}

TEST(SeparatedModel, PushZeroModeLeavesValuesUnchanged) {
    SeparatedModel model = xy_model();
    model.push_mode(Mode::zeros({1, 1}));
    EXPECT_NEAR(model.evaluate(Eigen::Vector2d(0.5, 0.4)), 0.2, 1e-15);
}

TEST(SeparatedModel, NonConformingModeThrows) {
    SeparatedModel model = xy_model();
    EXPECT_THROW(model.push_mode(Mode::ones({1, 1, 1})), InvalidInput);
    Mode bad = Mode::ones({1, 1});
    bad.coeffs[0].resize(3);
    bad.coeffs[0].setOnes();
    EXPECT_THROW(model.push_mode(bad), InvalidInput);
    Mode nan = Mode::ones({1, 1});
    nan.coeffs[1](0) = std::nan("");
    EXPECT_THROW(model.push_mode(nan), InvalidInput);
}

TEST(SeparatedModel, PartialProducts) {
    SeparatedModel model(std::vector<BasisSpec>(2, BasisSpec{BasisFamily::monomial, 1, {-4, 4}}));
    model.push_mode(Mode::ones({1, 1}));
    Eigen::MatrixXd p(1, 2);
    p << 0.0, 3.0;
    EXPECT_NEAR(model.partial_products(p, 0, 0)(0), 1.75, 1e-15);

    SeparatedModel line(std::vector<BasisSpec>(1, BasisSpec{BasisFamily::monomial, 1, {-1, 1}}));
    line.push_mode(Mode::ones({1}));
    EXPECT_TRUE(line.partial_products(Eigen::MatrixXd::Zero(3, 1), 0, 0).isOnes());

    SeparatedModel zero(std::vector<BasisSpec>(2, BasisSpec{BasisFamily::monomial, 1, {-1, 1}}));
    zero.push_mode(Mode::zeros({1, 1}));
    EXPECT_TRUE(zero.partial_products(Eigen::MatrixXd::Ones(2, 2), 0, 0).isZero());
    EXPECT_THROW(zero.partial_products(Eigen::MatrixXd::Ones(2, 2), 1, 0), InvalidInput);
}

TEST(SeparatedModel, LinearInModes) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 5;
        const SeparatedModel model = random_model(rng, d, 1 + trial % 8);
        const int split = model.rank() / 2;
        const Eigen::MatrixXd p = random_points(rng, 30, d);
        const Eigen::VectorXd whole = model.evaluate_batch(p);
        const Eigen::VectorXd parts =
            model.slice(0, split).evaluate_batch(p) + model.slice(split, model.rank()).evaluate_batch(p);
        EXPECT_LE((whole - parts).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, whole.cwiseAbs().maxCoeff()));
    }
}

TEST(SeparatedModel, FactorScalingInvariance) {
    std::mt19937_64 rng(12);
    const SeparatedModel model = random_model(rng, 3, 2);
    SeparatedModel scaled(model.specs());
    for (Mode mode : model.modes()) {
        mode.coeffs[0] *= 3.7;
        mode.coeffs[1] /= 3.7;
        scaled.push_mode(mode);
    }
    const Eigen::MatrixXd p = random_points(rng, 50, 3);
    EXPECT_LE((model.evaluate_batch(p) - scaled.evaluate_batch(p)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SeparatedModel, JsonRoundTripIsBitExact) {
    std::mt19937_64 rng(13);
    const SeparatedModel model = random_model(rng, 4, 5);
    const SeparatedModel back = model_from_json(nlohmann::json::parse(to_json(model).dump()));
    EXPECT_EQ(back.rank(), model.rank());
    EXPECT_EQ(back.meta().method, "spgd");
    EXPECT_EQ(back.meta().seed, 7u);
    const Eigen::MatrixXd p = random_points(rng, 100, 4);
    const Eigen::VectorXd a = model.evaluate_batch(p);
    const Eigen::VectorXd b = back.evaluate_batch(p);
    for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_EQ(a(i), b(i));
}

TEST(SeparatedModel, JsonLayout) {
    const nlohmann::json j = to_json(xy_model());
    EXPECT_EQ(j.at("d"), 2);
    EXPECT_EQ(j.at("specs").at(0).at("family"), "monomial");
    EXPECT_EQ(j.at("specs").at(0).at("degree"), 1);
    EXPECT_EQ(j.at("specs").at(0).at("lo"), -1.0);
    EXPECT_EQ(j.at("modes").at(0).at("degrees"), nlohmann::json({1, 1}));
    EXPECT_EQ(j.at("modes").at(0).at("coeffs").at(1), nlohmann::json({0.0, 1.0}));
    EXPECT_TRUE(j.at("meta").contains("method"));
}

TEST(SeparatedModel, MalformedJsonThrows) {
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"d": 2, "specs": []})")), IoError);
    nlohmann::json j = to_json(xy_model());
    j["modes"][0]["coeffs"][0] = {1.0, 2.0, 3.0};
    EXPECT_THROW(model_from_json(j), IoError);
}
