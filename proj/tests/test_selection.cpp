// SPDX-License-Identifier: Apache-2.0
#include "spgd/error.hpp"
#include "spgd/selection.hpp"
#include "spgd/solvers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace spgd;

TEST(Selection, SingleCandidateIsNotEvaluated) {
    int calls = 0;
    const CandidatePredictor predictor = [&](const std::vector<int>&, const std::vector<int>& test, const Candidate&) {
        ++calls;
        return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(test.size())).eval();
    };
    const SelectionResult r = select_lambda(Eigen::VectorXd::Ones(10), predictor, {0.3}, {0.0}, {}, 1);
    EXPECT_EQ(r.lambda, 0.3);
    EXPECT_FALSE(r.evaluated);
    EXPECT_EQ(calls, 0);
}

TEST(Selection, OneStandardErrorRule) {
    std::vector<ScoreEntry> table(3);
    const double lambdas[] = {0.1, 1.0, 10.0};
    const double means[] = {1.0, 1.01, 2.0};
    for (int i = 0; i < 3; ++i) {
        table[i].lambda = lambdas[i];
        table[i].mean_error = means[i];
        table[i].std_error = 0.05;
        table[i].total_sse = means[i] * 5;
    }
    EXPECT_EQ(pick_best(table, SelectionKind::one_se_kfold), 1u);
    EXPECT_EQ(pick_best(table, SelectionKind::kfold), 0u);
}

TEST(Selection, IneligibleEntriesAreSkipped) {
    std::vector<ScoreEntry> table(2);
    table[0].total_sse = 1.0;
    table[0].eligible = false;
    table[1].total_sse = 2.0;
    EXPECT_EQ(pick_best(table, SelectionKind::kfold), 1u);
    table[1].eligible = false;
    EXPECT_EQ(pick_best(table, SelectionKind::kfold), 0u);
}

// Pure-noise targets: a heavily penalized (zero) model should beat OLS out of sample.
TEST(Selection, NoiseFavoursLargePenalty) {
    int large = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        Eigen::MatrixXd m(30, 10);
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) {
            y(i) = g(rng);
            for (int j = 0; j < 10; ++j) m(i, j) = g(rng);
        }
        const CandidatePredictor predictor = [&](const std::vector<int>& train, const std::vector<int>& test,
                                                 const Candidate& c) {
            Eigen::MatrixXd mt(train.size(), 10);
            Eigen::VectorXd yt(train.size());
            for (std::size_t i = 0; i < train.size(); ++i) mt.row(i) = m.row(train[i]), yt(i) = y(train[i]);
            const Eigen::VectorXd a = solve_lasso(mt, yt, c.lambda * lambda_max(mt, yt)).coeffs;
            Eigen::VectorXd out(test.size());
            for (std::size_t i = 0; i < test.size(); ++i) out(i) = m.row(test[i]).dot(a);
            return out;
        };
        const SelectionResult r = select_lambda(y, predictor, {0.0, 10.0}, {1.0}, {}, seed);
        if (r.lambda == 10.0) ++large;
    }
    EXPECT_GE(large, 16);
}

TEST(Selection, FoldsPartitionRows) {
    const auto folds = make_folds(23, SelectionPolicy{SelectionKind::kfold, 5, 0.8}, 4);
    ASSERT_EQ(folds.size(), 5u);
    std::multiset<int> tested;
    for (const auto& f : folds) {
        tested.insert(f.test.begin(), f.test.end());
        EXPECT_EQ(f.train.size() + f.test.size(), 23u);
    }
    EXPECT_EQ(tested.size(), 23u);
    EXPECT_EQ(std::set<int>(tested.begin(), tested.end()).size(), 23u);
}

TEST(Selection, FoldsShrinkForTinyData) { EXPECT_EQ(make_folds(3, SelectionPolicy{}, 1).size(), 3u); }

TEST(Selection, SplitPolicy) {
    const auto folds = make_folds(10, SelectionPolicy::parse("split:0.8"), 2);
    ASSERT_EQ(folds.size(), 1u);
    EXPECT_EQ(folds[0].train.size(), 8u);
    EXPECT_EQ(folds[0].test.size(), 2u);
}

TEST(Selection, FoldsAreSeeded) {
    const auto a = make_folds(40, SelectionPolicy{}, 9);
    const auto b = make_folds(40, SelectionPolicy{}, 9);
    for (std::size_t f = 0; f < a.size(); ++f) EXPECT_EQ(a[f].test, b[f].test);
}

TEST(Selection, PolicyParsing) {
    EXPECT_EQ(SelectionPolicy::parse("cv:7").folds, 7);
    EXPECT_EQ(SelectionPolicy::parse("one-se:4").kind, SelectionKind::one_se_kfold);
    EXPECT_EQ(SelectionPolicy::parse("cv:5").to_string(), "cv:5");
    EXPECT_THROW(SelectionPolicy::parse("loo"), InvalidInput);
    EXPECT_THROW(SelectionPolicy::parse("split:1.5"), InvalidInput);
}

TEST(Selection, GridParsing) {
    const auto g = parse_grid("log:1e-6:1e2:25");
    ASSERT_EQ(g.size(), 25u);
    EXPECT_NEAR(g.front(), 1e-6, 1e-18);
    EXPECT_NEAR(g.back(), 1e2, 1e-10);
    EXPECT_NEAR(g[1] / g[0], std::pow(10.0, 8.0 / 24.0), 1e-12);
    EXPECT_EQ(parse_grid("0,0.5,2"), (std::vector<double>{0, 0.5, 2}));
    EXPECT_THROW(parse_grid("log:1:2"), InvalidInput);
    EXPECT_THROW(parse_grid("a,b"), InvalidInput);
}
