// SPDX-License-Identifier: Apache-2.0
#include "spgd/error.hpp"
#include "spgd/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spgd;

namespace {

Eigen::MatrixXd mat(int rows, int cols, std::initializer_list<double> values) {
    Eigen::MatrixXd m(rows, cols);
    auto it = values.begin();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = *it++;
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    int i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
    return m;
}

double soft(double z, double t) { return std::copysign(std::max(std::abs(z) - t, 0.0), z); }

}  // namespace

TEST(Ols, Identity) { EXPECT_TRUE(solve_ols(Eigen::Matrix2d::Identity(), vec({3, 4})).isApprox(vec({3, 4}))); }

TEST(Ols, SingleColumnGivesMean) { EXPECT_NEAR(solve_ols(mat(2, 1, {1, 1}), vec({1, 3}))(0), 2.0, 1e-14); }

TEST(Ols, ExactRecovery) {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd m = random_matrix(rng, 3, 2);
    const Eigen::VectorXd a = solve_ols(m, m * vec({1, -2}));
    EXPECT_NEAR(a(0), 1.0, 1e-10);
    EXPECT_NEAR(a(1), -2.0, 1e-10);
}

TEST(Ols, RankDeficientGivesMinimumNorm) {
    // Two identical columns: the minimum-norm split is even.
    const Eigen::VectorXd a = solve_ols(mat(3, 2, {1, 1, 2, 2, 3, 3}), vec({2, 4, 6}));
    EXPECT_NEAR(a(0), 1.0, 1e-10);
    EXPECT_NEAR(a(1), 1.0, 1e-10);
}

TEST(Ols, NonFiniteThrows) {
    EXPECT_THROW(solve_ols(mat(1, 1, {std::nan("")}), vec({1})), InvalidInput);
}

TEST(Ridge, ScalarCase) { EXPECT_NEAR(solve_ridge(mat(1, 1, {1}), vec({2}), 1.0)(0), 1.0, 1e-14); }

TEST(Ridge, ZeroPenaltyMatchesOls) {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd m = random_matrix(rng, 10, 4);
    const Eigen::VectorXd r = random_matrix(rng, 10, 1);
    EXPECT_LE((solve_ridge(m, r, 0.0) - solve_ols(m, r)).norm(), 1e-10);
}

TEST(Ridge, HugePenaltyShrinksToZero) {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd m = random_matrix(rng, 10, 4);
    const Eigen::VectorXd r = random_matrix(rng, 10, 1);
    EXPECT_LE(solve_ridge(m, r, 1e12).norm(), 1e-9 * (m.transpose() * r).norm());
}

TEST(Ridge, ShrinkageIsMonotone) {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd m = random_matrix(rng, 12, 5);
    const Eigen::VectorXd r = random_matrix(rng, 12, 1);
    double previous = solve_ridge(m, r, 0.0).norm();
    for (double lambda : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
        const double current = solve_ridge(m, r, lambda).norm();
        EXPECT_LE(current, previous + 1e-12);
        previous = current;
    }
}

TEST(Ridge, NegativePenaltyThrows) { EXPECT_THROW(solve_ridge(mat(1, 1, {1}), vec({2}), -1.0), InvalidInput); }

TEST(Lasso, ScalarStationarity) {
    EXPECT_NEAR(solve_lasso(mat(1, 1, {1}), vec({2}), 1.0).coeffs(0), 1.5, 1e-10);
    EXPECT_EQ(solve_lasso(mat(1, 1, {1}), vec({2}), 4.0).coeffs(0), 0.0);
    EXPECT_EQ(solve_lasso(mat(1, 1, {1}), vec({2}), 10.0).coeffs(0), 0.0);
}

TEST(Lasso, OrthonormalDesignIsSoftThreshold) {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, 20, 5)).householderQ() *
                              Eigen::MatrixXd::Identity(20, 5);
    const Eigen::VectorXd r = 3.0 * random_matrix(rng, 20, 1);
    const double lambda = 1.3;
    const Eigen::VectorXd a = solve_lasso(q, r, lambda).coeffs;
    const Eigen::VectorXd z = q.transpose() * r;
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(a(j), soft(z(j), lambda / 2), 1e-6);
}

TEST(Lasso, KktConditions) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd m = random_matrix(rng, 15, 6);
        const Eigen::VectorXd r = random_matrix(rng, 15, 1);
        const double lambda = 0.2 * lambda_max(m, r);
        CoordinateDescentOptions opts;
        opts.tol = 1e-12;
        const Eigen::VectorXd a = solve_lasso(m, r, lambda, opts).coeffs;
        const Eigen::VectorXd grad = 2.0 * m.transpose() * (r - m * a);
        for (int j = 0; j < 6; ++j) {
            if (a(j) == 0.0) {
                EXPECT_LE(std::abs(grad(j)), lambda + 1e-6);
            } else {
                EXPECT_NEAR(grad(j), lambda * (a(j) > 0 ? 1.0 : -1.0), 1e-6);
            }
        }
    }
}

TEST(Lasso, ObjectiveNeverIncreases) {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd m = random_matrix(rng, 30, 8);
    const Eigen::VectorXd r = random_matrix(rng, 30, 1);
    CoordinateDescentOptions opts;
    opts.record_objective = true;
    const auto sol = solve_lasso(m, r, 0.1 * lambda_max(m, r), opts);
    ASSERT_GE(sol.objective_trace.size(), 2u);
    for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
        EXPECT_LE(sol.objective_trace[i], sol.objective_trace[i - 1] + 1e-12);
    const auto en = solve_elastic_net(m, r, 0.1 * lambda_max(m, r), 0.4, opts);
    for (std::size_t i = 1; i < en.objective_trace.size(); ++i)
        EXPECT_LE(en.objective_trace[i], en.objective_trace[i - 1] + 1e-12);
}

TEST(Lasso, MatchesBruteForceGrid) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd m = random_matrix(rng, 8, 2);
        const Eigen::VectorXd r = random_matrix(rng, 8, 1);
        const double lambda = 0.3 * lambda_max(m, r);
        const Eigen::VectorXd a = solve_lasso(m, r, lambda).coeffs;
        const double f = penalized_objective(m, r, a, lambda, 1.0);
        // Coarse scan then a 1e-4 grid around the coarse optimum.
        Eigen::Vector2d best(0, 0);
        double best_f = penalized_objective(m, r, best, lambda, 1.0);
        for (double x = -3; x <= 3; x += 0.01)
            for (double y = -3; y <= 3; y += 0.01) {
                const double v = penalized_objective(m, r, Eigen::Vector2d(x, y), lambda, 1.0);
                if (v < best_f) best_f = v, best = {x, y};
            }
        const Eigen::Vector2d centre = best;
        for (double x = centre(0) - 0.01; x <= centre(0) + 0.01; x += 1e-4)
            for (double y = centre(1) - 0.01; y <= centre(1) + 0.01; y += 1e-4)
                best_f = std::min(best_f, penalized_objective(m, r, Eigen::Vector2d(x, y), lambda, 1.0));
        EXPECT_LE(f, best_f + 2e-4);
    }
}

TEST(ElasticNet, Limits) {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd m = random_matrix(rng, 12, 4);
    const Eigen::VectorXd r = random_matrix(rng, 12, 1);
    CoordinateDescentOptions opts;
    opts.tol = 1e-13;
    EXPECT_LE((solve_elastic_net(m, r, 0.7, 0.0, opts).coeffs - solve_ridge(m, r, 0.7)).norm(), 1e-8);
    EXPECT_LE((solve_elastic_net(m, r, 0.7, 1.0, opts).coeffs - solve_lasso(m, r, 0.7, opts).coeffs).norm(), 1e-8);
}

TEST(ElasticNet, ScalarStationarity) {
    EXPECT_NEAR(solve_elastic_net(mat(1, 1, {1}), vec({2}), 1.0, 0.5).coeffs(0), 3.5 / 3.0, 1e-10);
}

TEST(ElasticNet, InvalidAlphaThrows) {
    EXPECT_THROW(solve_elastic_net(mat(1, 1, {1}), vec({2}), 1.0, 1.5), InvalidInput);
}

TEST(Lasso, IterationCapIsFlagged) {
    std::mt19937_64 rng(10);
    const Eigen::MatrixXd m = random_matrix(rng, 20, 10);
    const Eigen::VectorXd r = random_matrix(rng, 20, 1);
    CoordinateDescentOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-16;
    EXPECT_FALSE(solve_lasso(m, r, 0.01, opts).converged);
}

TEST(Stls, TableValuesKeepTwoTerms) {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd m = random_matrix(rng, 40, 8);
    const Eigen::VectorXd initial = vec({-9.9997, 9.9996, 0, -1.3783e-05, 8.7112e-04, 0, 0, 0});
    const Eigen::VectorXd r = m * vec({-10, 10, 0, 0, 0, 0, 0, 0});
    const StlsResult s = stls_refit(m, r, initial, 0.1);
    EXPECT_EQ(s.support, (std::vector<int>{0, 1}));
    EXPECT_NEAR(s.coeffs(0), -10.0, 1e-10);
    EXPECT_NEAR(s.coeffs(1), 10.0, 1e-10);
}

TEST(Stls, AllBelowThresholdGivesEmptySupport) {
    const StlsResult s = stls_refit(Eigen::MatrixXd::Identity(3, 3), vec({1, 1, 1}), vec({0.01, -0.02, 0.0}), 0.1);
    EXPECT_TRUE(s.support.empty());
    EXPECT_TRUE(s.coeffs.isZero());
}

TEST(Debias, FullSupportEqualsOls) {
    std::mt19937_64 rng(12);
    const Eigen::MatrixXd m = random_matrix(rng, 10, 3);
    const Eigen::VectorXd r = random_matrix(rng, 10, 1);
    EXPECT_LE((debias_on_support(m, r, {0, 1, 2}) - solve_ols(m, r)).norm(), 1e-12);
}

TEST(Debias, OrthonormalDesignGivesProjection) {
    std::mt19937_64 rng(13);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, 20, 5)).householderQ() *
                              Eigen::MatrixXd::Identity(20, 5);
    const Eigen::VectorXd r = 3.0 * random_matrix(rng, 20, 1);
    const Eigen::VectorXd lasso = solve_lasso(q, r, 2.0).coeffs;
    const std::vector<int> support = support_of(lasso);
    ASSERT_FALSE(support.empty());
    const Eigen::VectorXd a = debias_on_support(q, r, support);
    const Eigen::VectorXd z = q.transpose() * r;
    for (int j = 0; j < 5; ++j) {
        const bool on = std::find(support.begin(), support.end(), j) != support.end();
        EXPECT_NEAR(a(j), on ? z(j) : 0.0, 1e-10);
    }
}

TEST(Debias, EmptySupportThrows) { EXPECT_THROW(debias_on_support(mat(1, 1, {1}), vec({1}), {}), InvalidInput); }

TEST(LambdaMax, ZeroesTheLasso) {
    std::mt19937_64 rng(14);
    const Eigen::MatrixXd m = random_matrix(rng, 10, 4);
    const Eigen::VectorXd r = random_matrix(rng, 10, 1);
    EXPECT_TRUE(solve_lasso(m, r, lambda_max(m, r)).coeffs.isZero());
    EXPECT_FALSE(solve_lasso(m, r, 0.99 * lambda_max(m, r)).coeffs.isZero());
}
