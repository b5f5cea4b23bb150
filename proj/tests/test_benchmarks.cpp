// SPDX-License-Identifier: Apache-2.0
#include "spgd/benchmarks.hpp"
#include "spgd/error.hpp"
#include "spgd/metrics.hpp"
#include "spgd/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace spgd;

TEST(CaseFunctions, Ex1AtOrigin) {
    EXPECT_NEAR(eval_case_function(CaseId::ex1_poly5d, Eigen::VectorXd::Zero(5)), -0.1, 1e-14);
}

TEST(CaseFunctions, S2Ex1AtUnitX2) {
    EXPECT_NEAR(eval_case_function(CaseId::s2_ex1_cheb3d, Eigen::Vector3d(0, 1, 0)), -2.14, 1e-12);
}

TEST(CaseFunctions, Ex2AtZeros) {
    EXPECT_NEAR(eval_case_function(CaseId::ex2_triglog5d, Eigen::VectorXd::Zero(5)), -3.14 * std::log(1.5), 1e-12);
}

TEST(CaseFunctions, DeterministicAndDomainChecked) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(5, 0.3);
    EXPECT_EQ(eval_case_function(CaseId::ex2_triglog5d, p), eval_case_function(CaseId::ex2_triglog5d, p));
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(5);
    bad(3) = -0.9;
    EXPECT_THROW(eval_case_function(CaseId::ex2_triglog5d, bad), DomainError);
    EXPECT_THROW(case_domain(CaseId::lorenz_sindy), Error);
}

TEST(CaseFunctions, NamesRoundTrip) {
    for (CaseId id : all_cases()) EXPECT_EQ(case_id_from_string(to_string(id)), id);
    EXPECT_EQ(case_id_from_string("s2_ex1"), CaseId::s2_ex1_cheb3d);
    EXPECT_THROW(case_id_from_string("bogus"), InvalidInput);
}

TEST(CaseFunctions, ChebyshevT) {
    EXPECT_DOUBLE_EQ(chebyshev_t(5, 1.0), 1.0);
    EXPECT_NEAR(chebyshev_t(2, 0.5), -0.5, 1e-15);
    EXPECT_NEAR(chebyshev_t(5, 0.3), 16 * std::pow(0.3, 5) - 20 * std::pow(0.3, 3) + 5 * 0.3, 1e-14);
}

TEST(Lorenz, RhsExamples) {
    const LorenzConfig p;
    EXPECT_TRUE(lorenz_rhs({-8, 7, 27}, p).isApprox(Eigen::Vector3d(150, -15, -128), 1e-14));
    EXPECT_EQ(lorenz_rhs({0, 0, 0}, p), Eigen::Vector3d::Zero());
    EXPECT_TRUE(lorenz_rhs({1, 1, 1}, p).isApprox(Eigen::Vector3d(0, 26, 1 - 8.0 / 3.0), 1e-14));
}

TEST(Rk4, HarmonicOscillatorReturnsAfterOnePeriod) {
    const OdeRhs rhs = [](const Eigen::VectorXd& s) { return Eigen::Vector2d(s(1), -s(0)).eval(); };
    const Eigen::Vector2d start(1.0, 0.0);
    const Trajectory tr = integrate_rk4(rhs, start, 1e-3, 2 * std::numbers::pi);
    EXPECT_NEAR(tr.t.back(), 2 * std::numbers::pi, 1e-12);
    const Eigen::VectorXd end = tr.states.bottomRows(1).transpose();
    EXPECT_LT((end - start).norm(), 1e-9);
}

TEST(Rk4, FourthOrderOnLorenz) {
    LorenzConfig c;
    c.horizon = 1.0;
    const auto rhs = [&](const Eigen::VectorXd& s) { return Eigen::VectorXd(lorenz_rhs(s, c)); };
    const Eigen::VectorXd ref = integrate_rk4(rhs, c.initial, 1e-5, 1.0).states.bottomRows(1).transpose();
    const auto err = [&](double dt) {
        return (integrate_rk4(rhs, c.initial, dt, 1.0).states.bottomRows(1).transpose() - ref).norm();
    };
    const double ratio = err(1e-3) / err(5e-4);
    EXPECT_GT(ratio, 13.0);
    EXPECT_LT(ratio, 19.0);
}

TEST(Rk4, ZeroHorizonKeepsInitialState) {
    const LorenzConfig c;
    const auto rhs = [&](const Eigen::VectorXd& s) { return Eigen::VectorXd(lorenz_rhs(s, c)); };
    const Trajectory tr = integrate_rk4(rhs, c.initial, 1e-3, 0.0);
    ASSERT_EQ(tr.states.rows(), 1);
    EXPECT_EQ(Eigen::Vector3d(tr.states.row(0).transpose()), c.initial);
}

TEST(Rk4, BlowUpThrows) {
    const OdeRhs rhs = [](const Eigen::VectorXd& s) { return (s.array().square()).matrix().eval(); };
    EXPECT_THROW(integrate_rk4(rhs, Eigen::VectorXd::Constant(1, 1.0), 0.1, 5.0), DomainError);
}

TEST(Sindy, MultilinearRow) {
    Eigen::Matrix<double, 8, 1> want;
    want << 1, 1, 2, 3, 2, 3, 6, 6;
    EXPECT_EQ(multilinear_features({1, 2, 3}), want);
    EXPECT_EQ(multilinear_names()[6], "yz");
}

TEST(Sindy, OlsOfXdotIsExact) {
    LorenzConfig c;
    c.horizon = 2.0;
    const Trajectory tr = integrate_lorenz(c);
    const SindyDatasets sets = build_sindy_dataset(tr, 40, 3);
    const Eigen::MatrixXd design = multilinear_design(sets.construction[0].points);
    const Eigen::VectorXd a = solve_ols(design, sets.construction[0].targets);
    Eigen::Matrix<double, 8, 1> want;
    want << 0, -10, 10, 0, 0, 0, 0, 0;
    EXPECT_LT((a - want).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Sindy, SplitAndSampleCount) {
    LorenzConfig c;
    c.horizon = 0.05;
    const Trajectory tr = integrate_lorenz(c);
    const SindyDatasets sets = build_sindy_dataset(tr, 10, 1, 0.8);
    EXPECT_EQ(sets.construction[0].size(), 8);
    EXPECT_EQ(sets.validation[2].size(), 2);
    EXPECT_THROW(build_sindy_dataset(tr, static_cast<int>(tr.states.rows()) + 1, 1), InvalidInput);
}

// STLS on exact derivatives recovers the Lorenz supports, and the recovered system
// shadows the true one for t <= 1.
TEST(Sindy, StlsRecoversSupportsAndShadows) {
    LorenzConfig c;
    c.horizon = 5.0;
    const Trajectory tr = integrate_lorenz(c);
    const SindyDatasets sets = build_sindy_dataset(tr, 102, 7);
    const std::array<std::vector<int>, 3> want = {std::vector<int>{1, 2}, {1, 2, 5}, {3, 4}};
    std::array<Eigen::VectorXd, 3> coeffs;
    for (int i = 0; i < 3; ++i) {
        const Eigen::MatrixXd design = multilinear_design(sets.construction[i].points);
        Eigen::VectorXd start = solve_ols(design, sets.construction[i].targets);
        start += Eigen::VectorXd::Constant(8, 1e-4);  // perturb the zeros
        const StlsResult r = stls_refit(design, sets.construction[i].targets, start, 0.1);
        EXPECT_EQ(r.support, want[i]);
        coeffs[i] = r.coeffs;
    }
    EXPECT_NEAR(coeffs[1](5), -1.0, 1e-8);
    EXPECT_NEAR(coeffs[2](3), -8.0 / 3.0, 1e-8);
    EXPECT_NEAR(coeffs[2](4), 1.0, 1e-8);

    const auto model = [&](const Eigen::VectorXd& s) {
        const auto f = multilinear_features(s);
        return Eigen::Vector3d(coeffs[0].dot(f), coeffs[1].dot(f), coeffs[2].dot(f)).eval();
    };
    const Trajectory sim = integrate_rk4([&](const Eigen::VectorXd& s) { return Eigen::VectorXd(model(s)); },
                                         c.initial, c.dt, 1.0);
    for (Eigen::Index r = 0; r < sim.states.rows(); ++r)
        EXPECT_LT((sim.states.row(r) - tr.states.row(r)).norm() / tr.states.row(r).norm(), 0.05);
}

TEST(Sindy, ExpandMultilinear) {
    const std::vector<BasisSpec> specs(3, BasisSpec{BasisFamily::monomial, 1, {-1, 1}});
    SeparatedModel m(specs);
    m.push_mode(Mode{{1, 1, 1}, {Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 1), Eigen::Vector2d(3, 0)}});
    const auto c = expand_multilinear(m);
    // (1 + 2x) * y * 3 = 3y + 6xy
    Eigen::Matrix<double, 8, 1> want;
    want << 0, 0, 3, 0, 6, 0, 0, 0;
    EXPECT_TRUE(c.isApprox(want, 1e-14));
    for (const Eigen::Vector3d s : {Eigen::Vector3d(0.2, -0.4, 0.7), Eigen::Vector3d(-0.9, 0.1, 0.3)})
        EXPECT_NEAR(c.dot(multilinear_features(s)), m.evaluate(s), 1e-14);
}

TEST(Metrics, RelativeErrorExamples) {
    EXPECT_EQ(relative_l2_error(Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 4)), 0.0);
    EXPECT_DOUBLE_EQ(relative_l2_error(Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0)), 1.0);
    EXPECT_DOUBLE_EQ(relative_l2_error(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), std::sqrt(2.0));
    EXPECT_THROW(relative_l2_error(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), InvalidInput);
    EXPECT_THROW(relative_l2_error(Eigen::Vector2d(1, 0), Eigen::Vector3d(0, 1, 0)), InvalidInput);
}

TEST(Metrics, PermutationSymmetry) {
    Eigen::VectorXd z(4), p(4);
    z << 1, -2, 3, 0.5;
    p << 0.9, -2.1, 3.3, 0.4;
    Eigen::VectorXd zr(4), pr(4);
    zr << 0.5, 3, 1, -2;
    pr << 0.4, 3.3, 0.9, -2.1;
    EXPECT_NEAR(relative_l2_error(z, p), relative_l2_error(zr, pr), 1e-15);
}

TEST(CaseRunner, MedianAndSeeds) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
    EXPECT_EQ(default_seeds(CaseId::ex1_poly5d).size(), 10u);
    EXPECT_GE(default_seeds(CaseId::s2_ex2_cheb5d).size(), 5u);
}

TEST(CaseRunner, SmallAnovaRunIsolatesSeeds) {
    const CaseReport r = run_case(CaseId::anova_2d, {1, 2});
    ASSERT_EQ(r.outcomes.size(), 2u);
    for (const auto& o : r.outcomes) EXPECT_TRUE(o.ok) << o.error;
    EXPECT_FALSE(r.checks.empty());
}
