// SPDX-License-Identifier: Apache-2.0
//
// Test functions, the Lorenz identification pipeline and the case runner that
// compares a plain s-PGD baseline against a regularized candidate.
#pragma once

#include "spgd/anova.hpp"
#include "spgd/fit.hpp"
#include "spgd/sampling.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spgd {

enum class CaseId { ex1_poly5d, ex2_triglog5d, lorenz_sindy, s2_ex1_cheb3d, s2_ex2_cheb5d, anova_2d };

std::string to_string(CaseId id);
/// Accepts full ids and the short names ex1, ex2, lorenz, s2_ex1, s2_ex2, anova.
CaseId case_id_from_string(const std::string& name);
std::vector<CaseId> all_cases();
std::string valid_case_names();

/// Domain box of a case with a scalar test function (throws for lorenz_sindy).
Box case_domain(CaseId id);

/// Chebyshev polynomial of the first kind.
double chebyshev_t(int n, double x);

/// Exact test-function value. Throws DomainError when a log or power argument is invalid.
double eval_case_function(CaseId id, const Eigen::VectorXd& point);

struct LorenzConfig {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    Eigen::Vector3d initial{-8.0, 7.0, 27.0};
    double dt = 1e-3;
    double horizon = 20.0;
    int samples = 102;
    /// Fraction of the samples in the construction set.
    double split = 0.8;
    double stls_threshold = 0.1;
    std::uint64_t seed = 0;
};

Eigen::Vector3d lorenz_rhs(const Eigen::Vector3d& state, const LorenzConfig& params);

using OdeRhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct Trajectory {
    std::vector<double> t;
    Eigen::MatrixXd states;       // steps x dim
    Eigen::MatrixXd derivatives;  // rhs at each stored state
};

/// Classical RK4 from t = 0 to `horizon` with fixed step `dt` (last step shortened).
/// Throws DomainError if the state stops being finite.
Trajectory integrate_rk4(const OdeRhs& rhs, const Eigen::VectorXd& initial, double dt, double horizon);
Trajectory integrate_lorenz(const LorenzConfig& config);

/// Names of the multilinear library: '', x, y, z, xy, xz, yz, xyz.
const std::array<std::string, 8>& multilinear_names();
Eigen::Matrix<double, 8, 1> multilinear_features(const Eigen::Vector3d& state);
Eigen::MatrixXd multilinear_design(const Eigen::MatrixXd& states);

struct SindyDatasets {
    /// One dataset per derivative component (x', y', z'); points are states.
    std::array<Dataset, 3> construction;
    std::array<Dataset, 3> validation;
    std::vector<int> sample_indices;  // trajectory rows, in draw order
};

/// Draws `count` trajectory rows without replacement and splits them construction/validation.
SindyDatasets build_sindy_dataset(const Trajectory& trajectory, int count, std::uint64_t seed, double split = 0.8);

/// Raw monomial coefficients of a separated model whose factors have degree <= 1,
/// in multilinear_names() order. Requires d = 3.
Eigen::Matrix<double, 8, 1> expand_multilinear(const SeparatedModel& model);

struct LorenzResult {
    std::array<Eigen::VectorXd, 3> pre_stls;
    std::array<Eigen::VectorXd, 3> post_stls;
    std::array<std::vector<int>, 3> supports;
    /// Relative error on construction + validation rows, before and after the filter.
    double pre_error = 0.0;
    double post_error = 0.0;
    /// Max relative state error of the identified system over t <= 1.
    double shadow_error = 0.0;
    Trajectory truth;
    Trajectory identified;
    std::vector<std::string> warnings;
};

/// rs-PGD (ridge, degree-1 Chebyshev factors) per derivative, expansion to the
/// multilinear library, then STLS on the construction set.
LorenzResult identify_lorenz(const LorenzConfig& config, const FitConfig& fit_config);
FitConfig lorenz_fit_config(std::uint64_t seed);

struct CaseSetup {
    int train_points = 0;
    int test_points = 0;
    FitConfig baseline;
    FitConfig candidate;
    AnovaConfig anova;
    LorenzConfig lorenz;
    std::string reference;
};

/// Default protocol for a case.
CaseSetup case_setup(CaseId id);

struct CaseOverrides {
    std::optional<int> train_points;
    std::optional<int> test_points;
    std::optional<CaseSetup> setup;
    /// When set, slice data of the first successful seed is written here as CSV.
    std::optional<std::string> plot_dir;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double baseline_err = 0.0;
    double candidate_err = 0.0;
    std::optional<int> penalized_dim;  // 0-based
    int baseline_rank = 0;
    int candidate_rank = 0;
};

struct CaseReport {
    CaseId id = CaseId::ex1_poly5d;
    std::vector<SeedOutcome> outcomes;
    double baseline_median = 0.0;
    double candidate_median = 0.0;
    /// Median over seeds of 100 (e_b - e_c) / e_b.
    double reduction_pct = 0.0;
    bool pass = false;
    std::vector<std::string> checks;  // one line per pass condition
    std::string reference;
    double seconds = 0.0;
    std::optional<LorenzResult> lorenz;
};

/// Default seeds: 1..10 for ex1/ex2, 1..5 for s2_ex2, {1} otherwise.
std::vector<std::uint64_t> default_seeds(CaseId id);

CaseReport run_case(CaseId id, const std::vector<std::uint64_t>& seeds, const CaseOverrides& overrides = {});

double median(std::vector<double> values);

}  // namespace spgd
