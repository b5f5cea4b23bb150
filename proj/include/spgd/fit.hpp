// SPDX-License-Identifier: Apache-2.0
//
// Greedy construction of separated models from scattered samples.
//
// Each enrichment adds one rank-one mode. Its factors are found by an
// alternating-direction fixed point: with all other factors frozen, the
// factor of dimension k solves a linear least-squares problem whose design
// rows are the basis values of s^k weighted by the product of the frozen
// factors, against the residual of the modes accepted so far. The three
// methods differ only in the per-direction solver:
//
//   spgd   ordinary least squares everywhere
//   rspgd  elastic net (ridge at alpha = 0), penalty chosen per enrichment
//   s2pgd  Lasso on the sparse dimensions followed by OLS de-biasing on the
//          detected support; OLS (or elastic net) on the others
//
// Polynomial degrees follow the modal adaptivity schedule: modes start at a
// low degree, which is raised whenever the training residual stagnates.
#pragma once

#include "spgd/sampling.hpp"
#include "spgd/selection.hpp"
#include "spgd/separated_model.hpp"
#include "spgd/solvers.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spgd {

struct Dataset {
    Eigen::MatrixXd points;   // n x d
    Eigen::VectorXd targets;  // n
    Box domain;

    int size() const { return static_cast<int>(points.rows()); }
    int dims() const { return static_cast<int>(points.cols()); }

    /// Throws InvalidInput on shape mismatch, an empty set or non-finite values.
    void validate() const;
    /// Number of rows outside the domain box.
    int count_outside() const;
    Dataset subset(const std::vector<int>& rows) const;
};

enum class FitMethod { spgd, rspgd, s2pgd };

std::string to_string(FitMethod method);
FitMethod fit_method_from_string(const std::string& name);

/// Modal adaptivity schedule.
struct MasParams {
    int initial_degree = 1;
    int max_degree = 4;
    double stagnation_tol = 0.05;
    int patience = 1;
};

struct AlsOptions {
    double tol = 1e-6;
    int max_iters = 100;
    /// Record the penalized objective after every half-step (absolute penalties only).
    bool record_objective = false;
};

/// Solver applied to one direction system inside the fixed point.
enum class SolverKind { ols, ridge, lasso, elastic_net, support_ols };

struct DirectionSolver {
    SolverKind kind = SolverKind::ols;
    double lambda = 0.0;
    double alpha = 0.0;
    /// When set, the applied penalty is lambda * lambda_max of the direction system.
    bool relative = true;
    /// Active columns for support_ols.
    std::vector<int> support;

    static DirectionSolver ols() { return {}; }
    static DirectionSolver penalized(double lambda, double alpha, bool relative = true);
};

enum class OtherDimSolver { ols, elastic_net };

/// Error a new mode must lower to be accepted: the cross-validated error of the
/// greedy path, or the training error (spgd always uses the training error).
enum class AcceptRule { held_out, training };

struct FitConfig {
    FitMethod method = FitMethod::spgd;
    BasisFamily family = BasisFamily::chebyshev;
    MasParams mas;
    int max_modes = 20;
    /// Consecutive rejected enrichments before the loop stops.
    int patience_modes = 2;
    /// A mode is accepted when it lowers the selection error by at least this fraction.
    double accept_tol = 1e-3;
    AcceptRule accept = AcceptRule::held_out;
    /// Initial modes tried per enrichment (all-ones plus seeded random ones, and one
    /// constant-factor mode when starts > 1); the enrichment starts from the OLS fixed
    /// point with the lowest training error.
    int starts = 4;
    AlsOptions als;
    CoordinateDescentOptions cd;
    /// Penalty ratios relative to lambda_max of each direction system.
    std::vector<double> lambda_grid = parse_grid("log:1e-6:1e2:25");
    std::vector<double> alphas = {0.0};
    SelectionPolicy selection;
    /// 0-based sparse dimensions for s2pgd; empty with sparse_auto set means "scan all".
    std::vector<int> sparse_dims;
    bool sparse_auto = false;
    /// Degree of the basis on sparse dimensions.
    int sparse_degree = 8;
    /// Per sparse dimension cap on non-zero coefficients; empty means ceil(D/2).
    std::vector<int> chi_lim;
    OtherDimSolver other_solver = OtherDimSolver::ols;
    /// Validation split used by the sparse-dimension scan.
    double scan_split = 0.8;
    std::optional<double> stls_threshold;
    std::uint64_t seed = 0;

    void validate(int dims) const;
    /// Cap for sparse dimension k (0-based).
    int chi_limit(int k) const;
};

struct ModeRecord {
    std::vector<int> degrees;
    int fp_iterations = 0;
    bool converged = true;
    double lambda = 0.0;
    double alpha = 0.0;
    /// Held-out (or training, for spgd) error used to accept the mode.
    double selection_error = 0.0;
    double train_error = 0.0;
    /// Non-zero basis indices per dimension (sparse dimensions only; others empty).
    std::vector<std::vector<int>> supports;
};

struct ScanCandidate {
    int dim = 0;  // 0-based
    double validation_error = 0.0;
    bool sparse_ok = true;
    int rank = 0;
};

struct FitReport {
    std::string method;
    std::vector<ModeRecord> modes;
    double train_error = 1.0;
    /// Selection error after each accepted mode.
    std::vector<double> error_curve;
    int rank = 0;
    std::optional<int> penalized_dim;  // 0-based
    std::vector<ScanCandidate> scan;
    std::vector<std::string> warnings;
    bool failed = false;
};

struct FitResult {
    SeparatedModel model;
    FitReport report;
};

/// Direction system of dimension k for the in-progress `mode`, on top of `prior`.
PenalizedProblem assemble_direction_system(const Dataset& data, const SeparatedModel& prior, const Mode& mode, int k);

struct AlsResult {
    Mode mode;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    std::vector<std::string> warnings;
    std::vector<double> objective_trace;
};

/// Alternating-direction fixed point for one new mode on top of `prior`.
AlsResult als_fixed_point(const Dataset& data, const SeparatedModel& prior, Mode init,
                          const std::vector<DirectionSolver>& solvers, const AlsOptions& options,
                          const CoordinateDescentOptions& cd = {});

/// Next degree under the modal adaptivity schedule.
int mas_next_degree(const std::vector<double>& residual_history, int current_degree, const MasParams& params);

/// Greedy enrichment with the configured method. A fit that accepts no mode returns a
/// rank-0 model with report.failed set.
FitResult fit(const Dataset& data, const FitConfig& config);

/// s2pgd with each dimension penalized in turn; keeps the candidate with the lowest
/// validation error among those meeting the sparsity caps, then refits it on all data.
FitResult fit_s2pgd_dimension_scan(const Dataset& data, const FitConfig& config);

/// Dispatches to the scan when config asks for automatic sparse dimensions.
FitResult fit_auto(const Dataset& data, const FitConfig& config);

/// Training relative error of `model` on `data` (absolute error if all targets are zero).
double training_error(const SeparatedModel& model, const Dataset& data);

}  // namespace spgd
