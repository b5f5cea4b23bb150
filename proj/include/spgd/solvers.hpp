// SPDX-License-Identifier: Apache-2.0
//
// Penalized least-squares kernels for the alternating direction updates.
// All objectives use the unscaled sum of squares:
//   ||r - M a||^2 + lambda (1 - alpha) ||a||_2^2 + lambda alpha ||a||_1
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace spgd {

/// One direction system: design M (n x p), residual r (n), penalties.
struct PenalizedProblem {
    Eigen::MatrixXd design;
    Eigen::VectorXd residual;
    double lambda = 0.0;
    double alpha = 0.0;

    void validate() const;
};

struct CoordinateDescentOptions {
    double tol = 1e-8;
    int max_iter = 10000;
    /// Record the penalized objective after every sweep.
    bool record_objective = false;
};

struct PenalizedSolution {
    Eigen::VectorXd coeffs;
    int sweeps = 0;
    bool converged = true;
    std::vector<double> objective_trace;
};

/// 2 max_j |m_j^T r|: the smallest Lasso penalty with an all-zero solution.
double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& residual);

/// Penalized objective value at `coeffs`.
double penalized_objective(const Eigen::Ref<const Eigen::MatrixXd>& design,
                           const Eigen::Ref<const Eigen::VectorXd>& residual,
                           const Eigen::Ref<const Eigen::VectorXd>& coeffs, double lambda, double alpha);

/// Minimum-norm least squares via complete orthogonal decomposition.
Eigen::VectorXd solve_ols(const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const Eigen::Ref<const Eigen::VectorXd>& residual);

/// (M^T M + lambda I)^{-1} M^T r. lambda = 0 defers to solve_ols.
Eigen::VectorXd solve_ridge(const Eigen::Ref<const Eigen::MatrixXd>& design,
                            const Eigen::Ref<const Eigen::VectorXd>& residual, double lambda);

/// Cyclic coordinate descent with soft thresholding. `warm_start` may be empty.
PenalizedSolution solve_lasso(const Eigen::Ref<const Eigen::MatrixXd>& design,
                              const Eigen::Ref<const Eigen::VectorXd>& residual, double lambda,
                              const CoordinateDescentOptions& options = {},
                              const Eigen::VectorXd& warm_start = {});

/// Elastic net by coordinate descent; the ridge part is folded into each coordinate's curvature.
PenalizedSolution solve_elastic_net(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                    const Eigen::Ref<const Eigen::VectorXd>& residual, double lambda, double alpha,
                                    const CoordinateDescentOptions& options = {},
                                    const Eigen::VectorXd& warm_start = {});

/// OLS on the columns in `support`, zeros elsewhere. Empty support throws.
Eigen::VectorXd debias_on_support(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::Ref<const Eigen::VectorXd>& residual, const std::vector<int>& support);

struct StlsResult {
    std::vector<int> support;
    Eigen::VectorXd coeffs;
    int iterations = 0;
};

/// Sequential thresholded least squares starting from `initial`.
StlsResult stls_refit(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& residual,
                      const Eigen::Ref<const Eigen::VectorXd>& initial, double threshold);

/// Indices of non-zero entries.
std::vector<int> support_of(const Eigen::Ref<const Eigen::VectorXd>& coeffs);

}  // namespace spgd
