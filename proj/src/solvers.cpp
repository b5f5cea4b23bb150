// SPDX-License-Identifier: Apache-2.0
#include "spgd/solvers.hpp"

#include "spgd/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace spgd {
namespace {

void check_system(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& residual) {
    if (design.rows() != residual.size()) throw InvalidInput("design rows and residual length differ");
    if (design.cols() < 1) throw InvalidInput("design needs at least one column");
    if (!design.allFinite() || !residual.allFinite()) throw InvalidInput("non-finite entries in least-squares system");
}

void check_penalty(double lambda, double alpha) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be finite and non-negative");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
}

double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

}  // namespace

void PenalizedProblem::validate() const {
    check_system(design, residual);
    check_penalty(lambda, alpha);
}

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& residual) {
    if (design.rows() == 0) return 0.0;
    return 2.0 * (design.transpose() * residual).cwiseAbs().maxCoeff();
}

double penalized_objective(const Eigen::Ref<const Eigen::MatrixXd>& design,
                           const Eigen::Ref<const Eigen::VectorXd>& residual,
                           const Eigen::Ref<const Eigen::VectorXd>& coeffs, double lambda, double alpha) {
    return (residual - design * coeffs).squaredNorm() + lambda * (1.0 - alpha) * coeffs.squaredNorm() +
           lambda * alpha * coeffs.lpNorm<1>();
}

Eigen::VectorXd solve_ols(const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const Eigen::Ref<const Eigen::VectorXd>& residual) {
    check_system(design, residual);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-10);
    cod.compute(design);
    return cod.solve(residual);
}

Eigen::VectorXd solve_ridge(const Eigen::Ref<const Eigen::MatrixXd>& design,
                            const Eigen::Ref<const Eigen::VectorXd>& residual, double lambda) {
    check_system(design, residual);
    check_penalty(lambda, 0.0);
    if (lambda == 0.0) return solve_ols(design, residual);
    Eigen::MatrixXd gram = design.transpose() * design;
    gram.diagonal().array() += lambda;
    return gram.ldlt().solve(design.transpose() * residual);
}

PenalizedSolution solve_elastic_net(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                    const Eigen::Ref<const Eigen::VectorXd>& residual, double lambda, double alpha,
                                    const CoordinateDescentOptions& options, const Eigen::VectorXd& warm_start) {
    check_system(design, residual);
    check_penalty(lambda, alpha);
    const Eigen::Index p = design.cols();

    PenalizedSolution out;
    out.coeffs = warm_start.size() == p ? warm_start : Eigen::VectorXd::Zero(p);
    if (!out.coeffs.allFinite()) out.coeffs.setZero();

    // Covariance updates: gradient = M^T (r - M a) is maintained through the Gram matrix.
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd corr = design.transpose() * residual;
    const double r_sq = residual.squaredNorm();
    Eigen::VectorXd gradient = corr - gram * out.coeffs;

    const double l1 = 0.5 * lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    auto objective = [&] {
        const auto& a = out.coeffs;
        return r_sq - 2.0 * a.dot(corr) + a.dot(gram * a) + l2 * a.squaredNorm() + 2.0 * l1 * a.lpNorm<1>();
    };

#ifndef NDEBUG
    double previous = objective();
#endif

    out.converged = false;
    for (int sweep = 0; sweep < options.max_iter; ++sweep) {
        double max_change = 0.0;
        double max_coeff = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double curvature = gram(j, j) + l2;
            const double old = out.coeffs(j);
            double updated = 0.0;
            if (curvature > 0.0) updated = soft_threshold(gradient(j) + gram(j, j) * old, l1) / curvature;
            const double delta = updated - old;
            if (delta != 0.0) {
                gradient.noalias() -= delta * gram.col(j);
                out.coeffs(j) = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
            max_coeff = std::max(max_coeff, std::abs(updated));
        }
        out.sweeps = sweep + 1;
        if (options.record_objective) out.objective_trace.push_back(objective());
#ifndef NDEBUG
        const double now = objective();
        assert(now <= previous + 1e-9 * std::max(1.0, r_sq));
        previous = now;
#endif
        if (max_change < options.tol * std::max(1.0, max_coeff)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

PenalizedSolution solve_lasso(const Eigen::Ref<const Eigen::MatrixXd>& design,
                              const Eigen::Ref<const Eigen::VectorXd>& residual, double lambda,
                              const CoordinateDescentOptions& options, const Eigen::VectorXd& warm_start) {
    return solve_elastic_net(design, residual, lambda, 1.0, options, warm_start);
}

std::vector<int> support_of(const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
    std::vector<int> support;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j)
        if (coeffs(j) != 0.0) support.push_back(static_cast<int>(j));
    return support;
}

Eigen::VectorXd debias_on_support(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::Ref<const Eigen::VectorXd>& residual, const std::vector<int>& support) {
    check_system(design, residual);
    if (support.empty()) throw InvalidInput("de-biasing needs a non-empty support");
    Eigen::MatrixXd reduced(design.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c) {
        const int j = support[c];
        if (j < 0 || j >= design.cols()) throw InvalidInput("support index out of range");
        reduced.col(static_cast<Eigen::Index>(c)) = design.col(j);
    }
    const Eigen::VectorXd sub = solve_ols(reduced, residual);
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(design.cols());
    for (std::size_t c = 0; c < support.size(); ++c) coeffs(support[c]) = sub(static_cast<Eigen::Index>(c));
    return coeffs;
}

StlsResult stls_refit(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& residual,
                      const Eigen::Ref<const Eigen::VectorXd>& initial, double threshold) {
    check_system(design, residual);
    if (!(threshold > 0.0)) throw InvalidInput("STLS threshold must be positive");
    if (initial.size() != design.cols()) throw InvalidInput("initial coefficients do not match the design");

    StlsResult out;
    out.coeffs = initial;
    std::vector<int> support;
    for (Eigen::Index j = 0; j < initial.size(); ++j)
        if (std::abs(initial(j)) >= threshold) support.push_back(static_cast<int>(j));

    for (int iter = 0; iter <= design.cols(); ++iter) {
        out.iterations = iter + 1;
        if (support.empty()) {
            out.coeffs.setZero();
            break;
        }
        out.coeffs = debias_on_support(design, residual, support);
        std::vector<int> next;
        for (int j : support)
            if (std::abs(out.coeffs(j)) >= threshold) next.push_back(j);
        if (next == support) break;
        support = std::move(next);
    }
    out.support = support;
    return out;
}

}  // namespace spgd
