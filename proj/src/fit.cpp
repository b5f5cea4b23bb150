// SPDX-License-Identifier: Apache-2.0
#include "spgd/fit.hpp"

#include "spgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace spgd {
namespace {

// Basis tables of one enrichment: rows are samples, one matrix per dimension.
struct RankOneSystem {
    std::vector<Eigen::MatrixXd> basis;
    Eigen::VectorXd residual;

    int rows() const { return static_cast<int>(residual.size()); }
    int dims() const { return static_cast<int>(basis.size()); }

    RankOneSystem subset(const std::vector<int>& rows) const {
        RankOneSystem out;
        const auto n = static_cast<Eigen::Index>(rows.size());
        out.residual.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) out.residual(i) = residual(rows[static_cast<std::size_t>(i)]);
        for (const auto& table : basis) {
            Eigen::MatrixXd sub(n, table.cols());
            for (Eigen::Index i = 0; i < n; ++i) sub.row(i) = table.row(rows[static_cast<std::size_t>(i)]);
            out.basis.push_back(std::move(sub));
        }
        return out;
    }
};

RankOneSystem build_system(const Dataset& data, const std::vector<BasisSpec>& specs, const std::vector<int>& degrees,
                           const Eigen::VectorXd& residual) {
    RankOneSystem sys;
    sys.residual = residual;
    for (int k = 0; k < data.dims(); ++k)
        sys.basis.push_back(basis_matrix(specs[static_cast<std::size_t>(k)].with_degree(degrees[k]), data.points.col(k)));
    return sys;
}

Eigen::VectorXd mode_values(const RankOneSystem& sys, const Mode& mode) {
    Eigen::VectorXd values = Eigen::VectorXd::Ones(sys.rows());
    for (int k = 0; k < sys.dims(); ++k) values.array() *= (sys.basis[k] * mode.coeffs[k]).array();
    return values;
}

Eigen::VectorXd mode_values_at(const RankOneSystem& sys, const Mode& mode, const std::vector<int>& rows) {
    Eigen::VectorXd values = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows.size()));
    for (int k = 0; k < sys.dims(); ++k)
        for (std::size_t i = 0; i < rows.size(); ++i)
            values(static_cast<Eigen::Index>(i)) *= sys.basis[k].row(rows[i]).dot(mode.coeffs[k]);
    return values;
}

double applied_lambda(const DirectionSolver& solver, const Eigen::MatrixXd& design, const Eigen::VectorXd& residual) {
    return solver.relative ? solver.lambda * lambda_max(design, residual) : solver.lambda;
}

double penalty_value(const DirectionSolver& solver, double lambda, const Eigen::VectorXd& a) {
    switch (solver.kind) {
        case SolverKind::ols:
        case SolverKind::support_ols: return 0.0;
        case SolverKind::ridge: return lambda * a.squaredNorm();
        case SolverKind::lasso: return lambda * a.lpNorm<1>();
        case SolverKind::elastic_net:
            return lambda * ((1.0 - solver.alpha) * a.squaredNorm() + solver.alpha * a.lpNorm<1>());
    }
    return 0.0;
}

Eigen::VectorXd solve_direction(const DirectionSolver& solver, const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& residual, const Eigen::VectorXd& warm,
                                const CoordinateDescentOptions& cd, double& lambda_used, bool& cd_converged) {
    lambda_used = 0.0;
    switch (solver.kind) {
        case SolverKind::ols: return solve_ols(design, residual);
        case SolverKind::support_ols:
            if (solver.support.empty()) return Eigen::VectorXd::Zero(design.cols());
            return debias_on_support(design, residual, solver.support);
        case SolverKind::ridge:
            lambda_used = applied_lambda(solver, design, residual);
            return solve_ridge(design, residual, lambda_used);
        case SolverKind::lasso:
        case SolverKind::elastic_net: {
            lambda_used = applied_lambda(solver, design, residual);
            if (lambda_used == 0.0) return solve_ols(design, residual);
            const double alpha = solver.kind == SolverKind::lasso ? 1.0 : solver.alpha;
            auto sol = solve_elastic_net(design, residual, lambda_used, alpha, cd, warm);
            cd_converged = cd_converged && sol.converged;
            return sol.coeffs;
        }
    }
    return Eigen::VectorXd::Zero(design.cols());
}

// Rescale factors to a common l2 norm; the rank-one product is unchanged. The rescale
// is skipped when it would raise the penalty, so the fixed point stays a descent method.
void balance(Mode& mode, std::vector<Eigen::VectorXd>& values, const std::vector<DirectionSolver>& solvers,
             const std::vector<double>& lambdas) {
    const int d = mode.dims();
    std::vector<double> scales(static_cast<std::size_t>(d));
    double log_mean = 0.0;
    for (int k = 0; k < d; ++k) {
        scales[k] = mode.coeffs[k].norm();
        if (!(scales[k] > 0.0)) return;
        log_mean += std::log(scales[k]);
    }
    const double target = std::exp(log_mean / d);
    double before = 0.0, after = 0.0;
    for (int k = 0; k < d; ++k) {
        scales[k] = target / scales[k];
        before += penalty_value(solvers[k], lambdas[k], mode.coeffs[k]);
        after += penalty_value(solvers[k], lambdas[k], scales[k] * mode.coeffs[k]);
    }
    if (after > before) return;
    for (int k = 0; k < d; ++k) {
        mode.coeffs[k] *= scales[k];
        values[k] *= scales[k];
    }
}

double direction_change(const Eigen::VectorXd& now, const Eigen::VectorXd& before) {
    const double n_now = now.norm();
    const double n_before = before.norm();
    if (n_now == 0.0 || n_before == 0.0) return n_now == n_before ? 0.0 : 1.0;
    const Eigen::VectorXd u = now / n_now;
    const Eigen::VectorXd v = before / n_before;
    // factors may swap sign in pairs without changing the product
    return std::min((u - v).norm(), (u + v).norm()) + std::abs(n_now - n_before) / std::max(n_now, n_before);
}

AlsResult run_als(const RankOneSystem& sys, Mode mode, const std::vector<DirectionSolver>& solvers,
                  const AlsOptions& options, const CoordinateDescentOptions& cd) {
    AlsResult out;
    const int d = sys.dims();
    if (options.max_iters <= 0) {
        out.mode = std::move(mode);
        out.warnings.push_back("fixed point not iterated (max_iters = 0)");
        return out;
    }

    std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) values[k] = sys.basis[k] * mode.coeffs[k];
    std::vector<double> lambdas(static_cast<std::size_t>(d), 0.0);
    bool cd_converged = true;

    for (int it = 1; it <= options.max_iters; ++it) {
        const std::vector<Eigen::VectorXd> before = mode.coeffs;
        for (int k = 0; k < d; ++k) {
            balance(mode, values, solvers, lambdas);
            Eigen::VectorXd weights = Eigen::VectorXd::Ones(sys.rows());
            for (int j = 0; j < d; ++j)
                if (j != k) weights.array() *= values[j].array();
            const Eigen::MatrixXd design = weights.asDiagonal() * sys.basis[k];
            mode.coeffs[k] = solve_direction(solvers[k], design, sys.residual, mode.coeffs[k], cd, lambdas[k],
                                             cd_converged);
            values[k] = sys.basis[k] * mode.coeffs[k];

            if (options.record_objective) {
                Eigen::VectorXd product = Eigen::VectorXd::Ones(sys.rows());
                for (int j = 0; j < d; ++j) product.array() *= values[j].array();
                double objective = (sys.residual - product).squaredNorm();
                for (int j = 0; j < d; ++j) objective += penalty_value(solvers[j], lambdas[j], mode.coeffs[j]);
                out.objective_trace.push_back(objective);
            }
            if (mode.coeffs[k].isZero(0.0)) {
                out.degenerate = true;
                out.iterations = it;
                for (auto& a : mode.coeffs) a.setZero();
                out.mode = std::move(mode);
                out.warnings.push_back("degenerate mode: a factor collapsed to zero");
                return out;
            }
        }
        out.iterations = it;
        double change = 0.0;
        for (int k = 0; k < d; ++k) change = std::max(change, direction_change(mode.coeffs[k], before[k]));
        if (change < options.tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) out.warnings.push_back("fixed point hit the iteration cap");
    if (!cd_converged) out.warnings.push_back("coordinate descent hit its iteration cap");
    out.mode = std::move(mode);
    return out;
}

Mode random_mode(const std::vector<int>& degrees, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mode mode = Mode::zeros(degrees);
    for (auto& a : mode.coeffs)
        for (Eigen::Index j = 0; j < a.size(); ++j) a(j) = dist(rng);
    return mode;
}

// Factors equal to the first basis function (constant for both families).
Mode constant_mode(const std::vector<int>& degrees) {
    Mode mode = Mode::zeros(degrees);
    for (auto& a : mode.coeffs) a(0) = 1.0;
    return mode;
}

double safe_relative(double residual_norm, double target_norm) {
    return target_norm > 0.0 ? residual_norm / target_norm : residual_norm;
}

std::vector<DirectionSolver> uniform_solvers(int d, const DirectionSolver& solver) {
    return std::vector<DirectionSolver>(static_cast<std::size_t>(d), solver);
}

// Outcome of one enrichment attempt.
struct Enrichment {
    AlsResult als;
    double lambda = 0.0;
    double alpha = 0.0;
    double error_before = 0.0;
    double error_after = 0.0;
    /// False when no penalty met the sparsity cap.
    bool eligible = true;
    /// Winning mode of each cross-validation fold.
    std::vector<Mode> fold_modes;
};

class GreedyFitter {
public:
    GreedyFitter(const Dataset& data, const FitConfig& config) : data_(data), config_(config), rng_(config.seed) {
        const int d = data.dims();
        is_sparse_.assign(static_cast<std::size_t>(d), false);
        if (config.method == FitMethod::s2pgd)
            for (int k : config.sparse_dims) is_sparse_[static_cast<std::size_t>(k)] = true;
        for (int k = 0; k < d; ++k) {
            const int max_deg = is_sparse_[k] ? config.sparse_degree : config.mas.max_degree;
            specs_.push_back(BasisSpec{config.family, max_deg, data.domain[static_cast<std::size_t>(k)]});
        }
        if (config.method != FitMethod::spgd) {
            folds_ = make_folds(data.size(), config.selection, config.seed);
            fold_residuals_.assign(folds_.size(), data.targets);
        }
    }

    FitResult run() {
        SeparatedModel model(specs_, ModelMeta{to_string(config_.method), config_.seed});
        FitReport report;
        report.method = to_string(config_.method);
        const int outside = data_.count_outside();
        if (outside > 0) report.warnings.push_back(std::to_string(outside) + " samples lie outside the domain box");

        Eigen::VectorXd residual = data_.targets;
        const double target_norm = data_.targets.norm();
        std::vector<double> history{safe_relative(residual.norm(), target_norm)};
        int degree = std::min(config_.mas.initial_degree, config_.mas.max_degree);
        int rejections = 0;

        while (model.rank() < config_.max_modes) {
            if (residual.norm() <= 1e-13 * std::max(target_norm, std::numeric_limits<double>::min())) break;

            std::vector<int> degrees(static_cast<std::size_t>(data_.dims()));
            for (int k = 0; k < data_.dims(); ++k) degrees[k] = is_sparse_[k] ? config_.sparse_degree : degree;
            const RankOneSystem sys = build_system(data_, specs_, degrees, residual);
            const Mode init = choose_start(sys, degrees, rejections == 0);

            Enrichment step = enrich(sys, init);
            if (step.als.degenerate && rejections == 0) step = enrich(sys, random_mode(degrees, rng_));

            const bool accepted = !step.als.degenerate && !step.als.mode.is_zero() && step.eligible &&
                                  step.error_after < step.error_before * (1.0 - config_.accept_tol);
            if (!accepted) {
                report.warnings.push_back("enrichment " + std::to_string(model.rank() + 1) + " rejected at degree " +
                                          std::to_string(degree) +
                                          (step.eligible ? "" : ": no penalty met the sparsity cap"));
                // Below the top degree a rejection only raises the MAS degree.
                if (degree < config_.mas.max_degree) {
                    ++degree;
                    continue;
                }
                if (++rejections >= config_.patience_modes) break;
                continue;
            }
            rejections = 0;
            for (std::size_t f = 0; f < step.fold_modes.size(); ++f)
                fold_residuals_[f] -= mode_values(sys, step.fold_modes[f]);

            residual -= mode_values(sys, step.als.mode);
            ModeRecord record;
            record.degrees = degrees;
            record.fp_iterations = step.als.iterations;
            record.converged = step.als.converged;
            record.lambda = step.lambda;
            record.alpha = step.alpha;
            record.selection_error = step.error_after;
            record.train_error = safe_relative(residual.norm(), target_norm);
            record.supports.resize(static_cast<std::size_t>(data_.dims()));
            for (int k = 0; k < data_.dims(); ++k)
                if (is_sparse_[k]) record.supports[k] = support_of(step.als.mode.coeffs[k]);
            for (const auto& w : step.als.warnings)
                report.warnings.push_back("mode " + std::to_string(model.rank() + 1) + ": " + w);

            model.push_mode(std::move(step.als.mode));
            report.error_curve.push_back(step.error_after);
            report.modes.push_back(std::move(record));
            history.push_back(report.modes.back().train_error);
            degree = mas_next_degree(history, degree, config_.mas);
        }

        report.rank = model.rank();
        report.train_error = safe_relative(residual.norm(), target_norm);
        if (model.rank() == 0) {
            report.failed = true;
            report.warnings.push_back("no mode was accepted");
        }
        return {std::move(model), std::move(report)};
    }

private:
    Mode choose_start(const RankOneSystem& sys, const std::vector<int>& degrees, bool ones_first) {
        Mode first = ones_first ? Mode::ones(degrees) : random_mode(degrees, rng_);
        if (config_.starts <= 1) return first;
        const auto ols = uniform_solvers(sys.dims(), DirectionSolver::ols());
        std::optional<Mode> best;
        double best_sse = std::numeric_limits<double>::infinity();
        // The random starts come first so the seed stream does not depend on the extra start.
        for (int s = 0; s <= config_.starts; ++s) {
            Mode start = s == 0 ? first : s < config_.starts ? random_mode(degrees, rng_) : constant_mode(degrees);
            AlsResult res = run_als(sys, start, ols, config_.als, config_.cd);
            if (res.degenerate) continue;
            const double sse = (sys.residual - mode_values(sys, res.mode)).squaredNorm();
            if (sse < best_sse) {
                best_sse = sse;
                best = std::move(res.mode);
            }
        }
        return best ? *best : first;
    }

    std::vector<DirectionSolver> penalized_solvers(const Candidate& c) const {
        const int d = data_.dims();
        if (config_.method == FitMethod::rspgd) return uniform_solvers(d, DirectionSolver::penalized(c.lambda, c.alpha));
        std::vector<DirectionSolver> solvers(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            if (is_sparse_[k])
                solvers[k] = DirectionSolver::penalized(c.lambda, 1.0);
            else if (config_.other_solver == OtherDimSolver::elastic_net)
                solvers[k] = DirectionSolver::penalized(c.lambda, c.alpha);
        }
        return solvers;
    }

    // Lasso fixed point followed by an OLS fixed point restricted to the detected supports.
    AlsResult fit_sparse(const RankOneSystem& sys, const Mode& init, const Candidate& c) const {
        auto solvers = penalized_solvers(c);
        AlsResult lasso = run_als(sys, init, solvers, config_.als, config_.cd);
        if (lasso.degenerate) return lasso;
        for (int k = 0; k < sys.dims(); ++k) {
            if (!is_sparse_[k]) continue;
            solvers[k].kind = SolverKind::support_ols;
            solvers[k].support = support_of(lasso.mode.coeffs[k]);
        }
        AlsResult debiased = run_als(sys, lasso.mode, solvers, config_.als, config_.cd);
        debiased.iterations += lasso.iterations;
        debiased.warnings.insert(debiased.warnings.begin(), lasso.warnings.begin(), lasso.warnings.end());
        return debiased;
    }

    AlsResult fit_candidate(const RankOneSystem& sys, const Mode& init, const Candidate& c) const {
        if (config_.method == FitMethod::s2pgd) return fit_sparse(sys, init, c);
        return run_als(sys, init, penalized_solvers(c), config_.als, config_.cd);
    }

    bool sparse_ok(const Mode& mode) const {
        for (int k = 0; k < mode.dims(); ++k) {
            if (!is_sparse_[k]) continue;
            const auto nnz = static_cast<int>(support_of(mode.coeffs[k]).size());
            if (nnz > config_.chi_limit(k)) return false;
        }
        return true;
    }

    Enrichment enrich(const RankOneSystem& sys, const Mode& init) {
        Enrichment step;
        if (config_.method == FitMethod::spgd) {
            step.als = run_als(sys, init, uniform_solvers(sys.dims(), DirectionSolver::ols()), config_.als, config_.cd);
            step.error_before = sys.residual.squaredNorm();
            step.error_after = (sys.residual - mode_values(sys, step.als.mode)).squaredNorm();
            return step;
        }

        const auto candidates = make_candidates(config_.lambda_grid, config_.alphas);
        // Each fold grows its own greedy path from its training rows, so the
        // scores below are held-out errors of the whole path, not of one mode.
        std::vector<RankOneSystem> train_sets;
        for (std::size_t f = 0; f < folds_.size(); ++f) {
            RankOneSystem fold_sys{sys.basis, fold_residuals_[f]};
            train_sets.push_back(fold_sys.subset(folds_[f].train));
        }
        std::vector<std::vector<Mode>> fold_modes(folds_.size());

        CandidatePredictor predictor = [&](const std::vector<int>& train, const std::vector<int>& test,
                                           const Candidate& c) -> Eigen::VectorXd {
            std::size_t f = 0;
            while (f < folds_.size() && folds_[f].train != train) ++f;
            if (f == folds_.size()) throw InvalidInput("unknown fold");
            const AlsResult res = fit_candidate(train_sets[f], init, c);
            fold_modes[f].push_back(res.mode);
            // scored against sys.residual: return what makes the difference the fold's own residual
            Eigen::VectorXd out(static_cast<Eigen::Index>(test.size()));
            const Eigen::VectorXd values = mode_values_at(sys, res.mode, test);
            for (std::size_t i = 0; i < test.size(); ++i)
                out(static_cast<Eigen::Index>(i)) =
                    sys.residual(test[i]) - fold_residuals_[f](test[i]) + values(static_cast<Eigen::Index>(i));
            return out;
        };
        auto table = score_candidates(sys.residual, predictor, candidates, folds_);

        // full-data fits are needed for the sparsity filter and for the winner
        std::vector<std::optional<AlsResult>> full(candidates.size());
        if (config_.method == FitMethod::s2pgd) {
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                full[i] = fit_candidate(sys, init, candidates[i]);
                table[i].eligible = !full[i]->degenerate && sparse_ok(full[i]->mode);
            }
        }
        const std::size_t best = pick_best(table, config_.selection.kind);
        if (!full[best]) full[best] = fit_candidate(sys, init, candidates[best]);

        step.als = std::move(*full[best]);
        step.eligible = table[best].eligible;
        step.lambda = candidates[best].lambda;
        step.alpha = candidates[best].alpha;
        step.error_after = table[best].total_sse;
        for (std::size_t f = 0; f < folds_.size(); ++f) {
            for (int row : folds_[f].test) step.error_before += fold_residuals_[f](row) * fold_residuals_[f](row);
            step.fold_modes.push_back(std::move(fold_modes[f][best]));
        }
        if (config_.accept == AcceptRule::training) {
            step.error_before = sys.residual.squaredNorm();
            step.error_after = (sys.residual - mode_values(sys, step.als.mode)).squaredNorm();
        }
        return step;
    }

    const Dataset& data_;
    const FitConfig& config_;
    std::mt19937_64 rng_;
    std::vector<bool> is_sparse_;
    std::vector<BasisSpec> specs_;
    std::vector<Fold> folds_;
    std::vector<Eigen::VectorXd> fold_residuals_;
};

}  // namespace

void Dataset::validate() const {
    if (points.rows() < 1) throw InvalidInput("dataset is empty");
    if (targets.size() != points.rows()) throw InvalidInput("targets and points differ in length");
    if (static_cast<int>(domain.size()) != dims()) throw InvalidInput("domain box does not match the dimension");
    validate_box(domain);
    if (!points.allFinite() || !targets.allFinite()) throw InvalidInput("dataset contains non-finite values");
}

int Dataset::count_outside() const {
    int outside = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        if (!box_contains(domain, points.row(i).transpose())) ++outside;
    return outside;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out;
    out.domain = domain;
    out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.points.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
        out.targets(static_cast<Eigen::Index>(i)) = targets(rows[i]);
    }
    return out;
}

std::string to_string(FitMethod method) {
    switch (method) {
        case FitMethod::spgd: return "spgd";
        case FitMethod::rspgd: return "rspgd";
        case FitMethod::s2pgd: return "s2pgd";
    }
    return "unknown";
}

FitMethod fit_method_from_string(const std::string& name) {
    if (name == "spgd") return FitMethod::spgd;
    if (name == "rspgd") return FitMethod::rspgd;
    if (name == "s2pgd") return FitMethod::s2pgd;
    throw InvalidInput("unknown fit method '" + name + "'");
}

DirectionSolver DirectionSolver::penalized(double lambda, double alpha, bool relative) {
    DirectionSolver s;
    s.kind = alpha == 0.0 ? SolverKind::ridge : alpha == 1.0 ? SolverKind::lasso : SolverKind::elastic_net;
    s.lambda = lambda;
    s.alpha = alpha;
    s.relative = relative;
    return s;
}

void FitConfig::validate(int dims) const {
    if (mas.initial_degree < 0 || mas.initial_degree > mas.max_degree)
        throw InvalidInput("MAS needs 0 <= initial_degree <= max_degree");
    if (!(mas.stagnation_tol >= 0.0) || mas.patience < 1) throw InvalidInput("invalid MAS stagnation settings");
    if (max_modes < 1) throw InvalidInput("max_modes must be at least 1");
    if (patience_modes < 1) throw InvalidInput("patience_modes must be at least 1");
    if (starts < 1) throw InvalidInput("starts must be at least 1");
    if (!(als.tol > 0.0)) throw InvalidInput("fixed-point tolerance must be positive");
    if (als.max_iters < 0) throw InvalidInput("negative fixed-point iteration cap");
    if (lambda_grid.empty() || alphas.empty()) throw InvalidInput("empty penalty grid");
    for (double l : lambda_grid)
        if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidInput("penalties must be finite and non-negative");
    for (double a : alphas)
        if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
    selection.validate();
    if (method == FitMethod::s2pgd) {
        if (sparse_dims.empty() && !sparse_auto) throw InvalidInput("s2pgd needs sparse dimensions or auto");
        for (int k : sparse_dims)
            if (k < 0 || k >= dims) throw InvalidInput("sparse dimension out of range");
        if (sparse_degree < 0) throw InvalidInput("sparse degree must be non-negative");
        if (!chi_lim.empty() && static_cast<int>(chi_lim.size()) != dims)
            throw InvalidInput("chi_lim needs one entry per dimension");
    }
    if (!(scan_split > 0.0 && scan_split < 1.0)) throw InvalidInput("scan split must lie in (0, 1)");
    if (stls_threshold && !(*stls_threshold > 0.0)) throw InvalidInput("STLS threshold must be positive");
}

int FitConfig::chi_limit(int k) const {
    if (!chi_lim.empty()) return chi_lim[static_cast<std::size_t>(k)];
    return (sparse_degree + 2) / 2;  // ceil(D / 2), D = degree + 1
}

PenalizedProblem assemble_direction_system(const Dataset& data, const SeparatedModel& prior, const Mode& mode, int k) {
    data.validate();
    if (prior.dims() != data.dims()) throw InvalidInput("model and dataset dimensions differ");
    if (k < 0 || k >= data.dims()) throw InvalidInput("direction index out of range");
    PenalizedProblem problem;
    problem.residual = data.targets - prior.evaluate_batch(data.points);
    const Eigen::VectorXd weights = prior.partial_products(mode, data.points, k);
    problem.design = weights.asDiagonal() * basis_matrix(prior.mode_basis(mode, k), data.points.col(k));
    return problem;
}

AlsResult als_fixed_point(const Dataset& data, const SeparatedModel& prior, Mode init,
                          const std::vector<DirectionSolver>& solvers, const AlsOptions& options,
                          const CoordinateDescentOptions& cd) {
    data.validate();
    prior.check_mode(init);
    if (static_cast<int>(solvers.size()) != data.dims()) throw InvalidInput("one direction solver per dimension");
    const Eigen::VectorXd residual = data.targets - prior.evaluate_batch(data.points);
    const RankOneSystem sys = build_system(data, prior.specs(), init.degrees, residual);
    return run_als(sys, std::move(init), solvers, options, cd);
}

int mas_next_degree(const std::vector<double>& history, int current_degree, const MasParams& params) {
    const int patience = std::max(params.patience, 1);
    if (static_cast<int>(history.size()) < patience + 1) return current_degree;
    for (int i = 0; i < patience; ++i) {
        const double newer = history[history.size() - 1 - static_cast<std::size_t>(i)];
        const double older = history[history.size() - 2 - static_cast<std::size_t>(i)];
        const double improvement = older > 0.0 ? (older - newer) / older : 0.0;
        if (improvement >= params.stagnation_tol) return current_degree;
    }
    return std::min(current_degree + 1, params.max_degree);
}

double training_error(const SeparatedModel& model, const Dataset& data) {
    const Eigen::VectorXd residual = data.targets - model.evaluate_batch(data.points);
    return safe_relative(residual.norm(), data.targets.norm());
}

FitResult fit(const Dataset& data, const FitConfig& config) {
    data.validate();
    config.validate(data.dims());
    if (data.size() < 2) throw InvalidInput("fitting needs at least 2 samples");
    if (config.method == FitMethod::s2pgd && config.sparse_dims.empty())
        throw InvalidInput("s2pgd without explicit sparse dimensions: use fit_s2pgd_dimension_scan");
    GreedyFitter fitter(data, config);
    return fitter.run();
}

FitResult fit_s2pgd_dimension_scan(const Dataset& data, const FitConfig& config) {
    data.validate();
    config.validate(data.dims());
    FitConfig base = config;
    base.method = FitMethod::s2pgd;
    base.sparse_auto = false;

    if (data.dims() == 1) {
        base.sparse_dims = {0};
        FitResult only = fit(data, base);
        only.report.penalized_dim = 0;
        only.report.scan.push_back({0, only.report.train_error, true, only.report.rank});
        return only;
    }

    SelectionPolicy split;
    split.kind = SelectionKind::split;
    split.ratio = config.scan_split;
    const Fold fold = make_folds(data.size(), split, config.seed).front();
    const Dataset train = data.subset(fold.train);
    const Dataset valid = data.subset(fold.test);

    std::vector<ScanCandidate> scan;
    for (int k = 0; k < data.dims(); ++k) {
        FitConfig cfg = base;
        cfg.sparse_dims = {k};
        const FitResult res = fit(train, cfg);
        ScanCandidate cand;
        cand.dim = k;
        cand.rank = res.model.rank();
        const Eigen::VectorXd pred = res.model.evaluate_batch(valid.points);
        cand.validation_error = safe_relative((valid.targets - pred).norm(), valid.targets.norm());
        cand.sparse_ok = !res.report.failed;
        for (const auto& mode : res.model.modes())
            if (static_cast<int>(support_of(mode.coeffs[k]).size()) > cfg.chi_limit(k)) cand.sparse_ok = false;
        scan.push_back(cand);
    }

    const bool any_ok = std::any_of(scan.begin(), scan.end(), [](const ScanCandidate& c) { return c.sparse_ok; });
    std::size_t best = scan.size();
    for (std::size_t i = 0; i < scan.size(); ++i) {
        if (any_ok && !scan[i].sparse_ok) continue;
        if (best == scan.size() || scan[i].validation_error < scan[best].validation_error) best = i;
    }

    FitConfig chosen = base;
    chosen.sparse_dims = {scan[best].dim};
    FitResult out = fit(data, chosen);
    out.report.penalized_dim = scan[best].dim;
    out.report.scan = std::move(scan);
    if (!any_ok) out.report.warnings.push_back("no penalized dimension met the sparsity cap; best unfiltered model kept");
    return out;
}

FitResult fit_auto(const Dataset& data, const FitConfig& config) {
    if (config.method == FitMethod::s2pgd && (config.sparse_auto || config.sparse_dims.empty()))
        return fit_s2pgd_dimension_scan(data, config);
    return fit(data, config);
}

}  // namespace spgd
