// SPDX-License-Identifier: Apache-2.0
//
// Anchored ANOVA decomposition and the ANOVA + separated-regression pipeline:
//   f(s) ~ f0 + sum_i f_i(s^i) + f'(s)
// with f0 = f(c), univariate terms fitted along a cross through the anchor c,
// and the interaction residual f' fitted from a few extra samples.
#pragma once

#include "spgd/fit.hpp"
#include "spgd/sampling.hpp"
#include "spgd/separated_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spgd {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// Natural cubic spline through (knots, values); linear beyond the end knots.
class NaturalCubicSpline {
public:
    NaturalCubicSpline() = default;
    /// Knots need not be sorted; duplicates throw InvalidInput. At least 2 knots.
    NaturalCubicSpline(std::vector<double> knots, std::vector<double> values);

    double operator()(double s) const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> second_;  // second derivatives at the knots
};

/// One decomposition term: the dimensions it involves and an evaluator on full points.
struct AnovaTerm {
    std::vector<int> dims;
    ScalarField eval;
};

struct Decomposition {
    double f0 = 0.0;
    std::vector<AnovaTerm> terms;  // univariate first, then pairs (i < j) when order = 2

    double evaluate(const Eigen::VectorXd& point) const;
    const AnovaTerm& term(const std::vector<int>& dims) const;
};

/// Anchored terms: f0 = f(c), f_i = f(c|s^i) - f0, f_ij = f(c|s^i,s^j) - f_i - f_j - f0.
Decomposition anchored_decompose_exact(const ScalarField& f, const Eigen::VectorXd& anchor, int order, const Box& box);

/// Classical ANOVA terms under the uniform measure on `box`, with conditional
/// expectations computed by tensor Gauss-Legendre quadrature (`nodes` per dimension).
Decomposition expectation_decompose(const ScalarField& f, const Box& box, int order, int nodes = 8);

/// Gauss-Legendre nodes and weights on [-1, 1]; weights sum to 2.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct SobolResult {
    std::vector<double> indices;
    std::vector<double> variances;
    bool zero_variance = false;
};

/// S_n = Var_n / sum_m Var_m, variances by seeded Monte Carlo over the uniform measure.
SobolResult sobol_indices(const std::vector<AnovaTerm>& terms, const Box& box, int samples, std::uint64_t seed);

/// Univariate component: natural spline (default) or ridge-regularized Chebyshev fit.
struct UnivariatePolynomial {
    BasisSpec basis;
    Eigen::VectorXd coeffs;
    double offset = 0.0;  // subtracted so the component vanishes at the anchor
    double operator()(double s) const;
};

using UnivariateTerm = std::variant<NaturalCubicSpline, UnivariatePolynomial>;
double evaluate_univariate(const UnivariateTerm& term, double s);

enum class UnivariateKind { spline, polynomial };

/// Sum of c_t prod_{k in dims_t} (s^k - c_k)^{powers_t}: vanishes whenever any involved
/// coordinate equals its anchor value.
struct AnchoredPolynomial {
    struct Term {
        std::vector<int> dims;
        std::vector<int> powers;
        double coeff = 0.0;
    };
    Eigen::VectorXd anchor;
    std::vector<Term> terms;

    double operator()(const Eigen::VectorXd& point) const;
    /// Feature value of term t without its coefficient.
    double feature(std::size_t t, const Eigen::VectorXd& point) const;
};

using CouplingModel = std::variant<std::monostate, AnchoredPolynomial, SeparatedModel>;

enum class CouplingKind { anchored_poly, pgd };

struct AnovaConfig {
    UnivariateKind univariate = UnivariateKind::spline;
    int univariate_degree = 6;
    double univariate_ridge = 1e-8;
    CouplingKind coupling = CouplingKind::anchored_poly;
    /// Maximum power per dimension in anchored product features (m, n <= this).
    int coupling_degree = 2;
    /// rs-PGD settings when coupling = pgd.
    FitConfig pgd;
};

class AnovaModel {
public:
    Eigen::VectorXd anchor;
    double f0 = 0.0;
    std::vector<UnivariateTerm> univariate;
    CouplingModel coupling;
    std::optional<std::vector<double>> sobol;
    Box box;
    std::vector<std::string> warnings;

    int dims() const { return static_cast<int>(anchor.size()); }
    double evaluate(const Eigen::VectorXd& point) const;
    Eigen::VectorXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const;
    double coupling_value(const Eigen::VectorXd& point) const;

    /// Univariate terms followed by one term for the whole coupling model.
    std::vector<AnovaTerm> terms() const;
};

/// One spline per dimension through (anchor coordinate, 0) and the arm samples
/// (s_j, f(c|s_j) - f0). arm_values[i][j] is f at the j-th arm point of dimension i.
std::vector<UnivariateTerm> fit_univariate_terms(const CrossPlan& plan, const std::vector<std::vector<double>>& arm_values,
                                                 double f0, const AnovaConfig& config = {});

struct CouplingFit {
    CouplingModel model;
    std::vector<std::string> warnings;
};

/// Fits f' = f - f0 - sum_i f_i on extra samples. `residual_targets` are already f'.
CouplingFit fit_coupling_residual(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                  const Eigen::Ref<const Eigen::VectorXd>& residual_targets,
                                  const Eigen::VectorXd& anchor, const Box& box, const AnovaConfig& config);

/// Three-step pipeline on a dataset that contains the anchor, cross samples and
/// coupling samples (identified by comparing coordinates with the anchor).
AnovaModel fit_anova_pgd(const Dataset& data, const Eigen::VectorXd& anchor, const AnovaConfig& config = {});

/// Samples f on the plan and runs the dataset pipeline.
AnovaModel fit_anova_pgd(const ScalarField& f, const CrossPlan& plan, const AnovaConfig& config = {});

}  // namespace spgd
