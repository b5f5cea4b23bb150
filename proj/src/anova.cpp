// SPDX-License-Identifier: Apache-2.0
#include "spgd/anova.hpp"

#include "spgd/error.hpp"
#include "spgd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace spgd {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots, std::vector<double> values) {
    if (knots.size() != values.size()) throw InvalidInput("spline knots and values differ in length");
    if (knots.size() < 2) throw InvalidInput("a spline needs at least 2 knots");
    std::vector<std::size_t> order(knots.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return knots[a] < knots[b]; });
    for (std::size_t i : order) {
        if (!std::isfinite(knots[i]) || !std::isfinite(values[i])) throw InvalidInput("non-finite spline data");
        knots_.push_back(knots[i]);
        values_.push_back(values[i]);
    }
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1])) throw InvalidInput("duplicate spline knots");

    // Tridiagonal system for interior second derivatives (natural ends: zero).
    const std::size_t n = knots_.size();
    second_.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = knots_[i] - knots_[i - 1];
        const double h1 = knots_[i + 1] - knots_[i];
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0;
    }
    // Thomas algorithm; sub-diagonal entry of row i is h0 / 6.
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double lower = (knots_[i] - knots_[i - 1]) / 6.0;
        const double factor = lower / diag[i - 1];
        diag[i] -= factor * upper[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        second_[i] = (rhs[i] - upper[i] * second_[i + 1]) / diag[i];
        if (i == 1) break;
    }
}

double NaturalCubicSpline::operator()(double s) const {
    const std::size_t n = knots_.size();
    if (n == 0) return 0.0;
    if (s <= knots_.front()) {
        const double h = knots_[1] - knots_[0];
        const double slope = (values_[1] - values_[0]) / h - h * (2.0 * second_[0] + second_[1]) / 6.0;
        return values_[0] + slope * (s - knots_[0]);
    }
    if (s >= knots_.back()) {
        const double h = knots_[n - 1] - knots_[n - 2];
        const double slope =
            (values_[n - 1] - values_[n - 2]) / h + h * (second_[n - 2] + 2.0 * second_[n - 1]) / 6.0;
        return values_[n - 1] + slope * (s - knots_[n - 1]);
    }
    const auto upper = std::upper_bound(knots_.begin(), knots_.end(), s);
    const std::size_t i = static_cast<std::size_t>(upper - knots_.begin()) - 1;
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - s) / h;
    const double b = (s - knots_[i]) / h;
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

double Decomposition::evaluate(const Eigen::VectorXd& point) const {
    double value = f0;
    for (const auto& t : terms) value += t.eval(point);
    return value;
}

const AnovaTerm& Decomposition::term(const std::vector<int>& dims) const {
    for (const auto& t : terms)
        if (t.dims == dims) return t;
    throw InvalidInput("decomposition has no such term");
}

namespace {

void check_order(int order) {
    if (order != 1 && order != 2) throw InvalidInput("decomposition order must be 1 or 2");
}

std::vector<std::vector<int>> term_sets(int d, int order) {
    std::vector<std::vector<int>> sets;
    for (int i = 0; i < d; ++i) sets.push_back({i});
    if (order == 2)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) sets.push_back({i, j});
    return sets;
}

// Mean of f over the coordinates not listed in `fixed`, uniform measure on the box.
double conditional_mean(const ScalarField& f, const Box& box, const std::vector<int>& fixed,
                        const Eigen::VectorXd& values, const std::vector<double>& nodes,
                        const std::vector<double>& weights) {
    const int d = static_cast<int>(box.size());
    std::vector<int> free_dims;
    for (int k = 0; k < d; ++k)
        if (std::find(fixed.begin(), fixed.end(), k) == fixed.end()) free_dims.push_back(k);
    Eigen::VectorXd point = values;
    if (free_dims.empty()) return f(point);

    const std::size_t q = nodes.size();
    std::vector<std::size_t> cursor(free_dims.size(), 0);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (std::size_t c = 0; c < free_dims.size(); ++c) {
            const auto& interval = box[static_cast<std::size_t>(free_dims[c])];
            point(free_dims[c]) = interval.center() + 0.5 * interval.width() * nodes[cursor[c]];
            w *= 0.5 * weights[cursor[c]];
        }
        total += w * f(point);
        std::size_t c = 0;
        while (c < cursor.size() && ++cursor[c] == q) cursor[c++] = 0;
        if (c == cursor.size()) break;
    }
    return total;
}

}  // namespace

Decomposition anchored_decompose_exact(const ScalarField& f, const Eigen::VectorXd& anchor, int order, const Box& box) {
    check_order(order);
    validate_box(box);
    if (!box_contains(box, anchor)) throw DomainError("anchor lies outside the domain box");
    Decomposition out;
    out.f0 = f(anchor);
    const double f0 = out.f0;
    for (const auto& dims : term_sets(static_cast<int>(anchor.size()), order)) {
        if (dims.size() == 1) {
            const int i = dims[0];
            out.terms.push_back({dims, [f, anchor, f0, i](const Eigen::VectorXd& s) {
                                     Eigen::VectorXd p = anchor;
                                     p(i) = s(i);
                                     return f(p) - f0;
                                 }});
        } else {
            const int i = dims[0];
            const int j = dims[1];
            out.terms.push_back({dims, [f, anchor, f0, i, j](const Eigen::VectorXd& s) {
                                     Eigen::VectorXd p = anchor;
                                     p(i) = s(i);
                                     const double fi = f(p) - f0;
                                     p = anchor;
                                     p(j) = s(j);
                                     const double fj = f(p) - f0;
                                     p(i) = s(i);
                                     return f(p) - fi - fj - f0;
                                 }});
        }
    }
    return out;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw InvalidInput("Gauss-Legendre needs at least one node");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double derivative = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            derivative = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / derivative;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

Decomposition expectation_decompose(const ScalarField& f, const Box& box, int order, int nodes) {
    check_order(order);
    validate_box(box);
    std::vector<double> x, w;
    gauss_legendre(nodes, x, w);
    const int d = static_cast<int>(box.size());

    Decomposition out;
    out.f0 = conditional_mean(f, box, {}, box_center(box), x, w);
    const double f0 = out.f0;
    for (const auto& dims : term_sets(d, order)) {
        if (dims.size() == 1) {
            out.terms.push_back({dims, [=](const Eigen::VectorXd& s) {
                                     return conditional_mean(f, box, dims, s, x, w) - f0;
                                 }});
        } else {
            const int i = dims[0];
            const int j = dims[1];
            out.terms.push_back({dims, [=](const Eigen::VectorXd& s) {
                                     const double fi = conditional_mean(f, box, {i}, s, x, w) - f0;
                                     const double fj = conditional_mean(f, box, {j}, s, x, w) - f0;
                                     return conditional_mean(f, box, dims, s, x, w) - fi - fj - f0;
                                 }});
        }
    }
    return out;
}

SobolResult sobol_indices(const std::vector<AnovaTerm>& terms, const Box& box, int samples, std::uint64_t seed) {
    validate_box(box);
    if (samples < 2) throw InvalidInput("Sobol estimation needs at least 2 samples");
    const int d = static_cast<int>(box.size());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> sum(terms.size(), 0.0), sum_sq(terms.size(), 0.0);
    Eigen::VectorXd point(d);
    for (int n = 0; n < samples; ++n) {
        for (int k = 0; k < d; ++k) {
            const auto& interval = box[static_cast<std::size_t>(k)];
            point(k) = interval.lo + unit(rng) * interval.width();
        }
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const double v = terms[t].eval(point);
            sum[t] += v;
            sum_sq[t] += v * v;
        }
    }
    SobolResult out;
    double total = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const double mean = sum[t] / samples;
        const double var = std::max(0.0, sum_sq[t] / samples - mean * mean);
        out.variances.push_back(var);
        total += var;
    }
    out.indices.assign(terms.size(), 0.0);
    if (!(total > 1e-300)) {
        out.zero_variance = true;
        return out;
    }
    for (std::size_t t = 0; t < terms.size(); ++t) out.indices[t] = out.variances[t] / total;
    return out;
}

double UnivariatePolynomial::operator()(double s) const {
    return eval_basis(basis, s).dot(coeffs) - offset;
}

double evaluate_univariate(const UnivariateTerm& term, double s) {
    return std::visit([s](const auto& fn) { return fn(s); }, term);
}

double AnchoredPolynomial::feature(std::size_t t, const Eigen::VectorXd& point) const {
    const auto& term = terms[t];
    double value = 1.0;
    for (std::size_t c = 0; c < term.dims.size(); ++c)
        value *= std::pow(point(term.dims[c]) - anchor(term.dims[c]), term.powers[c]);
    return value;
}

double AnchoredPolynomial::operator()(const Eigen::VectorXd& point) const {
    double value = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) value += terms[t].coeff * feature(t, point);
    return value;
}

double AnovaModel::coupling_value(const Eigen::VectorXd& point) const {
    if (const auto* poly = std::get_if<AnchoredPolynomial>(&coupling)) return (*poly)(point);
    if (const auto* pgd = std::get_if<SeparatedModel>(&coupling)) return pgd->evaluate(point);
    return 0.0;
}

double AnovaModel::evaluate(const Eigen::VectorXd& point) const {
    if (point.size() != dims()) throw InvalidInput("point dimension does not match the ANOVA model");
    double value = f0;
    for (int i = 0; i < dims(); ++i) value += evaluate_univariate(univariate[static_cast<std::size_t>(i)], point(i));
    return value + coupling_value(point);
}

Eigen::VectorXd AnovaModel::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    if (points.cols() != dims()) throw InvalidInput("points do not match the ANOVA model dimension");
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index r = 0; r < points.rows(); ++r) out(r) = evaluate(points.row(r).transpose());
    return out;
}

std::vector<AnovaTerm> AnovaModel::terms() const {
    std::vector<AnovaTerm> out;
    for (int i = 0; i < dims(); ++i) {
        const UnivariateTerm term = univariate[static_cast<std::size_t>(i)];
        out.push_back({{i}, [term, i](const Eigen::VectorXd& s) { return evaluate_univariate(term, s(i)); }});
    }
    if (dims() > 1) {
        std::vector<int> all(static_cast<std::size_t>(dims()));
        std::iota(all.begin(), all.end(), 0);
        const CouplingModel model = coupling;
        out.push_back({all, [model](const Eigen::VectorXd& s) {
                           if (const auto* poly = std::get_if<AnchoredPolynomial>(&model)) return (*poly)(s);
                           if (const auto* pgd = std::get_if<SeparatedModel>(&model)) return pgd->evaluate(s);
                           return 0.0;
                       }});
    }
    return out;
}

std::vector<UnivariateTerm> fit_univariate_terms(const CrossPlan& plan, const std::vector<std::vector<double>>& arm_values,
                                                 double f0, const AnovaConfig& config) {
    const int d = plan.dims();
    if (static_cast<int>(arm_values.size()) != d) throw InvalidInput("one list of arm values per dimension");
    std::vector<UnivariateTerm> out;
    for (int i = 0; i < d; ++i) {
        const auto& coords = plan.coords[static_cast<std::size_t>(i)];
        const auto& vals = arm_values[static_cast<std::size_t>(i)];
        if (coords.size() != vals.size()) throw InvalidInput("arm coordinates and values differ in length");
        const Interval domain = plan.box[static_cast<std::size_t>(i)];
        if (coords.empty()) {
            out.emplace_back(UnivariatePolynomial{BasisSpec{BasisFamily::chebyshev, 0, domain}, Eigen::VectorXd::Zero(1), 0.0});
            continue;
        }
        std::vector<double> knots{plan.anchor(i)};
        std::vector<double> values{0.0};
        for (std::size_t j = 0; j < coords.size(); ++j) {
            knots.push_back(coords[j]);
            values.push_back(vals[j] - f0);
        }
        if (config.univariate == UnivariateKind::spline) {
            out.emplace_back(NaturalCubicSpline(std::move(knots), std::move(values)));
            continue;
        }
        const int degree = std::min<int>(config.univariate_degree, static_cast<int>(knots.size()) - 1);
        UnivariatePolynomial poly{BasisSpec{BasisFamily::chebyshev, degree, domain}, {}, 0.0};
        Eigen::VectorXd s = Eigen::Map<Eigen::VectorXd>(knots.data(), static_cast<Eigen::Index>(knots.size()));
        Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        const Eigen::MatrixXd design = basis_matrix(poly.basis, s);
        const double scale = (design.transpose() * design).diagonal().maxCoeff();
        poly.coeffs = solve_ridge(design, y, config.univariate_ridge * scale);
        poly.offset = eval_basis(poly.basis, plan.anchor(i)).dot(poly.coeffs);
        out.emplace_back(std::move(poly));
    }
    return out;
}

CouplingFit fit_coupling_residual(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                  const Eigen::Ref<const Eigen::VectorXd>& residual_targets,
                                  const Eigen::VectorXd& anchor, const Box& box, const AnovaConfig& config) {
    const int d = static_cast<int>(anchor.size());
    if (points.cols() != d || points.rows() != residual_targets.size())
        throw InvalidInput("coupling samples do not match the anchor dimension");
    CouplingFit out;
    if (d < 2) return out;
    if (points.rows() == 0) {
        out.warnings.push_back("no coupling samples: interactions not modelled");
        return out;
    }

    if (config.coupling == CouplingKind::pgd) {
        if (points.rows() < 2) {
            out.warnings.push_back("a separated coupling model needs at least 2 samples");
            return out;
        }
        Dataset data{points, residual_targets, box};
        FitResult res = fit_auto(data, config.pgd);
        for (const auto& w : res.report.warnings) out.warnings.push_back("coupling: " + w);
        out.model = std::move(res.model);
        return out;
    }

    if (config.coupling_degree < 1) throw InvalidInput("coupling degree must be at least 1");
    AnchoredPolynomial poly;
    poly.anchor = anchor;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int m = 1; m <= config.coupling_degree; ++m)
                for (int n = 1; n <= config.coupling_degree; ++n) poly.terms.push_back({{i, j}, {m, n}, 0.0});

    Eigen::MatrixXd design(points.rows(), static_cast<Eigen::Index>(poly.terms.size()));
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        const Eigen::VectorXd p = points.row(r).transpose();
        for (std::size_t t = 0; t < poly.terms.size(); ++t) design(r, static_cast<Eigen::Index>(t)) = poly.feature(t, p);
    }
    Eigen::VectorXd coeffs;
    if (design.rows() >= design.cols()) {
        coeffs = solve_ols(design, residual_targets);
    } else {
        const double scale = (design.transpose() * design).diagonal().maxCoeff();
        coeffs = solve_ridge(design, residual_targets, 1e-8 * std::max(scale, 1e-300));
        out.warnings.push_back("fewer coupling samples than coefficients: ridge-regularized solve");
    }
    for (std::size_t t = 0; t < poly.terms.size(); ++t) poly.terms[t].coeff = coeffs(static_cast<Eigen::Index>(t));
    out.model = std::move(poly);
    return out;
}

AnovaModel fit_anova_pgd(const Dataset& data, const Eigen::VectorXd& anchor, const AnovaConfig& config) {
    data.validate();
    const int d = data.dims();
    if (anchor.size() != d) throw InvalidInput("anchor dimension does not match the dataset");
    if (!box_contains(data.domain, anchor)) throw DomainError("anchor lies outside the domain box");

    CrossPlan plan;
    plan.anchor = anchor;
    plan.box = data.domain;
    plan.coords.resize(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> arm_values(static_cast<std::size_t>(d));
    std::vector<int> coupling_rows;
    double f0_sum = 0.0;
    int anchor_rows = 0;
    for (int r = 0; r < data.size(); ++r) {
        int differing = 0;
        int which = -1;
        for (int k = 0; k < d; ++k) {
            const double tol = 1e-12 * data.domain[static_cast<std::size_t>(k)].width();
            if (std::abs(data.points(r, k) - anchor(k)) > tol) {
                ++differing;
                which = k;
            }
        }
        if (differing == 0) {
            f0_sum += data.targets(r);
            ++anchor_rows;
        } else if (differing == 1) {
            plan.coords[static_cast<std::size_t>(which)].push_back(data.points(r, which));
            arm_values[static_cast<std::size_t>(which)].push_back(data.targets(r));
        } else {
            coupling_rows.push_back(r);
        }
    }
    if (anchor_rows == 0) throw InvalidInput("dataset does not contain the anchor point");

    AnovaModel model;
    model.anchor = anchor;
    model.box = data.domain;
    model.f0 = f0_sum / anchor_rows;
    model.univariate = fit_univariate_terms(plan, arm_values, model.f0, config);

    Eigen::MatrixXd extra(static_cast<Eigen::Index>(coupling_rows.size()), d);
    Eigen::VectorXd residual(static_cast<Eigen::Index>(coupling_rows.size()));
    for (std::size_t c = 0; c < coupling_rows.size(); ++c) {
        const int r = coupling_rows[c];
        extra.row(static_cast<Eigen::Index>(c)) = data.points.row(r);
        double value = data.targets(r) - model.f0;
        for (int k = 0; k < d; ++k)
            value -= evaluate_univariate(model.univariate[static_cast<std::size_t>(k)], data.points(r, k));
        residual(static_cast<Eigen::Index>(c)) = value;
    }
    CouplingFit coupling = fit_coupling_residual(extra, residual, anchor, data.domain, config);
    model.coupling = std::move(coupling.model);
    model.warnings = std::move(coupling.warnings);
    return model;
}

AnovaModel fit_anova_pgd(const ScalarField& f, const CrossPlan& plan, const AnovaConfig& config) {
    const Eigen::MatrixXd points = plan.all_points();
    Eigen::VectorXd targets(points.rows());
    for (Eigen::Index r = 0; r < points.rows(); ++r) targets(r) = f(points.row(r).transpose());
    return fit_anova_pgd(Dataset{points, targets, plan.box}, plan.anchor, config);
}

}  // namespace spgd
