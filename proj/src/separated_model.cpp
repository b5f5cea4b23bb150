// SPDX-License-Identifier: Apache-2.0
#include "spgd/separated_model.hpp"

#include "spgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spgd {

Mode Mode::ones(const std::vector<int>& degrees) {
    Mode mode;
    mode.degrees = degrees;
    for (int deg : degrees) mode.coeffs.push_back(Eigen::VectorXd::Ones(deg + 1));
    return mode;
}

Mode Mode::zeros(const std::vector<int>& degrees) {
    Mode mode;
    mode.degrees = degrees;
    for (int deg : degrees) mode.coeffs.push_back(Eigen::VectorXd::Zero(deg + 1));
    return mode;
}

bool Mode::is_zero() const {
    return std::any_of(coeffs.begin(), coeffs.end(), [](const Eigen::VectorXd& a) { return a.isZero(0.0); });
}

SeparatedModel::SeparatedModel(std::vector<BasisSpec> specs, ModelMeta meta)
    : specs_(std::move(specs)), meta_(std::move(meta)) {
    for (const auto& spec : specs_) spec.validate();
}

const Mode& SeparatedModel::mode(int m) const {
    if (m < 0 || m >= rank()) throw InvalidInput("mode index " + std::to_string(m) + " out of range");
    return modes_[static_cast<std::size_t>(m)];
}

void SeparatedModel::check_mode(const Mode& mode) const {
    if (mode.dims() != dims() || static_cast<int>(mode.degrees.size()) != dims())
        throw InvalidInput("mode has " + std::to_string(mode.dims()) + " factors, model has " +
                           std::to_string(dims()) + " dimensions");
    for (int k = 0; k < dims(); ++k) {
        if (mode.degrees[k] < 0) throw InvalidInput("negative mode degree");
        if (mode.coeffs[k].size() != mode.degrees[k] + 1)
            throw InvalidInput("factor " + std::to_string(k) + " length does not match its degree");
        if (!mode.coeffs[k].allFinite()) throw InvalidInput("non-finite mode coefficient");
    }
}

void SeparatedModel::check_points(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    if (points.cols() != dims())
        throw InvalidInput("points have " + std::to_string(points.cols()) + " columns, model has " +
                           std::to_string(dims()) + " dimensions");
}

double SeparatedModel::evaluate(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    if (point.size() != dims())
        throw InvalidInput("point has " + std::to_string(point.size()) + " entries, model has " +
                           std::to_string(dims()) + " dimensions");
    Eigen::MatrixXd row = point.transpose();
    return evaluate_batch(row)(0);
}

Eigen::VectorXd SeparatedModel::evaluate_mode(const Mode& mode,
                                              const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    check_points(points);
    check_mode(mode);
    Eigen::VectorXd values = Eigen::VectorXd::Ones(points.rows());
    for (int k = 0; k < dims(); ++k)
        values.array() *= (basis_matrix(mode_basis(mode, k), points.col(k)) * mode.coeffs[k]).array();
    return values;
}

Eigen::VectorXd SeparatedModel::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    check_points(points);
    const Eigen::Index n = points.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (modes_.empty() || n == 0) return out;

    // One basis table per dimension at the highest degree any mode uses;
    // lower-degree modes read a prefix of the columns.
    std::vector<Eigen::MatrixXd> tables(static_cast<std::size_t>(dims()));
    for (int k = 0; k < dims(); ++k) {
        int max_deg = 0;
        for (const auto& mode : modes_) max_deg = std::max(max_deg, mode.degrees[k]);
        tables[k] = basis_matrix(specs_[k].with_degree(max_deg), points.col(k));
    }
    Eigen::VectorXd term(n);
    for (const auto& mode : modes_) {
        term.setOnes();
        for (int k = 0; k < dims(); ++k) {
            const auto& a = mode.coeffs[k];
            term.array() *= (tables[k].leftCols(a.size()) * a).array();
        }
        out += term;
    }
    return out;
}

void SeparatedModel::push_mode(Mode mode) {
    check_mode(mode);
    modes_.push_back(std::move(mode));
}

SeparatedModel SeparatedModel::with_mode(Mode mode) const {
    SeparatedModel out = *this;
    out.push_mode(std::move(mode));
    return out;
}

SeparatedModel SeparatedModel::slice(int first, int last) const {
    if (first < 0 || last > rank() || first > last) throw InvalidInput("invalid mode range");
    SeparatedModel out(specs_, meta_);
    out.modes_.assign(modes_.begin() + first, modes_.begin() + last);
    return out;
}

Eigen::VectorXd SeparatedModel::partial_products(const Eigen::Ref<const Eigen::MatrixXd>& points, int m,
                                                 int skip) const {
    return partial_products(mode(m), points, skip);
}

Eigen::VectorXd SeparatedModel::partial_products(const Mode& mode, const Eigen::Ref<const Eigen::MatrixXd>& points,
                                                 int skip) const {
    check_points(points);
    check_mode(mode);
    if (skip < 0 || skip >= dims()) throw InvalidInput("skipped dimension out of range");
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(points.rows());
    for (int j = 0; j < dims(); ++j) {
        if (j == skip) continue;
        weights.array() *= (basis_matrix(mode_basis(mode, j), points.col(j)) * mode.coeffs[j]).array();
    }
    return weights;
}

}  // namespace spgd
