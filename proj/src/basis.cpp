// SPDX-License-Identifier: Apache-2.0
#include "spgd/basis.hpp"

#include "spgd/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace spgd {

std::string_view to_string(BasisFamily family) {
    switch (family) {
        case BasisFamily::chebyshev: return "chebyshev";
        case BasisFamily::monomial: return "monomial";
    }
    return "unknown";
}

BasisFamily basis_family_from_string(std::string_view name) {
    if (name == "chebyshev") return BasisFamily::chebyshev;
    if (name == "monomial") return BasisFamily::monomial;
    throw InvalidInput("unknown basis family '" + std::string(name) + "'");
}

void BasisSpec::validate() const {
    if (degree < 0) throw InvalidInput("basis degree must be non-negative");
    if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi))
        throw InvalidInput("basis domain must be a finite interval with lo < hi");
}

BasisSpec BasisSpec::with_degree(int new_degree) const {
    BasisSpec out = *this;
    out.degree = new_degree;
    return out;
}

double BasisSpec::to_reference(double s) const {
    // mid + half * t form keeps [-1, 1] an exact identity
    const double half = 0.5 * (domain.hi - domain.lo);
    const double mid = 0.5 * (domain.hi + domain.lo);
    return (s - mid) / half;
}

bool operator==(const BasisSpec& a, const BasisSpec& b) {
    return a.family == b.family && a.degree == b.degree && a.domain.lo == b.domain.lo &&
           a.domain.hi == b.domain.hi;
}

void eval_basis_into(const BasisSpec& spec, double s, std::span<double> out) {
    if (!std::isfinite(s)) throw InvalidInput("basis evaluation at a non-finite point");
    const auto count = static_cast<std::size_t>(spec.size());
    if (out.size() < count) throw InvalidInput("basis output buffer too small");

    const double t = spec.to_reference(s);
    out[0] = 1.0;
    if (count == 1) return;
    out[1] = t;
    if (spec.family == BasisFamily::chebyshev) {
        for (std::size_t j = 2; j < count; ++j) out[j] = 2.0 * t * out[j - 1] - out[j - 2];
    } else {
        for (std::size_t j = 2; j < count; ++j) out[j] = t * out[j - 1];
    }
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double s) {
    spec.validate();
    Eigen::VectorXd values(spec.size());
    eval_basis_into(spec, s, {values.data(), static_cast<std::size_t>(values.size())});
    return values;
}

Eigen::VectorXd design_row(std::span<const BasisSpec> specs, const Eigen::Ref<const Eigen::VectorXd>& point,
                           int k) {
    if (static_cast<std::size_t>(point.size()) != specs.size())
        throw InvalidInput("point dimension does not match the basis list");
    if (k < 0 || static_cast<std::size_t>(k) >= specs.size())
        throw InvalidInput("dimension index " + std::to_string(k) + " out of range");
    return eval_basis(specs[static_cast<std::size_t>(k)], point(k));
}

Eigen::MatrixXd basis_matrix(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& samples) {
    spec.validate();
    const Eigen::Index n = samples.size();
    // row-major scratch so each row is contiguous for eval_basis_into
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, spec.size());
    for (Eigen::Index i = 0; i < n; ++i)
        eval_basis_into(spec, samples(i), {rows.row(i).data(), static_cast<std::size_t>(spec.size())});
    return rows;
}

}  // namespace spgd
