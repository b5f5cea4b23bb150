// SPDX-License-Identifier: Apache-2.0
//
// One-dimensional approximation bases on affinely mapped intervals.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace spgd {

enum class BasisFamily { chebyshev, monomial };

std::string_view to_string(BasisFamily family);
BasisFamily basis_family_from_string(std::string_view name);

/// Closed interval [lo, hi].
struct Interval {
    double lo = -1.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double s) const { return s >= lo && s <= hi; }
};

/// A family of `degree + 1` functions on [lo, hi]. Inputs are mapped to
/// t in [-1, 1] before the family recurrence is applied.
struct BasisSpec {
    BasisFamily family = BasisFamily::chebyshev;
    int degree = 0;
    Interval domain{};

    int size() const { return degree + 1; }

    /// Throws InvalidInput when degree < 0 or the interval is empty or not finite.
    void validate() const;

    /// Same family and domain, different degree.
    BasisSpec with_degree(int new_degree) const;

    /// Affine map [lo, hi] -> [-1, 1]. Exact identity on [-1, 1].
    double to_reference(double s) const;
};

bool operator==(const BasisSpec& a, const BasisSpec& b);

/// (N_1(s), ..., N_D(s)). Points outside the domain are extrapolated, not clamped.
Eigen::VectorXd eval_basis(const BasisSpec& spec, double s);

/// Writes the basis values into `out`, which must hold spec.size() entries.
void eval_basis_into(const BasisSpec& spec, double s, std::span<double> out);

/// Basis values of dimension `k` (0-based) at `point`.
Eigen::VectorXd design_row(std::span<const BasisSpec> specs, const Eigen::Ref<const Eigen::VectorXd>& point,
                           int k);

/// Row i holds eval_basis(spec, samples[i]).
Eigen::MatrixXd basis_matrix(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& samples);

}  // namespace spgd
