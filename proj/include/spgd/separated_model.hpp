// SPDX-License-Identifier: Apache-2.0
//
// Rank-M separated representation: f(s) ~ sum_m prod_k N_m^k(s^k)^T a_m^k.
#pragma once

#include "spgd/basis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace spgd {

/// One rank-one term. coeffs[k] has degrees[k] + 1 entries.
struct Mode {
    std::vector<int> degrees;
    std::vector<Eigen::VectorXd> coeffs;

    int dims() const { return static_cast<int>(coeffs.size()); }

    /// All-ones factors of the given degrees.
    static Mode ones(const std::vector<int>& degrees);
    static Mode zeros(const std::vector<int>& degrees);

    bool is_zero() const;
};

struct ModelMeta {
    std::string method = "none";
    std::uint64_t seed = 0;
};

class SeparatedModel {
public:
    SeparatedModel() = default;

    /// `specs` fix family and domain per dimension; each mode carries its own degrees.
    explicit SeparatedModel(std::vector<BasisSpec> specs, ModelMeta meta = {});

    int dims() const { return static_cast<int>(specs_.size()); }
    int rank() const { return static_cast<int>(modes_.size()); }

    const std::vector<BasisSpec>& specs() const { return specs_; }
    const std::vector<Mode>& modes() const { return modes_; }
    const Mode& mode(int m) const;
    const ModelMeta& meta() const { return meta_; }
    ModelMeta& meta() { return meta_; }

    /// Basis of dimension k at the degree used by `mode`.
    BasisSpec mode_basis(const Mode& mode, int k) const { return specs_[k].with_degree(mode.degrees[k]); }

    /// Throws InvalidInput unless `mode` has d factors of finite coefficients matching its degrees.
    void check_mode(const Mode& mode) const;

    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& point) const;
    Eigen::VectorXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

    /// Value of one rank-one term at each row of `points`.
    Eigen::VectorXd evaluate_mode(const Mode& mode, const Eigen::Ref<const Eigen::MatrixXd>& points) const;

    void push_mode(Mode mode);
    /// Copy with `mode` appended.
    SeparatedModel with_mode(Mode mode) const;

    /// Model holding only modes [first, last).
    SeparatedModel slice(int first, int last) const;

    /// Per-point prod_{j != skip} N_m^j(s^j)^T a_m^j for the stored mode m.
    Eigen::VectorXd partial_products(const Eigen::Ref<const Eigen::MatrixXd>& points, int m, int skip) const;
    /// Same, for a mode that is not (yet) part of the model.
    Eigen::VectorXd partial_products(const Mode& mode, const Eigen::Ref<const Eigen::MatrixXd>& points,
                                     int skip) const;

private:
    void check_points(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

    std::vector<BasisSpec> specs_;
    std::vector<Mode> modes_;
    ModelMeta meta_;
};

}  // namespace spgd
