// SPDX-License-Identifier: Apache-2.0
#include "spgd/metrics.hpp"

#include "spgd/error.hpp"

namespace spgd {

double relative_l2_error(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& z_pred) {
    if (z.size() != z_pred.size()) throw InvalidInput("reference and prediction differ in length");
    const double reference = z.norm();
    if (!(reference > 0.0)) throw InvalidInput("relative error needs a non-zero reference");
    return (z - z_pred).norm() / reference;
}

}  // namespace spgd
