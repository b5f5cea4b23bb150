// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace spgd {

/// ||z - z_pred||_2 / ||z||_2. Throws InvalidInput for a zero reference or size mismatch.
double relative_l2_error(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& z_pred);

}  // namespace spgd
