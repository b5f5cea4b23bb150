// SPDX-License-Identifier: Apache-2.0
//
// Design-of-experiments generators.
#pragma once

#include "spgd/basis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace spgd {

using Box = std::vector<Interval>;

/// Throws InvalidInput on an empty box or an interval with lo >= hi.
void validate_box(const Box& box);
bool box_contains(const Box& box, const Eigen::Ref<const Eigen::VectorXd>& point);
Eigen::VectorXd box_center(const Box& box);

enum class PlanKind { lhs, smolyak, cross, full_grid };

struct SamplePlan {
    PlanKind kind = PlanKind::lhs;
    Eigen::MatrixXd points;  // n x d
    Box box;
    std::uint64_t seed = 0;  // lhs
    int level = 0;           // smolyak
};

/// Latin hypercube: each marginal has exactly one point per equal-width stratum.
SamplePlan lhs(int n, int d, const Box& box, std::uint64_t seed);

/// Nested Clenshaw-Curtis nodes on [-1, 1], ascending. Level 0 is {0}; level l has 2^l + 1 nodes.
std::vector<double> clenshaw_curtis_nodes(int level);

/// Isotropic Smolyak grid: union of CC tensor grids with |l|_1 <= level, deduplicated,
/// lexicographically ordered, mapped to `box`.
SamplePlan smolyak_grid(int d, int level, const Box& box);

/// Tensor grid with `per_dim` equispaced points per dimension including the faces.
SamplePlan full_grid(int per_dim, const Box& box);

/// Samples on a cross centred at the anchor plus optional coupling samples.
struct CrossPlan {
    Eigen::VectorXd anchor;
    /// coords[i]: the values taken by coordinate i along its arm, excluding the anchor coordinate.
    std::vector<std::vector<double>> coords;
    /// Extra points off the cross used to fit interactions.
    Eigen::MatrixXd coupling;
    Box box;

    int dims() const { return static_cast<int>(anchor.size()); }
    /// Anchor first, then the arm of dimension 0, dimension 1, ...
    Eigen::MatrixXd cross_points() const;
    /// cross_points() followed by the coupling samples.
    Eigen::MatrixXd all_points() const;
};

struct CrossPlanOptions {
    int coupling_points = 0;
    /// Maps LHS quantiles u -> (1 - cos(pi u)) / 2 so coupling samples crowd the faces.
    bool push_to_boundary = true;
};

/// Arm i holds counts[i] equispaced points on [lo_i, hi_i]; the anchor coordinate is
/// always one of the knots, and never repeated on the arm.
CrossPlan cross_plan(const Eigen::Ref<const Eigen::VectorXd>& anchor, const std::vector<int>& counts, const Box& box,
                     std::uint64_t seed, const CrossPlanOptions& options = {});

}  // namespace spgd
