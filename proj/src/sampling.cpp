// SPDX-License-Identifier: Apache-2.0
#include "spgd/sampling.hpp"

#include "spgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace spgd {
namespace {

// Node J of the level-l rule, -cos(J pi / 2^l), written as a sine so that
// symmetric nodes are exact negatives and nodes of coarser levels are bit-identical.
double cc_node(long index, long count) {
    if (count == 0) return 0.0;
    return std::sin((std::numbers::pi * static_cast<double>(2 * index - count)) / static_cast<double>(2 * count));
}

double map_from_reference(const Interval& interval, double t) {
    return interval.center() + 0.5 * interval.width() * t;
}

void enumerate_levels(int d, int budget, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == d) {
        out.push_back(current);
        return;
    }
    for (int l = 0; l <= budget; ++l) {
        current.push_back(l);
        enumerate_levels(d, budget - l, current, out);
        current.pop_back();
    }
}

}  // namespace

void validate_box(const Box& box) {
    if (box.empty()) throw InvalidInput("empty domain box");
    for (const auto& interval : box)
        if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) || !(interval.lo < interval.hi))
            throw InvalidInput("domain box intervals need finite lo < hi");
}

bool box_contains(const Box& box, const Eigen::Ref<const Eigen::VectorXd>& point) {
    if (static_cast<std::size_t>(point.size()) != box.size()) return false;
    for (std::size_t k = 0; k < box.size(); ++k)
        if (!box[k].contains(point(static_cast<Eigen::Index>(k)))) return false;
    return true;
}

Eigen::VectorXd box_center(const Box& box) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(box.size()));
    for (std::size_t k = 0; k < box.size(); ++k) c(static_cast<Eigen::Index>(k)) = box[k].center();
    return c;
}

SamplePlan lhs(int n, int d, const Box& box, std::uint64_t seed) {
    if (n < 1) throw InvalidInput("LHS needs n >= 1");
    if (d < 1 || static_cast<std::size_t>(d) != box.size()) throw InvalidInput("LHS dimension does not match box");
    validate_box(box);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SamplePlan plan{PlanKind::lhs, Eigen::MatrixXd(n, d), box, seed, 0};
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int k = 0; k < d; ++k) {
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        const auto& interval = box[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) {
            // u in [stratum / n, (stratum + 1) / n)
            const double u = (strata[static_cast<std::size_t>(i)] + unit(rng)) / n;
            plan.points(i, k) = std::min(interval.lo + u * interval.width(), interval.hi);
        }
    }
    return plan;
}

std::vector<double> clenshaw_curtis_nodes(int level) {
    if (level < 0) throw InvalidInput("Clenshaw-Curtis level must be non-negative");
    if (level == 0) return {0.0};
    const long count = 1L << level;
    std::vector<double> nodes(static_cast<std::size_t>(count + 1));
    for (long j = 0; j <= count; ++j) nodes[static_cast<std::size_t>(j)] = cc_node(j, count);
    return nodes;
}

SamplePlan smolyak_grid(int d, int level, const Box& box) {
    if (d < 1 || static_cast<std::size_t>(d) != box.size()) throw InvalidInput("Smolyak dimension does not match box");
    if (level < 0) throw InvalidInput("Smolyak level must be non-negative");
    validate_box(box);

    // Points are identified by integer indices on the finest rule (2^level + 1 nodes),
    // which makes deduplication exact.
    const long finest = level == 0 ? 0 : (1L << level);
    std::vector<std::vector<int>> multi_indices;
    std::vector<int> scratch;
    enumerate_levels(d, level, scratch, multi_indices);

    std::set<std::vector<long>> unique;
    for (const auto& levels : multi_indices) {
        std::vector<std::vector<long>> axes(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            const int l = levels[static_cast<std::size_t>(k)];
            if (l == 0) {
                axes[k] = {finest / 2};
            } else {
                const long stride = 1L << (level - l);
                for (long j = 0; j <= (1L << l); ++j) axes[k].push_back(j * stride);
            }
        }
        std::vector<std::size_t> cursor(static_cast<std::size_t>(d), 0);
        while (true) {
            std::vector<long> idx(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) idx[k] = axes[k][cursor[k]];
            unique.insert(std::move(idx));
            int k = d - 1;
            while (k >= 0 && ++cursor[k] == axes[k].size()) cursor[k--] = 0;
            if (k < 0) break;
        }
    }

    SamplePlan plan{PlanKind::smolyak, Eigen::MatrixXd(static_cast<Eigen::Index>(unique.size()), d), box, 0, level};
    Eigen::Index row = 0;
    for (const auto& idx : unique) {
        for (int k = 0; k < d; ++k)
            plan.points(row, k) = map_from_reference(box[static_cast<std::size_t>(k)], cc_node(idx[k], finest));
        ++row;
    }
    return plan;
}

SamplePlan full_grid(int per_dim, const Box& box) {
    if (per_dim < 2) throw InvalidInput("full grid needs at least 2 points per dimension");
    validate_box(box);
    const int d = static_cast<int>(box.size());
    Eigen::Index total = 1;
    for (int k = 0; k < d; ++k) total *= per_dim;
    SamplePlan plan{PlanKind::full_grid, Eigen::MatrixXd(total, d), box, 0, 0};
    std::vector<int> cursor(static_cast<std::size_t>(d), 0);
    for (Eigen::Index row = 0; row < total; ++row) {
        for (int k = 0; k < d; ++k) {
            const auto& interval = box[static_cast<std::size_t>(k)];
            plan.points(row, k) = interval.lo + interval.width() * cursor[k] / (per_dim - 1);
        }
        int k = d - 1;
        while (k >= 0 && ++cursor[k] == per_dim) cursor[k--] = 0;
    }
    return plan;
}

Eigen::MatrixXd CrossPlan::cross_points() const {
    Eigen::Index total = 1;
    for (const auto& arm : coords) total += static_cast<Eigen::Index>(arm.size());
    Eigen::MatrixXd points(total, dims());
    points.row(0) = anchor.transpose();
    Eigen::Index row = 1;
    for (int i = 0; i < dims(); ++i) {
        for (double value : coords[static_cast<std::size_t>(i)]) {
            points.row(row) = anchor.transpose();
            points(row, i) = value;
            ++row;
        }
    }
    return points;
}

Eigen::MatrixXd CrossPlan::all_points() const {
    const Eigen::MatrixXd cross = cross_points();
    Eigen::MatrixXd points(cross.rows() + coupling.rows(), dims());
    points << cross, coupling;
    return points;
}

CrossPlan cross_plan(const Eigen::Ref<const Eigen::VectorXd>& anchor, const std::vector<int>& counts, const Box& box,
                     std::uint64_t seed, const CrossPlanOptions& options) {
    validate_box(box);
    const int d = static_cast<int>(box.size());
    if (anchor.size() != d || static_cast<int>(counts.size()) != d)
        throw InvalidInput("anchor and per-dimension counts must match the box dimension");
    if (!box_contains(box, anchor)) throw DomainError("anchor lies outside the domain box");
    if (options.coupling_points < 0) throw InvalidInput("negative coupling point count");

    CrossPlan plan;
    plan.anchor = anchor;
    plan.box = box;
    plan.coords.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const int count = counts[static_cast<std::size_t>(i)];
        if (count < 0) throw InvalidInput("negative cross count");
        if (count == 0) continue;
        const auto& interval = box[static_cast<std::size_t>(i)];
        // count + 1 equispaced knots; the one nearest the anchor becomes the anchor itself
        std::vector<double> knots(static_cast<std::size_t>(count + 1));
        for (int j = 0; j <= count; ++j) knots[j] = interval.lo + interval.width() * j / count;
        std::size_t nearest = 0;
        for (std::size_t j = 1; j < knots.size(); ++j)
            if (std::abs(knots[j] - anchor(i)) < std::abs(knots[nearest] - anchor(i))) nearest = j;
        knots.erase(knots.begin() + static_cast<std::ptrdiff_t>(nearest));
        plan.coords[i] = std::move(knots);
    }

    plan.coupling.resize(options.coupling_points, d);
    if (options.coupling_points > 0) {
        Box unit(static_cast<std::size_t>(d), Interval{0.0, 1.0});
        const SamplePlan raw = lhs(options.coupling_points, d, unit, seed);
        for (Eigen::Index r = 0; r < raw.points.rows(); ++r) {
            for (int k = 0; k < d; ++k) {
                double u = raw.points(r, k);
                if (options.push_to_boundary) u = 0.5 * (1.0 - std::cos(std::numbers::pi * u));
                const auto& interval = box[static_cast<std::size_t>(k)];
                plan.coupling(r, k) = interval.lo + u * interval.width();
            }
        }
    }
    return plan;
}

}  // namespace spgd
