// SPDX-License-Identifier: Apache-2.0
#include "spgd/selection.hpp"

#include "spgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace spgd {
namespace {

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidInput("not a number: '" + text + "'");
    }
    if (used != text.size()) throw InvalidInput("not a number: '" + text + "'");
    return value;
}

int parse_int(const std::string& text) {
    const double value = parse_double(text);
    if (value != std::floor(value)) throw InvalidInput("not an integer: '" + text + "'");
    return static_cast<int>(value);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

}  // namespace

void SelectionPolicy::validate() const {
    if (kind == SelectionKind::split) {
        if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("split ratio must lie in (0, 1)");
    } else if (folds < 2) {
        throw InvalidInput("k-fold selection needs k >= 2");
    }
}

SelectionPolicy SelectionPolicy::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InvalidInput("selection policy must look like cv:K, split:R or one-se:K");
    const std::string name = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    SelectionPolicy policy;
    if (name == "cv") {
        policy.kind = SelectionKind::kfold;
        policy.folds = parse_int(arg);
    } else if (name == "one-se") {
        policy.kind = SelectionKind::one_se_kfold;
        policy.folds = parse_int(arg);
    } else if (name == "split") {
        policy.kind = SelectionKind::split;
        policy.ratio = parse_double(arg);
    } else {
        throw InvalidInput("unknown selection policy '" + name + "'");
    }
    policy.validate();
    return policy;
}

std::string SelectionPolicy::to_string() const {
    std::ostringstream out;
    switch (kind) {
        case SelectionKind::kfold: out << "cv:" << folds; break;
        case SelectionKind::one_se_kfold: out << "one-se:" << folds; break;
        case SelectionKind::split: out << "split:" << ratio; break;
    }
    return out.str();
}

std::vector<Fold> make_folds(int n, const SelectionPolicy& policy, std::uint64_t seed) {
    policy.validate();
    if (n < 2) throw InvalidInput("held-out selection needs at least 2 samples");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Fold> folds;
    if (policy.kind == SelectionKind::split) {
        int n_train = static_cast<int>(std::lround(policy.ratio * n));
        n_train = std::clamp(n_train, 1, n - 1);
        Fold fold;
        fold.train.assign(order.begin(), order.begin() + n_train);
        fold.test.assign(order.begin() + n_train, order.end());
        std::sort(fold.train.begin(), fold.train.end());
        std::sort(fold.test.begin(), fold.test.end());
        folds.push_back(std::move(fold));
        return folds;
    }

    const int k = std::min(policy.folds, n);
    for (int f = 0; f < k; ++f) {
        Fold fold;
        for (int i = 0; i < n; ++i) (i % k == f ? fold.test : fold.train).push_back(order[static_cast<std::size_t>(i)]);
        std::sort(fold.train.begin(), fold.train.end());
        std::sort(fold.test.begin(), fold.test.end());
        folds.push_back(std::move(fold));
    }
    return folds;
}

std::vector<ScoreEntry> score_candidates(const Eigen::Ref<const Eigen::VectorXd>& targets,
                                         const CandidatePredictor& predictor, const std::vector<Candidate>& candidates,
                                         const std::vector<Fold>& folds) {
    std::vector<ScoreEntry> table;
    table.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        ScoreEntry entry{candidate.lambda, candidate.alpha};
        std::vector<double> fold_mse;
        for (const auto& fold : folds) {
            const Eigen::VectorXd predicted = predictor(fold.train, fold.test, candidate);
            double sse = 0.0;
            for (std::size_t i = 0; i < fold.test.size(); ++i) {
                const double diff = targets(fold.test[i]) - predicted(static_cast<Eigen::Index>(i));
                sse += diff * diff;
            }
            if (!std::isfinite(sse)) sse = std::numeric_limits<double>::infinity();
            entry.total_sse += sse;
            fold_mse.push_back(sse / static_cast<double>(fold.test.size()));
        }
        const double k = static_cast<double>(fold_mse.size());
        entry.mean_error = std::accumulate(fold_mse.begin(), fold_mse.end(), 0.0) / k;
        if (fold_mse.size() > 1) {
            double var = 0.0;
            for (double e : fold_mse) var += (e - entry.mean_error) * (e - entry.mean_error);
            var /= (k - 1.0);
            entry.std_error = std::sqrt(var / k);
        }
        table.push_back(entry);
    }
    return table;
}

std::size_t pick_best(const std::vector<ScoreEntry>& table, SelectionKind kind) {
    if (table.empty()) throw InvalidInput("empty score table");
    const bool any_eligible = std::any_of(table.begin(), table.end(), [](const ScoreEntry& e) { return e.eligible; });
    auto usable = [&](const ScoreEntry& e) { return e.eligible || !any_eligible; };

    std::size_t best = table.size();
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!usable(table[i])) continue;
        const double key = kind == SelectionKind::one_se_kfold ? table[i].mean_error : table[i].total_sse;
        const double best_key = best == table.size() ? std::numeric_limits<double>::infinity()
                                : kind == SelectionKind::one_se_kfold ? table[best].mean_error
                                                                      : table[best].total_sse;
        if (best == table.size() || key < best_key) best = i;
    }
    if (kind != SelectionKind::one_se_kfold) return best;

    const double limit = table[best].mean_error + table[best].std_error;
    std::size_t chosen = best;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!usable(table[i]) || table[i].mean_error > limit) continue;
        if (table[i].lambda > table[chosen].lambda) chosen = i;
    }
    return chosen;
}

std::vector<Candidate> make_candidates(const std::vector<double>& lambdas, const std::vector<double>& alphas) {
    std::vector<Candidate> out;
    for (double alpha : alphas)
        for (double lambda : lambdas) out.push_back({lambda, alpha});
    return out;
}

SelectionResult select_lambda(const Eigen::Ref<const Eigen::VectorXd>& targets, const CandidatePredictor& predictor,
                              const std::vector<double>& lambda_grid, const std::vector<double>& alphas,
                              const SelectionPolicy& policy, std::uint64_t seed, const std::vector<bool>* eligible) {
    if (lambda_grid.empty() || alphas.empty()) throw InvalidInput("empty penalty grid");
    const auto candidates = make_candidates(lambda_grid, alphas);
    SelectionResult result;
    if (candidates.size() == 1) {
        result.lambda = candidates[0].lambda;
        result.alpha = candidates[0].alpha;
        result.table.push_back({result.lambda, result.alpha, std::nan(""), std::nan(""), std::nan(""), true});
        return result;
    }
    const auto folds = make_folds(static_cast<int>(targets.size()), policy, seed);
    result.table = score_candidates(targets, predictor, candidates, folds);
    if (eligible != nullptr) {
        if (eligible->size() != result.table.size()) throw InvalidInput("eligibility mask size mismatch");
        for (std::size_t i = 0; i < result.table.size(); ++i) result.table[i].eligible = (*eligible)[i];
    }
    for (const auto& fold : folds)
        for (int row : fold.test) result.baseline_sse += targets(row) * targets(row);
    result.best_index = pick_best(result.table, policy.kind);
    result.lambda = result.table[result.best_index].lambda;
    result.alpha = result.table[result.best_index].alpha;
    result.evaluated = true;
    return result;
}

std::vector<double> parse_grid(const std::string& text) {
    if (text.rfind("log:", 0) == 0) {
        const auto parts = split(text.substr(4), ':');
        if (parts.size() != 3) throw InvalidInput("log grid must look like log:lo:hi:n");
        const double lo = parse_double(parts[0]);
        const double hi = parse_double(parts[1]);
        const int n = parse_int(parts[2]);
        if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw InvalidInput("log grid needs 0 < lo <= hi and n >= 1");
        std::vector<double> grid(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double frac = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            grid[i] = std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo)));
        }
        return grid;
    }
    std::vector<double> grid;
    for (const auto& part : split(text, ',')) {
        const double value = parse_double(part);
        if (!(value >= 0.0)) throw InvalidInput("grid values must be non-negative");
        grid.push_back(value);
    }
    if (grid.empty()) throw InvalidInput("empty grid");
    return grid;
}

}  // namespace spgd
