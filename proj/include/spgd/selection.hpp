// SPDX-License-Identifier: Apache-2.0
//
// Held-out scoring of penalty candidates: k-fold, one-standard-error k-fold, split.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spgd {

enum class SelectionKind { kfold, split, one_se_kfold };

struct SelectionPolicy {
    SelectionKind kind = SelectionKind::kfold;
    int folds = 5;
    double ratio = 0.8;

    void validate() const;
    /// "cv:K", "split:R" or "one-se:K".
    static SelectionPolicy parse(const std::string& text);
    std::string to_string() const;
};

struct Fold {
    std::vector<int> train;
    std::vector<int> test;
};

/// Seeded shuffle of 0..n-1 split per the policy. k is reduced to n when n < k.
std::vector<Fold> make_folds(int n, const SelectionPolicy& policy, std::uint64_t seed);

struct Candidate {
    double lambda = 0.0;
    double alpha = 0.0;
};

struct ScoreEntry {
    double lambda = 0.0;
    double alpha = 0.0;
    double mean_error = 0.0;  // mean over folds of the held-out MSE
    double std_error = 0.0;   // standard error of that mean
    double total_sse = 0.0;   // held-out sum of squares over all folds
    bool eligible = true;
};

struct SelectionResult {
    double lambda = 0.0;
    double alpha = 0.0;
    std::size_t best_index = 0;
    std::vector<ScoreEntry> table;
    /// Held-out sum of squares of the all-zero prediction on the same folds.
    double baseline_sse = 0.0;
    bool evaluated = false;
};

/// Predictions at `test` rows of a model fitted on `train` rows with the given penalty.
using CandidatePredictor = std::function<Eigen::VectorXd(const std::vector<int>& train, const std::vector<int>& test,
                                                         const Candidate& candidate)>;

/// Scores every candidate on the folds against `targets`.
std::vector<ScoreEntry> score_candidates(const Eigen::Ref<const Eigen::VectorXd>& targets,
                                         const CandidatePredictor& predictor, const std::vector<Candidate>& candidates,
                                         const std::vector<Fold>& folds);

/// Index of the winner among eligible entries: minimum total SSE, or for one-SE the most
/// penalized entry whose mean error is within one standard error of the best. Ineligible
/// entries are ignored unless none is eligible.
std::size_t pick_best(const std::vector<ScoreEntry>& table, SelectionKind kind);

/// Cartesian product of penalty ratios and alphas.
std::vector<Candidate> make_candidates(const std::vector<double>& lambdas, const std::vector<double>& alphas);

/// Chooses a penalty for one fit. A single candidate is returned without evaluation.
/// `eligible`, when given, marks candidates that pass an external filter.
SelectionResult select_lambda(const Eigen::Ref<const Eigen::VectorXd>& targets, const CandidatePredictor& predictor,
                              const std::vector<double>& lambda_grid, const std::vector<double>& alphas,
                              const SelectionPolicy& policy, std::uint64_t seed,
                              const std::vector<bool>* eligible = nullptr);

/// "log:lo:hi:n" (geometric, inclusive) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& text);

}  // namespace spgd
