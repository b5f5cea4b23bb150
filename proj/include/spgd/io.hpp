// SPDX-License-Identifier: Apache-2.0
//
// File formats: dataset and prediction CSV, model / report JSON, key = value configs.
#pragma once

#include "spgd/anova.hpp"
#include "spgd/benchmarks.hpp"
#include "spgd/fit.hpp"
#include "spgd/separated_model.hpp"

#include "json.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace spgd {

/// Header plus numeric rows of a CSV file.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd rows;

    /// Column index of `name`, or -1.
    int column(const std::string& name) const;
};

/// Comma separated, mandatory header, '.' decimals. Errors carry the 1-based line number.
/// An empty file gives an empty table.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Header s1..sd,f. The domain is the bounding box of the points (widened when flat).
Dataset dataset_from_table(const CsvTable& table);
Dataset read_dataset(const std::string& path);

/// Input columns of `table` plus f_pred.
void write_predictions(const std::string& path, const CsvTable& table, const Eigen::VectorXd& predictions);

/// Bounding box of the rows; a zero-width side becomes [c - 0.5, c + 0.5].
Box bounding_box(const Eigen::Ref<const Eigen::MatrixXd>& points);

nlohmann::json to_json(const BasisSpec& spec);
BasisSpec basis_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SeparatedModel& model);
SeparatedModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitReport& report);
nlohmann::json to_json(const CaseReport& report);
nlohmann::json to_json(const AnovaModel& model);
AnovaModel anova_model_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

/// Parses "key = value" lines; '#' starts a comment. Keys outside `allowed` are rejected.
std::map<std::string, std::string> parse_config(const std::string& text, const std::set<std::string>& allowed);
std::map<std::string, std::string> read_config(const std::string& path, const std::set<std::string>& allowed);

/// "1,2,5" or "1..5" (inclusive). Throws InvalidInput on malformed text.
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace spgd
