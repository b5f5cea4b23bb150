// SPDX-License-Identifier: Apache-2.0
//
// spgd: fit, predict, benchmark, anova and sindy subcommands.
// Exit codes: 0 ok, 1 usage or I/O error, 2 fit failure, 3 acceptance failure.

#include "spgd/anova.hpp"
#include "spgd/benchmarks.hpp"
#include "spgd/error.hpp"
#include "spgd/fit.hpp"
#include "spgd/io.hpp"
#include "spgd/metrics.hpp"
#include "spgd/sampling.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace spgd;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFitFailure = 2;
constexpr int kAcceptance = 3;

/// Flag values of a subcommand merged with an optional key = value file.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    void add(const std::string& name, const std::string& help, std::string fallback = {}) {
        values_[name] = std::move(fallback);
        app_->add_option("--" + name, values_[name], help);
    }

    /// File values fill in flags that were not given on the command line.
    void merge_file(const std::string& path) {
        std::set<std::string> keys;
        for (const auto& [k, v] : values_) keys.insert(k);
        for (const auto& [k, v] : read_config(path, keys))
            if (app_->count("--" + k) == 0) values_[k] = v;
    }

    const std::string& get(const std::string& name) const { return values_.at(name); }
    bool has(const std::string& name) const { return !values_.at(name).empty(); }

    int integer(const std::string& name) const {
        const auto v = parse_int_list(get(name));
        if (v.size() != 1) throw InvalidInput("--" + name + " expects one integer");
        return v.front();
    }
    double number(const std::string& name) const {
        const auto v = parse_double_list(get(name));
        if (v.size() != 1) throw InvalidInput("--" + name + " expects one number");
        return v.front();
    }

private:
    CLI::App* app_;
    std::map<std::string, std::string> values_;
};

std::vector<int> zero_based(const std::vector<int>& dims, int d, const std::string& what) {
    std::vector<int> out;
    for (int k : dims) {
        if (k < 1 || k > d) throw InvalidInput(what + " " + std::to_string(k) + " outside 1.." + std::to_string(d));
        out.push_back(k - 1);
    }
    return out;
}

FitConfig fit_config(const Options& o, int d) {
    FitConfig c;
    c.method = fit_method_from_string(o.get("method"));
    c.family = basis_family_from_string(o.get("family"));
    c.mas.initial_degree = o.integer("degree-init");
    c.mas.max_degree = o.integer("degree-max");
    c.max_modes = o.integer("max-modes");
    c.patience_modes = o.integer("patience");
    c.seed = static_cast<std::uint64_t>(o.integer("seed"));
    if (o.has("lambda-grid")) c.lambda_grid = parse_grid(o.get("lambda-grid"));
    if (o.has("alpha")) c.alphas = o.get("alpha").find(':') != std::string::npos ? parse_grid(o.get("alpha"))
                                                                                  : parse_double_list(o.get("alpha"));
    if (o.has("select")) c.selection = SelectionPolicy::parse(o.get("select"));
    if (o.get("accept") == "training") {
        c.accept = AcceptRule::training;
    } else if (o.get("accept") != "held-out") {
        throw InvalidInput("--accept must be held-out or training");
    }
    c.sparse_degree = o.integer("sparse-degree");
    if (c.method == FitMethod::s2pgd) {
        if (!o.has("sparse-dims") || o.get("sparse-dims") == "auto") {
            c.sparse_auto = true;
        } else {
            c.sparse_dims = zero_based(parse_int_list(o.get("sparse-dims")), d, "sparse dimension");
        }
    }
    if (o.has("chi-lim")) {
        c.chi_lim = parse_int_list(o.get("chi-lim"));
        if (c.chi_lim.size() == 1) c.chi_lim.assign(static_cast<std::size_t>(d), c.chi_lim.front());
    }
    return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_fit(const Options& o) {
    if (!o.has("data")) throw InvalidInput("--data is required");
    const Dataset data = read_dataset(o.get("data"));
    const FitConfig config = fit_config(o, data.dims());
    const FitResult result = fit_auto(data, config);
    print_warnings(result.report.warnings);
    if (o.has("out")) write_json(o.get("out"), to_json(result.model));
    if (o.has("report")) write_json(o.get("report"), to_json(result.report));
    std::cout << "method " << result.report.method << ", rank " << result.model.rank() << ", training error "
              << result.report.train_error;
    if (result.report.penalized_dim) std::cout << ", penalized dimension " << *result.report.penalized_dim + 1;
    std::cout << '\n';
    return result.report.failed ? kFitFailure : kOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path) {
    const nlohmann::json j = read_json(model_path);
    const bool is_anova = j.contains("f0");
    const SeparatedModel pgd = is_anova ? SeparatedModel{} : model_from_json(j);
    const AnovaModel anova = is_anova ? anova_model_from_json(j) : AnovaModel{};
    const int d = is_anova ? anova.dims() : pgd.dims();

    CsvTable table = read_csv(data_path);
    if (table.header.empty())
        for (int k = 0; k < d; ++k) table.header.push_back("s" + std::to_string(k + 1));
    const int target = table.column("f");
    const int inputs = static_cast<int>(table.header.size()) - (target >= 0 ? 1 : 0);
    if (inputs != d)
        throw IoError("model has " + std::to_string(d) + " dimensions, data has " + std::to_string(inputs) +
                      " input columns");
    Eigen::MatrixXd points(table.rows.rows(), d);
    for (int k = 0; k < d; ++k) {
        const int col = table.column("s" + std::to_string(k + 1));
        if (col < 0) throw IoError("data is missing column s" + std::to_string(k + 1));
        points.col(k) = table.rows.col(col);
    }
    const Eigen::VectorXd pred = is_anova ? anova.evaluate_batch(points) : pgd.evaluate_batch(points);
    if (!out_path.empty()) write_predictions(out_path, table, pred);
    if (target >= 0 && table.rows.rows() > 0)
        std::cout << "relative error " << relative_l2_error(table.rows.col(target), pred) << '\n';
    return kOk;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (int s : parse_int_list(text)) {
        if (s < 0) throw InvalidInput("seeds must be non-negative");
        out.push_back(static_cast<std::uint64_t>(s));
    }
    return out;
}

int cmd_benchmark(const std::string& name, const std::string& seeds_text, const std::string& out,
                  const std::string& plots) {
    std::vector<CaseId> ids;
    if (name == "all") {
        ids = all_cases();
    } else {
        try {
            ids.push_back(case_id_from_string(name));
        } catch (const InvalidInput&) {
            throw InvalidInput("unknown case '" + name + "'; valid: all, " + valid_case_names());
        }
    }
    CaseOverrides overrides;
    if (!plots.empty()) overrides.plot_dir = plots;
    bool all_pass = true;
    nlohmann::json reports = nlohmann::json::array();
    for (CaseId id : ids) {
        const auto seeds = seeds_text.empty() ? default_seeds(id) : parse_seeds(seeds_text);
        const CaseReport report = run_case(id, seeds, overrides);
        std::cout << to_string(id) << ": " << (report.pass ? "PASS" : "FAIL") << " (baseline "
                  << report.baseline_median << ", candidate " << report.candidate_median << ", reduction "
                  << report.reduction_pct << "%, " << report.seconds << " s)\n";
        for (const auto& c : report.checks) std::cout << "  " << c << '\n';
        for (const auto& o : report.outcomes)
            if (!o.ok) std::cout << "  seed " << o.seed << " failed: " << o.error << '\n';
        all_pass = all_pass && report.pass;
        reports.push_back(to_json(report));
    }
    if (!out.empty()) write_json(out, ids.size() == 1 ? reports.front() : nlohmann::json{{"cases", reports}, {"pass", all_pass}});
    return all_pass ? kOk : kAcceptance;
}

int cmd_anova(const Options& o) {
    const bool use_case = o.has("case");
    if (use_case == o.has("data")) throw InvalidInput("give exactly one of --data or --case");
    AnovaConfig config;
    if (o.get("coupling") == "pgd") {
        config.coupling = CouplingKind::pgd;
    } else if (o.get("coupling") != "poly") {
        throw InvalidInput("--coupling must be poly or pgd");
    }
    if (o.get("univariate") == "poly") {
        config.univariate = UnivariateKind::polynomial;
    } else if (o.get("univariate") != "spline") {
        throw InvalidInput("--univariate must be spline or poly");
    }
    const auto seed = static_cast<std::uint64_t>(o.integer("seed"));
    config.pgd.seed = seed;

    Box box;
    std::optional<CaseId> id;
    Dataset data;
    if (use_case) {
        id = case_id_from_string(o.get("case"));
        box = case_domain(*id);
    } else {
        data = read_dataset(o.get("data"));
        box = data.domain;
    }
    const int d = static_cast<int>(box.size());
    Eigen::VectorXd anchor = box_center(box);
    if (o.get("anchor") != "center") {
        const auto values = parse_double_list(o.get("anchor"));
        if (static_cast<int>(values.size()) != d) throw InvalidInput("--anchor needs " + std::to_string(d) + " values");
        anchor = Eigen::Map<const Eigen::VectorXd>(values.data(), d);
    }
    if (!box_contains(box, anchor)) throw DomainError("anchor lies outside the domain box");

    AnovaModel model;
    if (id) {
        std::vector<int> counts = parse_int_list(o.get("cross-counts"));
        if (counts.size() == 1) counts.assign(static_cast<std::size_t>(d), counts.front());
        CrossPlanOptions options;
        options.coupling_points = o.integer("coupling-points");
        const CrossPlan plan = cross_plan(anchor, counts, box, seed, options);
        const CaseId cid = *id;
        model = fit_anova_pgd([cid](const Eigen::VectorXd& p) { return eval_case_function(cid, p); }, plan, config);
        const SamplePlan grid = full_grid(60, box);
        Eigen::VectorXd truth(grid.points.rows());
        for (Eigen::Index r = 0; r < grid.points.rows(); ++r) truth(r) = eval_case_function(cid, grid.points.row(r).transpose());
        std::cout << "samples " << plan.all_points().rows() << ", test error "
                  << relative_l2_error(truth, model.evaluate_batch(grid.points)) << '\n';
    } else {
        model = fit_anova_pgd(data, anchor, config);
        std::cout << "samples " << data.size() << ", f0 " << model.f0 << '\n';
    }
    if (o.has("sobol")) {
        const SobolResult s = sobol_indices(model.terms(), box, o.integer("sobol"), seed);
        if (s.zero_variance) model.warnings.push_back("zero total variance; Sobol indices undefined");
        model.sobol = s.indices;
        const auto terms = model.terms();
        for (std::size_t t = 0; t < terms.size() && t < s.indices.size(); ++t) {
            std::cout << "S_";
            for (int k : terms[t].dims) std::cout << k + 1;
            std::cout << " = " << s.indices[t] << '\n';
        }
    }
    print_warnings(model.warnings);
    if (o.has("out")) write_json(o.get("out"), to_json(model));
    return kOk;
}

int cmd_sindy(const Options& o) {
    if (o.get("system") != "lorenz") throw InvalidInput("only --system lorenz is available");
    LorenzConfig config;
    config.samples = o.integer("samples");
    config.split = o.number("split");
    config.stls_threshold = o.number("stls-threshold");
    config.seed = static_cast<std::uint64_t>(o.integer("seed"));
    if (config.samples < 2) throw InvalidInput("--samples must be at least 2");
    if (!(config.split > 0.0 && config.split < 1.0)) throw InvalidInput("--split must lie in (0, 1)");
    if (!(config.stls_threshold > 0.0)) throw InvalidInput("--stls-threshold must be positive");

    const LorenzResult r = identify_lorenz(config, lorenz_fit_config(config.seed));
    print_warnings(r.warnings);

    std::ostringstream table;
    table.precision(10);
    table << "term,dx_pre,dy_pre,dz_pre,dx_post,dy_post,dz_post\n";
    for (int t = 0; t < 8; ++t) {
        table << (multilinear_names()[t].empty() ? "1" : multilinear_names()[t]);
        for (const auto* set : {&r.pre_stls, &r.post_stls})
            for (int c = 0; c < 3; ++c) table << ',' << (*set)[static_cast<std::size_t>(c)](t);
        table << '\n';
    }
    std::cout << table.str() << "error before STLS " << r.pre_error << ", after " << r.post_error
              << ", trajectory error over t <= 1: " << r.shadow_error << '\n';

    if (o.has("out")) {
        const std::filesystem::path dir(o.get("out"));
        std::filesystem::create_directories(dir);
        write_text((dir / "coefficients.csv").string(), table.str());
        std::ofstream traj(dir / "trajectory.csv");
        if (!traj) throw IoError("cannot write " + (dir / "trajectory.csv").string());
        traj.precision(12);
        traj << "t,x,y,z,x_id,y_id,z_id\n";
        const auto n = std::min(r.truth.states.rows(), r.identified.states.rows());
        for (Eigen::Index i = 0; i < n; i += 10) {
            traj << r.truth.t[static_cast<std::size_t>(i)];
            for (int k = 0; k < 3; ++k) traj << ',' << r.truth.states(i, k);
            for (int k = 0; k < 3; ++k) traj << ',' << r.identified.states(i, k);
            traj << '\n';
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse PGD regression: s-PGD, rs-PGD, s2-PGD and ANOVA-PGD"};
    app.require_subcommand(1);

    auto* fit_cmd = app.add_subcommand("fit", "Fit a separated model to a CSV dataset (header s1..sd,f)");
    Options fit_opts(fit_cmd);
    fit_opts.add("data", "Training CSV");
    fit_opts.add("method", "spgd, rspgd or s2pgd", "spgd");
    fit_opts.add("family", "chebyshev or monomial", "chebyshev");
    fit_opts.add("degree-init", "Initial MAS degree", "1");
    fit_opts.add("degree-max", "Maximum MAS degree", "4");
    fit_opts.add("sparse-degree", "Basis degree on penalized dimensions (s2pgd)", "8");
    fit_opts.add("alpha", "Elastic-net mixing value(s): F, list or log:lo:hi:n");
    fit_opts.add("lambda-grid", "Penalty ratios: log:lo:hi:n or v1,v2,...");
    fit_opts.add("select", "cv:K, split:R or one-se:K");
    fit_opts.add("accept", "Mode acceptance: held-out or training", "held-out");
    fit_opts.add("sparse-dims", "Penalized dimensions (1-based list) or auto");
    fit_opts.add("chi-lim", "Non-zero cap per dimension (one value or a list)");
    fit_opts.add("max-modes", "Maximum number of modes", "20");
    fit_opts.add("patience", "Rejected enrichments at top degree before stopping", "2");
    fit_opts.add("seed", "Random seed", "0");
    fit_opts.add("out", "Model JSON output");
    fit_opts.add("report", "Report JSON output");
    std::string fit_config_path;
    fit_cmd->add_option("--config", fit_config_path, "key = value file; flags override it");

    auto* predict_cmd = app.add_subcommand("predict", "Evaluate a model JSON on a CSV");
    std::string model_path;
    std::string data_path;
    std::string pred_out;
    predict_cmd->add_option("--model", model_path, "Model JSON (separated or ANOVA)")->required();
    predict_cmd->add_option("--data", data_path, "Input CSV")->required();
    predict_cmd->add_option("--out", pred_out, "Prediction CSV");

    auto* bench_cmd = app.add_subcommand("benchmark", "Run a benchmark case against its pass conditions");
    std::string case_name;
    std::string seeds;
    std::string bench_out;
    std::string plots;
    bench_cmd->add_option("--case", case_name, "Case id or all")->required();
    bench_cmd->add_option("--seeds", seeds, "Seed list, e.g. 1..5");
    bench_cmd->add_option("--out", bench_out, "Report JSON");
    bench_cmd->add_option("--plots", plots, "Directory for slice CSV data");

    auto* anova_cmd = app.add_subcommand("anova", "Anchored ANOVA + separated regression");
    Options anova_opts(anova_cmd);
    anova_opts.add("data", "CSV with anchor, cross and coupling samples");
    anova_opts.add("case", "Benchmark case sampled on a cross plan (anova_2d)");
    anova_opts.add("anchor", "center or a list of coordinates", "center");
    anova_opts.add("cross-counts", "Cross points per dimension (one value or a list)", "10");
    anova_opts.add("coupling-points", "Extra samples for the interaction term", "4");
    anova_opts.add("coupling", "Interaction model: poly or pgd", "poly");
    anova_opts.add("univariate", "Univariate terms: spline or poly", "spline");
    anova_opts.add("sobol", "Monte Carlo samples for Sobol indices");
    anova_opts.add("seed", "Random seed", "1");
    anova_opts.add("out", "ANOVA model JSON output");
    std::string anova_config_path;
    anova_cmd->add_option("--config", anova_config_path, "key = value file; flags override it");

    auto* sindy_cmd = app.add_subcommand("sindy", "Identify the Lorenz system from sampled derivatives");
    Options sindy_opts(sindy_cmd);
    sindy_opts.add("system", "Dynamical system", "lorenz");
    sindy_opts.add("samples", "Samples drawn from the trajectory", "102");
    sindy_opts.add("split", "Construction fraction", "0.8");
    sindy_opts.add("stls-threshold", "STLS threshold", "0.1");
    sindy_opts.add("seed", "Random seed", "1");
    sindy_opts.add("out", "Output directory");
    std::string sindy_config_path;
    sindy_cmd->add_option("--config", sindy_config_path, "key = value file; flags override it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (fit_cmd->parsed()) {
            if (!fit_config_path.empty()) fit_opts.merge_file(fit_config_path);
            return cmd_fit(fit_opts);
        }
        if (predict_cmd->parsed()) return cmd_predict(model_path, data_path, pred_out);
        if (bench_cmd->parsed()) return cmd_benchmark(case_name, seeds, bench_out, plots);
        if (anova_cmd->parsed()) {
            if (!anova_config_path.empty()) anova_opts.merge_file(anova_config_path);
            return cmd_anova(anova_opts);
        }
        if (sindy_cmd->parsed()) {
            if (!sindy_config_path.empty()) sindy_opts.merge_file(sindy_config_path);
            return cmd_sindy(sindy_opts);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
