// SPDX-License-Identifier: Apache-2.0
#include "spgd/io.hpp"

#include "spgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spgd {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

bool parse_number(const std::string& text, double& value) {
    if (text.empty()) return false;
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json box_json(const Box& box) {
    json out = json::array();
    for (const auto& iv : box) out.push_back({iv.lo, iv.hi});
    return out;
}

Box box_from_json(const json& j) {
    Box box;
    for (const auto& side : j) box.push_back(Interval{side.at(0).get<double>(), side.at(1).get<double>()});
    return box;
}

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (table.header.empty()) {
            for (const auto& f : fields) {
                double ignored = 0.0;
                if (f.empty()) throw IoError("line " + std::to_string(line_no) + ": empty column name");
                if (parse_number(f, ignored))
                    throw IoError("line " + std::to_string(line_no) + ": header expected, found number '" + f + "'");
            }
            table.header = fields;
            continue;
        }
        if (fields.size() != table.header.size())
            throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                          " fields, found " + std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            if (!parse_number(fields[c], row[c]) || !std::isfinite(row[c]))
                throw IoError("line " + std::to_string(line_no) + ": '" + fields[c] + "' is not a finite number");
        rows.push_back(std::move(row));
    }
    table.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(slurp(path)); }

Box bounding_box(const Eigen::Ref<const Eigen::MatrixXd>& points) {
    Box box(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
        double lo = points.col(k).minCoeff();
        double hi = points.col(k).maxCoeff();
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
        box[static_cast<std::size_t>(k)] = Interval{lo, hi};
    }
    return box;
}

Dataset dataset_from_table(const CsvTable& table) {
    const int target = table.column("f");
    if (target < 0) throw IoError("dataset needs an 'f' column");
    const int d = static_cast<int>(table.header.size()) - 1;
    if (d < 1) throw IoError("dataset needs at least one input column");
    for (int k = 0; k < d; ++k)
        if (table.column("s" + std::to_string(k + 1)) < 0)
            throw IoError("dataset header must be s1..s" + std::to_string(d) + ",f");
    if (table.rows.rows() == 0) throw IoError("dataset has no rows");
    Dataset data;
    data.points.resize(table.rows.rows(), d);
    for (int k = 0; k < d; ++k) data.points.col(k) = table.rows.col(table.column("s" + std::to_string(k + 1)));
    data.targets = table.rows.col(target);
    data.domain = bounding_box(data.points);
    return data;
}

Dataset read_dataset(const std::string& path) { return dataset_from_table(read_csv(path)); }

void write_predictions(const std::string& path, const CsvTable& table, const Eigen::VectorXd& predictions) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (const auto& name : table.header) out << name << ',';
    out << "f_pred\n";
    for (Eigen::Index r = 0; r < table.rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.rows.cols(); ++c) out << table.rows(r, c) << ',';
        out << predictions(r) << '\n';
    }
}

json to_json(const BasisSpec& spec) {
    return {{"family", std::string(to_string(spec.family))},
            {"degree", spec.degree},
            {"lo", spec.domain.lo},
            {"hi", spec.domain.hi}};
}

BasisSpec basis_spec_from_json(const json& j) {
    return guarded("basis spec", [&] {
        BasisSpec spec{basis_family_from_string(j.at("family").get<std::string>()), j.at("degree").get<int>(),
                       Interval{j.at("lo").get<double>(), j.at("hi").get<double>()}};
        spec.validate();
        return spec;
    });
}

json to_json(const SeparatedModel& model) {
    json specs = json::array();
    for (const auto& spec : model.specs()) specs.push_back(to_json(spec));
    json modes = json::array();
    for (const auto& mode : model.modes()) {
        json coeffs = json::array();
        for (const auto& a : mode.coeffs) coeffs.push_back(vector_json(a));
        modes.push_back({{"degrees", mode.degrees}, {"coeffs", coeffs}});
    }
    return {{"d", model.dims()},
            {"specs", specs},
            {"modes", modes},
            {"meta", {{"method", model.meta().method}, {"seed", model.meta().seed}}}};
}

SeparatedModel model_from_json(const json& j) {
    return guarded("model", [&] {
        const int d = j.at("d").get<int>();
        std::vector<BasisSpec> specs;
        for (const auto& s : j.at("specs")) specs.push_back(basis_spec_from_json(s));
        if (static_cast<int>(specs.size()) != d) throw IoError("model has d = " + std::to_string(d) + " but " +
                                                               std::to_string(specs.size()) + " specs");
        ModelMeta meta;
        if (j.contains("meta")) {
            meta.method = j.at("meta").value("method", std::string("none"));
            meta.seed = j.at("meta").value("seed", std::uint64_t{0});
        }
        SeparatedModel model(std::move(specs), meta);
        for (const auto& m : j.at("modes")) {
            Mode mode;
            mode.degrees = m.at("degrees").get<std::vector<int>>();
            for (const auto& a : m.at("coeffs")) mode.coeffs.push_back(vector_from_json(a));
            try {
                model.push_mode(std::move(mode));
            } catch (const InvalidInput& e) {
                throw IoError(std::string("model mode rejected: ") + e.what());
            }
        }
        return model;
    });
}

json to_json(const FitReport& report) {
    json modes = json::array();
    for (const auto& m : report.modes)
        modes.push_back({{"degrees", m.degrees},
                         {"fp_iterations", m.fp_iterations},
                         {"converged", m.converged},
                         {"lambda", m.lambda},
                         {"alpha", m.alpha},
                         {"selection_error", m.selection_error},
                         {"train_error", m.train_error},
                         {"supports", m.supports}});
    json scan = json::array();
    for (const auto& c : report.scan)
        scan.push_back({{"dim", c.dim + 1},
                        {"validation_error", c.validation_error},
                        {"sparse_ok", c.sparse_ok},
                        {"rank", c.rank}});
    json out = {{"method", report.method},
                {"rank", report.rank},
                {"train_error", report.train_error},
                {"error_curve", report.error_curve},
                {"modes", modes},
                {"warnings", report.warnings},
                {"failed", report.failed}};
    // Dimensions are 1-based in files.
    out["penalized_dim"] = report.penalized_dim ? json(*report.penalized_dim + 1) : json(nullptr);
    if (!scan.empty()) out["scan"] = scan;
    return out;
}

json to_json(const CaseReport& report) {
    std::vector<std::uint64_t> seeds;
    std::vector<double> base;
    std::vector<double> cand;
    json per_seed = json::array();
    for (const auto& o : report.outcomes) {
        seeds.push_back(o.seed);
        json s = {{"seed", o.seed}, {"ok", o.ok}};
        if (o.ok) {
            base.push_back(o.baseline_err);
            cand.push_back(o.candidate_err);
            s["baseline_err"] = o.baseline_err;
            s["candidate_err"] = o.candidate_err;
            s["baseline_rank"] = o.baseline_rank;
            s["candidate_rank"] = o.candidate_rank;
            if (o.penalized_dim) s["penalized_dim"] = *o.penalized_dim + 1;
        } else {
            s["error"] = o.error;
        }
        per_seed.push_back(s);
    }
    json out = {{"case", to_string(report.id)},
                {"seeds", seeds},
                {"baseline_err", base},
                {"candidate_err", cand},
                {"baseline_median", report.baseline_median},
                {"candidate_median", report.candidate_median},
                {"reduction_pct", report.reduction_pct},
                {"pass", report.pass},
                {"checks", report.checks},
                {"reference", report.reference},
                {"seconds", report.seconds},
                {"per_seed", per_seed}};
    if (report.lorenz) {
        const LorenzResult& lr = *report.lorenz;
        json comps = json::array();
        for (int c = 0; c < 3; ++c) {
            const auto i = static_cast<std::size_t>(c);
            comps.push_back({{"pre_stls", vector_json(lr.pre_stls[i])},
                             {"post_stls", vector_json(lr.post_stls[i])},
                             {"support", lr.supports[i]}});
        }
        out["lorenz"] = {{"terms", multilinear_names()},
                         {"components", comps},
                         {"pre_error", lr.pre_error},
                         {"post_error", lr.post_error},
                         {"shadow_error", lr.shadow_error},
                         {"warnings", lr.warnings}};
    }
    return out;
}

json to_json(const AnovaModel& model) {
    json uni = json::array();
    for (const auto& term : model.univariate) {
        if (const auto* spline = std::get_if<NaturalCubicSpline>(&term)) {
            uni.push_back({{"kind", "spline"}, {"knots", spline->knots()}, {"values", spline->values()}});
        } else {
            const auto& poly = std::get<UnivariatePolynomial>(term);
            uni.push_back({{"kind", "polynomial"},
                           {"basis", to_json(poly.basis)},
                           {"coeffs", vector_json(poly.coeffs)},
                           {"offset", poly.offset}});
        }
    }
    json coupling = nullptr;
    if (const auto* poly = std::get_if<AnchoredPolynomial>(&model.coupling)) {
        json terms = json::array();
        for (const auto& t : poly->terms) terms.push_back({{"dims", t.dims}, {"powers", t.powers}, {"coeff", t.coeff}});
        coupling = {{"kind", "anchored_poly"}, {"anchor", vector_json(poly->anchor)}, {"terms", terms}};
    } else if (const auto* pgd = std::get_if<SeparatedModel>(&model.coupling)) {
        coupling = {{"kind", "pgd"}, {"model", to_json(*pgd)}};
    }
    json out = {{"d", model.dims()},
                {"anchor", vector_json(model.anchor)},
                {"f0", model.f0},
                {"box", box_json(model.box)},
                {"splines", uni},
                {"coupling", coupling},
                {"warnings", model.warnings}};
    out["sobol"] = model.sobol ? json(*model.sobol) : json(nullptr);
    return out;
}

AnovaModel anova_model_from_json(const json& j) {
    return guarded("ANOVA model", [&] {
        AnovaModel model;
        model.anchor = vector_from_json(j.at("anchor"));
        model.f0 = j.at("f0").get<double>();
        model.box = box_from_json(j.at("box"));
        for (const auto& u : j.at("splines")) {
            const auto kind = u.at("kind").get<std::string>();
            if (kind == "spline") {
                model.univariate.emplace_back(NaturalCubicSpline(u.at("knots").get<std::vector<double>>(),
                                                                 u.at("values").get<std::vector<double>>()));
            } else if (kind == "polynomial") {
                model.univariate.emplace_back(UnivariatePolynomial{
                    basis_spec_from_json(u.at("basis")), vector_from_json(u.at("coeffs")), u.at("offset").get<double>()});
            } else {
                throw IoError("unknown univariate kind '" + kind + "'");
            }
        }
        const json& c = j.at("coupling");
        if (!c.is_null()) {
            const auto kind = c.at("kind").get<std::string>();
            if (kind == "anchored_poly") {
                AnchoredPolynomial poly;
                poly.anchor = vector_from_json(c.at("anchor"));
                for (const auto& t : c.at("terms"))
                    poly.terms.push_back({t.at("dims").get<std::vector<int>>(), t.at("powers").get<std::vector<int>>(),
                                          t.at("coeff").get<double>()});
                model.coupling = std::move(poly);
            } else if (kind == "pgd") {
                model.coupling = model_from_json(c.at("model"));
            } else {
                throw IoError("unknown coupling kind '" + kind + "'");
            }
        }
        if (j.contains("sobol") && !j.at("sobol").is_null()) model.sobol = j.at("sobol").get<std::vector<double>>();
        if (static_cast<int>(model.univariate.size()) != model.dims() ||
            static_cast<int>(model.box.size()) != model.dims())
            throw IoError("ANOVA model sizes do not match its anchor");
        return model;
    });
}

json read_json(const std::string& path) {
    const std::string text = slurp(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::map<std::string, std::string> parse_config(const std::string& text, const std::set<std::string>& allowed) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        const std::string value = trim(line.substr(eq + 1));
        if (!allowed.count(key)) throw IoError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> read_config(const std::string& path, const std::set<std::string>& allowed) {
    return parse_config(slurp(path), allowed);
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split(text, ',')) {
        const auto dots = item.find("..");
        auto to_int = [&](const std::string& s) {
            double v = 0.0;
            if (!parse_number(s, v) || v != std::floor(v) || std::abs(v) > 1e9)
                throw InvalidInput("'" + s + "' is not an integer");
            return static_cast<int>(v);
        };
        if (dots == std::string::npos) {
            out.push_back(to_int(item));
            continue;
        }
        const int lo = to_int(item.substr(0, dots));
        const int hi = to_int(item.substr(dots + 2));
        if (hi < lo) throw InvalidInput("empty range '" + item + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        double v = 0.0;
        if (!parse_number(item, v)) throw InvalidInput("'" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("empty list");
    return out;
}

}  // namespace spgd
