#include "frw/run_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "frw/error.hpp"
#include "frw/lifedata.hpp"

namespace frw {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

double number_from(const json &j) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        return parse_double(j.get<std::string>(), "number");
    }
    return std::numeric_limits<double>::quiet_NaN();
}

json vector_json(const std::vector<double> &v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(number_or_null(x));
    }
    return a;
}

std::vector<double> vector_from(const json &j) {
    std::vector<double> v;
    for (const auto &x : j) {
        v.push_back(number_from(x));
    }
    return v;
}

std::vector<std::string> read_rows(std::istream &in, std::string &header) {
    std::vector<std::string> rows;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!have_header) {
            header = line;
            have_header = true;
        } else {
            rows.push_back(line);
        }
    }
    if (!have_header) {
        throw InputError("missing header row");
    }
    return rows;
}

std::string join(const std::vector<std::string> &parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? std::string(1, sep) : std::string()) + parts[i];
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_double(const std::string &text, const std::string &what) {
    if (text == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (text == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (text == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(what + ": '" + text + "' is not a number");
    }
    return v;
}

json params_to_json(const ModelParams &params) {
    json j;
    j["family"] = std::string(to_string(params.family()));
    const auto names = parameter_names(params.family());
    for (std::size_t i = 0; i < names.size(); ++i) {
        j[names[i]] = params[i];
    }
    return j;
}

ModelParams params_from_json(const json &j) {
    const Family family = parse_family(j.at("family").get<std::string>());
    std::vector<double> v;
    for (const auto &name : parameter_names(family)) {
        v.push_back(number_from(j.at(name)));
    }
    return ModelParams::from_values(family, v);
}

json fit_to_json(const FitResult &fit) {
    json j;
    j["params"] = params_to_json(fit.params);
    j["loglik"] = number_or_null(fit.loglik);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["gradient_norm"] = number_or_null(fit.gradient_norm);
    j["internal"] = vector_json(fit.internal);
    j["se"] = vector_json(fit.se);
    j["boundary_hit"] = fit.boundary_hit;
    json info = json::array();
    for (long r = 0; r < fit.info_matrix.rows(); ++r) {
        std::vector<double> row(std::size_t(fit.info_matrix.cols()));
        for (long c = 0; c < fit.info_matrix.cols(); ++c) {
            row[std::size_t(c)] = fit.info_matrix(r, c);
        }
        info.push_back(vector_json(row));
    }
    j["info_matrix"] = info;
    return j;
}

FitResult fit_from_json(const json &j) {
    FitResult fit;
    fit.params = params_from_json(j.at("params"));
    fit.loglik = number_from(j.at("loglik"));
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.gradient_norm = number_from(j.at("gradient_norm"));
    fit.internal = vector_from(j.at("internal"));
    fit.se = vector_from(j.at("se"));
    fit.boundary_hit = j.at("boundary_hit").get<std::vector<std::string>>();
    const auto &info = j.at("info_matrix");
    if (!info.empty()) {
        fit.info_matrix.resize(long(info.size()), long(info.front().size()));
        for (std::size_t r = 0; r < info.size(); ++r) {
            const auto row = vector_from(info[r]);
            for (std::size_t c = 0; c < row.size(); ++c) {
                fit.info_matrix(long(r), long(c)) = row[c];
            }
        }
    }
    return fit;
}

json run_to_json(const BootstrapRun &run) {
    json j;
    j["family"] = std::string(to_string(run.family));
    j["scheme"] = std::string(to_string(run.scheme));
    j["replicates"] = run.replicates;
    j["seed"] = run.seed;
    j["expand_units"] = run.expand_units;
    j["parameters"] = parameter_names(run.family);
    j["usable"] = run.usable_count();
    j["point_fit"] = fit_to_json(run.point_fit);
    return j;
}

void write_replicates_csv(std::ostream &out, const BootstrapRun &run) {
    out << "replicate_id,status,converged,degenerate,boundary";
    for (const auto &name : parameter_names(run.family)) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t b = 0; b < run.statuses.size(); ++b) {
        const ReplicateStatus &s = run.statuses[b];
        out << (b + 1) << ',' << s.label() << ',' << (s.converged ? 1 : 0) << ',' << (s.degenerate_weights ? 1 : 0)
            << ',' << join(s.boundary_hit, ';');
        for (long c = 0; c < run.estimates.cols(); ++c) {
            out << ',' << format_double(run.estimates(long(b), c));
        }
        out << '\n';
    }
}

void read_replicates_csv(std::istream &in, BootstrapRun &run) {
    std::string header;
    const auto rows = read_rows(in, header);
    const auto names = parameter_names(run.family);
    std::vector<std::string> expected{"replicate_id", "status", "converged", "degenerate", "boundary"};
    expected.insert(expected.end(), names.begin(), names.end());
    if (split_fields(header) != expected) {
        throw InputError("replicate dump header does not match family " + std::string(to_string(run.family)));
    }
    run.estimates.resize(long(rows.size()), long(names.size()));
    run.statuses.assign(rows.size(), {});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto f = split_fields(rows[r]);
        const std::string where = "replicate dump row " + std::to_string(r + 2);
        if (f.size() != expected.size()) {
            throw InputError(where + ": wrong number of fields");
        }
        if (f[0] != std::to_string(r + 1)) {
            throw InputError(where + ": replicate ids must run 1..B in order");
        }
        ReplicateStatus &s = run.statuses[r];
        s.converged = f[2] == "1";
        s.degenerate_weights = f[3] == "1";
        if (!f[4].empty()) {
            std::stringstream ss(f[4]);
            for (std::string name; std::getline(ss, name, ';');) {
                s.boundary_hit.push_back(name);
            }
        }
        for (std::size_t c = 0; c < names.size(); ++c) {
            run.estimates(long(r), long(c)) = parse_double(f[5 + c], where);
        }
        if (s.label() != f[1]) {
            throw InputError(where + ": status '" + f[1] + "' is inconsistent with its flags");
        }
    }
    run.replicates = rows.size();
}

void save_run(const std::filesystem::path &dir, const BootstrapRun &run) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "run.json");
        out << run_to_json(run).dump(2) << '\n';
    }
    std::ofstream out(dir / "replicates.csv");
    write_replicates_csv(out, run);
    if (!out) {
        throw InputError("failed writing " + (dir / "replicates.csv").string());
    }
}

BootstrapRun load_run(const std::filesystem::path &dir) {
    std::ifstream jin(dir / "run.json");
    if (!jin) {
        throw InputError("cannot open " + (dir / "run.json").string());
    }
    json j;
    try {
        jin >> j;
    } catch (const json::exception &e) {
        throw InputError("run.json: " + std::string(e.what()));
    }
    BootstrapRun run;
    try {
        run.family = parse_family(j.at("family").get<std::string>());
        run.scheme = parse_weight_scheme(j.at("scheme").get<std::string>());
        run.seed = j.at("seed").get<std::uint64_t>();
        run.expand_units = j.at("expand_units").get<bool>();
        run.point_fit = fit_from_json(j.at("point_fit"));
        run.replicates = j.at("replicates").get<std::size_t>();
    } catch (const json::exception &e) {
        throw InputError("run.json: " + std::string(e.what()));
    }
    const std::size_t declared = run.replicates;
    std::ifstream cin(dir / "replicates.csv");
    if (!cin) {
        throw InputError("cannot open " + (dir / "replicates.csv").string());
    }
    read_replicates_csv(cin, run);
    if (run.replicates != declared) {
        throw InputError("replicate dump has " + std::to_string(run.replicates) + " rows but run.json declares " +
                         std::to_string(declared));
    }
    return run;
}

json pathology_to_json(const PathologyReport &report) {
    json j;
    j["replicates"] = report.replicates;
    j["unconverged"] = report.unconverged_count;
    j["degenerate"] = report.degenerate_count;
    j["pathological"] = report.pathological_count;
    json b = json::object();
    for (const auto &[name, counts] : report.boundary) {
        b[name] = {{"lower", counts.at_lower}, {"upper", counts.at_upper}};
    }
    j["boundary"] = b;
    return j;
}

void write_histogram_csv(std::ostream &out, const std::string &param, const Histogram &h) {
    out << "parameter,bin_lower,bin_upper,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out << param << ',' << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ','
            << h.counts[i] << '\n';
    }
}

void write_curve_csv(std::ostream &out, const PredictionCurve &curve) {
    out << "horizon,point,lower,upper\n";
    for (std::size_t i = 0; i < curve.horizon_grid.size(); ++i) {
        out << format_double(curve.horizon_grid[i]) << ',' << format_double(curve.point[i]) << ','
            << format_double(curve.lower[i]) << ',' << format_double(curve.upper[i]) << '\n';
    }
}

PredictionCurve read_curve_csv(std::istream &in, double level) {
    std::string header;
    const auto rows = read_rows(in, header);
    if (split_fields(header) != std::vector<std::string>{"horizon", "point", "lower", "upper"}) {
        throw InputError("prediction curve header must be horizon,point,lower,upper");
    }
    PredictionCurve curve;
    curve.level = level;
    for (const auto &row : rows) {
        const auto f = split_fields(row);
        if (f.size() != 4) {
            throw InputError("prediction curve row has " + std::to_string(f.size()) + " fields");
        }
        curve.horizon_grid.push_back(parse_double(f[0], "horizon"));
        curve.point.push_back(parse_double(f[1], "point"));
        curve.lower.push_back(parse_double(f[2], "lower"));
        curve.upper.push_back(parse_double(f[3], "upper"));
    }
    return curve;
}

std::vector<RiskSetUnit> parse_risk_set(std::istream &in, const std::string &source) {
    std::string header;
    const auto rows = read_rows(in, header);
    if (split_fields(header) != std::vector<std::string>{"unit_id", "current_age"}) {
        throw InputError(source + ": risk set header must be unit_id,current_age");
    }
    std::vector<RiskSetUnit> units;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto f = split_fields(rows[r]);
        const std::string where = source + " row " + std::to_string(r + 2);
        if (f.size() != 2 || f[0].empty()) {
            throw InputError(where + ": expected unit_id,current_age");
        }
        const double age = parse_real(f[1], where + ": current_age");
        if (!(age > 0.0)) {
            throw InputError(where + ": current_age must be positive");
        }
        units.push_back({age, f[0]});
    }
    if (units.empty()) {
        throw InputError(source + ": risk set is empty");
    }
    return units;
}

DesignData parse_design(std::istream &in, const std::string &source) {
    std::string header;
    const auto rows = read_rows(in, header);
    const auto names = split_fields(header);
    if (rows.size() < 3) {
        throw InputError(source + ": need low and high rows plus at least one run");
    }
    auto numbers = [&](std::size_t r, const std::string &label) {
        const auto f = split_fields(rows[r]);
        const std::string where = source + " row " + std::to_string(r + 2);
        std::size_t offset = 0;
        if (!label.empty()) {
            if (f.empty() || f[0] != label) {
                throw InputError(where + ": expected a '" + label + "' row");
            }
            offset = 1;
        }
        if (f.size() != names.size() + offset) {
            throw InputError(where + ": expected " + std::to_string(names.size()) + " values");
        }
        std::vector<double> v;
        for (std::size_t c = 0; c < names.size(); ++c) {
            v.push_back(parse_real(f[c + offset], where + ": " + names[c]));
        }
        return v;
    };
    DesignData d;
    const auto lo = numbers(0, "low");
    const auto hi = numbers(1, "high");
    for (std::size_t c = 0; c < names.size(); ++c) {
        d.spec.factors.push_back({names[c], lo[c], hi[c]});
    }
    build_candidates(d.spec); // validates names and ranges
    d.x_raw.resize(long(rows.size() - 2), long(names.size()));
    for (std::size_t r = 2; r < rows.size(); ++r) {
        const auto v = numbers(r, "");
        for (std::size_t c = 0; c < v.size(); ++c) {
            d.x_raw(long(r - 2), long(c)) = v[c];
        }
    }
    return d;
}

Eigen::VectorXd parse_response(std::istream &in, const std::string &source) {
    std::string header;
    const auto rows = read_rows(in, header);
    Eigen::VectorXd y(long(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto f = split_fields(rows[r]);
        if (f.size() != 1) {
            throw InputError(source + " row " + std::to_string(r + 2) + ": expected one value");
        }
        y(long(r)) = parse_real(f[0], source + " row " + std::to_string(r + 2));
    }
    return y;
}

void write_selection_proportions_csv(std::ostream &out, const BootstrapSelection &sel) {
    out << "term,proportion\n";
    for (const auto &p : sel.proportions) {
        out << sel.candidates[p.term].label << ',' << format_double(p.proportion) << '\n';
    }
}

void write_selection_coefficients_csv(std::ostream &out, const BootstrapSelection &sel) {
    out << "replicate_id";
    for (const auto &t : sel.candidates) {
        out << ',' << t.label;
    }
    out << '\n';
    for (long b = 0; b < sel.coefficients.rows(); ++b) {
        out << (b + 1);
        for (long c = 0; c < sel.coefficients.cols(); ++c) {
            out << ',' << format_double(sel.coefficients(b, c));
        }
        out << '\n';
    }
}

} // namespace frw
