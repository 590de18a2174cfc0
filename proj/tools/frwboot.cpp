// frwboot: command-line driver for fitting, bootstrapping, prediction and
// model selection. Machine-readable results go to an output directory that
// appears only once every file in it has been written.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frw/bootstrap.hpp"
#include "frw/error.hpp"
#include "frw/lifedata.hpp"
#include "frw/prediction.hpp"
#include "frw/run_io.hpp"
#include "frw/selection.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frw;

namespace {

/// Collects output files in a sibling temp directory and renames it into
/// place on commit, so a failed command leaves nothing behind.
class OutputDir {
  public:
    explicit OutputDir(std::string target) : target_(std::move(target)) {
        if (target_.empty()) {
            return;
        }
        if (fs::exists(target_)) {
            throw InputError("output directory '" + target_ + "' already exists");
        }
        staging_ = fs::path(target_).concat(".partial");
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    OutputDir(const OutputDir &) = delete;
    OutputDir &operator=(const OutputDir &) = delete;
    ~OutputDir() {
        if (!committed_ && !staging_.empty()) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }

    bool enabled() const { return !target_.empty(); }
    fs::path staging() const { return staging_; }

    void write(const std::string &name, const std::string &content) {
        if (!enabled()) {
            return;
        }
        std::ofstream out(staging_ / name, std::ios::binary);
        out << content;
        if (!out) {
            throw InputError("failed writing " + (staging_ / name).string());
        }
    }
    void write_json(const std::string &name, const json &j) { write(name, j.dump(2) + "\n"); }

    void commit() {
        if (!enabled()) {
            return;
        }
        fs::rename(staging_, target_);
        committed_ = true;
    }

  private:
    std::string target_;
    fs::path staging_;
    bool committed_ = false;
};

std::string fixed(double v, int digits = 4) {
    if (!std::isfinite(v)) {
        return format_double(v);
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::vector<double> parse_levels(const std::string &text) {
    std::vector<double> levels;
    for (const auto &f : split_fields(text)) {
        const double v = parse_real(f, "level");
        if (!(v > 0.0 && v < 1.0)) {
            throw InputError("levels must lie in (0, 1)");
        }
        levels.push_back(v);
    }
    if (levels.empty()) {
        throw InputError("at least one level is required");
    }
    return levels;
}

std::vector<double> read_weight_file(const std::string &path, std::size_t n) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open weights file '" + path + "'");
    }
    std::vector<double> w;
    std::string line;
    bool header = true;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (header) {
            header = false;
            if (line != "weight") {
                throw InputError(path + ":" + std::to_string(lineno) + ": header must be 'weight'");
            }
            continue;
        }
        const double v = parse_real(line, path + ":" + std::to_string(lineno));
        if (v < 0.0) {
            throw InputError(path + ":" + std::to_string(lineno) + ": weights must be non-negative");
        }
        w.push_back(v);
    }
    if (w.size() != n) {
        throw InputError("weights file has " + std::to_string(w.size()) + " values for " + std::to_string(n) +
                         " records");
    }
    return w;
}

json echo_config(const std::string &command, const std::vector<std::pair<std::string, json>> &items) {
    json j;
    j["command"] = command;
    for (const auto &[k, v] : items) {
        j[k] = v;
    }
    return j;
}

// gen-weights ---------------------------------------------------------------

struct GenWeightsArgs {
    std::string scheme = "dirichlet";
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::uint64_t replicate = 1;
    std::string out;
};

void cmd_gen_weights(const GenWeightsArgs &a) {
    const WeightScheme scheme = parse_weight_scheme(a.scheme);
    OutputDir dir(a.out);
    Stream stream(a.seed, a.replicate);
    const WeightVector w = gen_weights(scheme, a.n, stream);
    std::string text = "weight\n";
    for (double v : w.values) {
        text += format_double(v) + "\n";
    }
    dir.write_json("config.json", echo_config("gen-weights", {{"scheme", std::string(to_string(scheme))},
                                                              {"n", a.n},
                                                              {"seed", a.seed},
                                                              {"replicate", a.replicate}}));
    dir.write("weights.csv", text);
    dir.commit();
    std::cout << text;
}

// fit -------------------------------------------------------------------------

struct FitArgs {
    std::string family = "weibull";
    std::string data;
    std::string weights;
    double level = 0.95;
    bool profile = false;
    std::string out;
};

void cmd_fit(const FitArgs &a) {
    const Family family = parse_family(a.family);
    if (!(a.level > 0.0 && a.level < 1.0)) {
        throw InputError("level must lie in (0, 1)");
    }
    OutputDir dir(a.out);
    const auto data = load_lifedata(a.data);
    const std::vector<double> w = a.weights.empty() ? std::vector<double>(data.size(), 1.0)
                                                    : read_weight_file(a.weights, data.size());
    const FitResult fit = fit_ml(family, data, w);
    if (!fit.converged) {
        throw NumericalError("maximum likelihood fit did not converge (gradient norm " +
                             format_double(fit.gradient_norm) + ")");
    }
    const auto names = parameter_names(family);
    json intervals = json::array();
    std::ostringstream table;
    table << "family " << to_string(family) << ", loglik " << fixed(fit.loglik, 6) << ", "
          << fixed(100 * a.level, 0) << "% intervals\n";
    table << std::left << std::setw(10) << "Parameter" << std::right << std::setw(12) << "Estimate" << std::setw(12)
          << "Std Error" << std::setw(12) << "Wald Lower" << std::setw(12) << "Wald Upper";
    if (a.profile) {
        table << std::setw(12) << "LR Lower" << std::setw(12) << "LR Upper";
    }
    table << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        const Interval wald = wald_interval(fit, names[i], a.level);
        json row{{"parameter", names[i]},
                 {"estimate", fit.params[i]},
                 {"se", format_double(fit.se[i])},
                 {"wald_lower", format_double(wald.lower)},
                 {"wald_upper", format_double(wald.upper)}};
        table << std::left << std::setw(10) << names[i] << std::right << std::setw(12) << fixed(fit.params[i])
              << std::setw(12) << fixed(fit.se[i]) << std::setw(12) << fixed(wald.lower) << std::setw(12)
              << fixed(wald.upper);
        if (a.profile) {
            const ProfileInterval pi = profile_likelihood_interval(family, data, w, fit, names[i], a.level);
            row["profile_lower"] = format_double(pi.lower);
            row["profile_upper"] = format_double(pi.upper);
            row["profile_lower_open"] = pi.lower_open;
            row["profile_upper_open"] = pi.upper_open;
            table << std::setw(12) << fixed(pi.lower) << std::setw(12) << fixed(pi.upper);
        }
        table << '\n';
        intervals.push_back(row);
    }
    for (const auto &b : fit.boundary_hit) {
        table << "warning: " << b << " estimate is at the parameter boundary\n";
    }
    json result{{"fit", fit_to_json(fit)}, {"level", a.level}, {"intervals", intervals}};
    dir.write_json("config.json", echo_config("fit", {{"family", a.family},
                                                      {"data", a.data},
                                                      {"weights", a.weights},
                                                      {"level", a.level},
                                                      {"profile", a.profile}}));
    dir.write_json("fit.json", result);
    dir.commit();
    std::cout << table.str();
}

// bootstrap -----------------------------------------------------------------

struct BootstrapArgs {
    std::string family = "weibull";
    std::string data;
    std::string scheme = "dirichlet";
    std::size_t replicates = kDefaultReplicates;
    std::uint64_t seed = 1;
    std::string levels = "0.95";
    std::string param;
    bool record_level = false;
    bool strict = false;
    double strict_threshold = 0.05;
    double min_failures = 0.0;
    unsigned threads = 0;
    std::string out;
};

void cmd_bootstrap(const BootstrapArgs &a) {
    const Family family = parse_family(a.family);
    const std::vector<double> levels = parse_levels(a.levels);
    const std::string param = a.param.empty() ? parameter_names(family).back() : a.param;
    parameter_index(family, param);
    if (a.out.empty()) {
        throw InputError("bootstrap requires --out for the replicate dump");
    }
    OutputDir dir(a.out);
    const auto data = load_lifedata(a.data);

    BootstrapOptions opts;
    opts.scheme = parse_weight_scheme(a.scheme);
    opts.replicates = a.replicates;
    opts.seed = a.seed;
    opts.expand_units = !a.record_level;
    opts.min_failures = a.min_failures;
    opts.strict = a.strict;
    opts.strict_threshold = a.strict_threshold;
    opts.threads = a.threads;
    const BootstrapRun run = run_bootstrap(family, data, opts);
    const PathologyReport report = boundary_diagnostics(run);

    std::ostringstream table, csv;
    csv << "parameter,scheme,level,bc_lower,bc_upper,percentile_lower,percentile_upper,usable\n";
    table << "scheme " << to_string(opts.scheme) << ", B = " << run.replicates << ", usable " << run.usable_count()
          << ", parameter " << param << " (estimate " << fixed(run.point_fit.params[parameter_index(family, param)])
          << ")\n";
    table << std::setw(10) << "Level" << std::setw(12) << "BC Lower" << std::setw(12) << "BC Upper" << '\n';
    const std::vector<double> draws = run.usable_draws(param);
    const double estimate = run.point_fit.params[parameter_index(family, param)];
    json interval_json = json::array();
    for (double level : levels) {
        const PercentileInterval bc = bc_percentile_interval(draws, estimate, level);
        const PercentileInterval pc = percentile_interval(draws, level);
        csv << param << ',' << to_string(opts.scheme) << ',' << format_double(level) << ','
            << format_double(bc.lower) << ',' << format_double(bc.upper) << ',' << format_double(pc.lower) << ','
            << format_double(pc.upper) << ',' << bc.usable << '\n';
        table << std::setw(10) << fixed(level, 2) << std::setw(12) << fixed(bc.lower, 3) << std::setw(12)
              << fixed(bc.upper, 3) << '\n';
        interval_json.push_back({{"level", level}, {"bc_lower", bc.lower}, {"bc_upper", bc.upper}});
    }
    table << "pathology: " << report.degenerate_count << " degenerate, " << report.unconverged_count
          << " unconverged, " << report.pathological_count << " pathological of " << report.replicates << '\n';

    std::ostringstream hist, reps;
    bool first = true;
    for (const auto &name : parameter_names(family)) {
        std::ostringstream part;
        write_histogram_csv(part, name, histogram(run.usable_draws(name)));
        std::string s = part.str();
        if (!first) {
            s = s.substr(s.find('\n') + 1);
        }
        hist << s;
        first = false;
    }
    write_replicates_csv(reps, run);

    dir.write_json("config.json", echo_config("bootstrap", {{"family", a.family},
                                                            {"data", a.data},
                                                            {"scheme", std::string(to_string(opts.scheme))},
                                                            {"B", a.replicates},
                                                            {"seed", a.seed},
                                                            {"levels", levels},
                                                            {"parameter", param},
                                                            {"unit_level", opts.expand_units},
                                                            {"min_failures", a.min_failures},
                                                            {"strict", a.strict}}));
    dir.write_json("run.json", run_to_json(run));
    dir.write("replicates.csv", reps.str());
    dir.write("intervals.csv", csv.str());
    dir.write_json("pathology.json", pathology_to_json(report));
    dir.write("histogram.csv", hist.str());
    dir.commit();
    std::cout << table.str();
}

// predict -------------------------------------------------------------------

struct PredictArgs {
    std::string run;
    std::string risk_set;
    double horizon = 0.0;
    std::size_t steps = 50;
    double level = 0.0;
    std::size_t sims = 20;
    std::uint64_t seed = 1;
    std::string unit;
    unsigned threads = 0;
    std::string out;
};

void cmd_predict(const PredictArgs &a) {
    if (!(a.level > 0.0 && a.level < 1.0)) {
        throw InputError("--level must lie in (0, 1)");
    }
    OutputDir dir(a.out);
    const BootstrapRun run = load_run(a.run);
    std::ifstream in(a.risk_set);
    if (!in) {
        throw InputError("cannot open risk set '" + a.risk_set + "'");
    }
    const auto units = parse_risk_set(in, a.risk_set);
    std::ostringstream text, csv;
    json config = echo_config("predict", {{"run", a.run},
                                          {"risk_set", a.risk_set},
                                          {"horizon", a.horizon},
                                          {"steps", a.steps},
                                          {"level", a.level},
                                          {"sims_per_draw", a.sims},
                                          {"seed", a.seed},
                                          {"unit", a.unit}});
    if (!a.unit.empty()) {
        const auto it = std::find_if(units.begin(), units.end(), [&](const auto &u) { return u.unit_id == a.unit; });
        if (it == units.end()) {
            throw InputError("unit '" + a.unit + "' is not in the risk set");
        }
        const RemainingLife r = individual_prediction(run, *it, a.level);
        csv << "unit_id,current_age,level,lower_remaining,upper_remaining\n"
            << it->unit_id << ',' << format_double(it->current_age) << ',' << format_double(a.level) << ','
            << format_double(r.lower) << ',' << format_double(r.upper) << '\n';
        text << "unit " << it->unit_id << " (age " << fixed(it->current_age, 3) << "): remaining life "
             << fixed(a.level * 100, 0) << "% interval [" << fixed(r.lower) << ", " << fixed(r.upper) << "]\n";
        dir.write_json("config.json", config);
        dir.write("individual.csv", csv.str());
    } else {
        FleetOptions fo;
        fo.level = a.level;
        fo.sims_per_draw = a.sims;
        fo.seed = a.seed;
        fo.threads = a.threads;
        const auto grid = make_horizon_grid(a.horizon, a.steps);
        const PredictionCurve curve = fleet_prediction(run, units, grid, fo);
        write_curve_csv(csv, curve);
        text << std::setw(12) << "Horizon" << std::setw(12) << "Point" << std::setw(12) << "Lower" << std::setw(12)
             << "Upper" << '\n';
        const std::size_t stride = std::max<std::size_t>(1, grid.size() / 10);
        for (std::size_t i = 0; i < grid.size(); i += stride) {
            text << std::setw(12) << fixed(grid[i], 3) << std::setw(12) << fixed(curve.point[i], 3) << std::setw(12)
                 << fixed(curve.lower[i], 1) << std::setw(12) << fixed(curve.upper[i], 1) << '\n';
        }
        dir.write_json("config.json", config);
        dir.write("curve.csv", csv.str());
    }
    dir.commit();
    std::cout << (dir.enabled() ? text.str() : csv.str());
}

// select --------------------------------------------------------------------

struct SelectArgs {
    std::string design;
    std::string response;
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    bool heredity = false;
    double cutoff = 0.5;
    unsigned threads = 0;
    std::string out;
};

void cmd_select(const SelectArgs &a) {
    if (a.out.empty()) {
        throw InputError("select requires --out for the coefficient matrix");
    }
    OutputDir dir(a.out);
    std::ifstream din(a.design), rin(a.response);
    if (!din) {
        throw InputError("cannot open design '" + a.design + "'");
    }
    if (!rin) {
        throw InputError("cannot open response '" + a.response + "'");
    }
    const DesignData design = parse_design(din, a.design);
    const Eigen::VectorXd y = parse_response(rin, a.response);
    if (y.size() != design.x_raw.rows()) {
        throw InputError("design has " + std::to_string(design.x_raw.rows()) + " runs but response has " +
                         std::to_string(y.size()));
    }
    BootstrapSelectionOptions opts;
    opts.replicates = a.replicates;
    opts.seed = a.seed;
    opts.selection.strong_heredity = a.heredity;
    opts.threads = a.threads;
    const BootstrapSelection sel = bootstrap_selection(design.spec, design.x_raw, y, opts);

    std::ostringstream props, coefs, text;
    write_selection_proportions_csv(props, sel);
    write_selection_coefficients_csv(coefs, sel);
    text << std::left << std::setw(24) << "Term" << std::right << std::setw(12) << "Proportion" << '\n';
    for (const auto &p : sel.proportions) {
        text << std::left << std::setw(24) << sel.candidates[p.term].label << std::right << std::setw(12)
             << fixed(p.proportion, 3) << (p.proportion >= a.cutoff ? "  *" : "") << '\n';
    }
    json point;
    point["intercept"] = sel.point.intercept;
    json terms = json::array();
    for (std::size_t c : sel.point.selected) {
        terms.push_back({{"term", sel.candidates[c].label}, {"coefficient", sel.point.coefficients[c]}});
    }
    point["selected"] = terms;
    point["aic_trace"] = sel.point.aic_trace;
    point["failed_replicates"] = sel.failed;
    dir.write_json("config.json", echo_config("select", {{"design", a.design},
                                                         {"response", a.response},
                                                         {"B", a.replicates},
                                                         {"seed", a.seed},
                                                         {"strong_heredity", a.heredity},
                                                         {"cutoff", a.cutoff}}));
    dir.write_json("selection.json", point);
    dir.write("proportions.csv", props.str());
    dir.write("coefficients.csv", coefs.str());
    dir.commit();
    std::cout << text.str();
}

std::string one_line(std::string s) {
    for (char &c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

int report(const char *code, int status, const std::string &message) {
    std::cerr << "frwboot: error=" << code << " exit=" << status << " message=" << one_line(message) << '\n';
    return status;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Fractional-random-weight bootstrap for lifetime data"};
    app.require_subcommand(1);

    GenWeightsArgs gw;
    auto *gen = app.add_subcommand("gen-weights", "Draw one bootstrap weight vector");
    gen->add_option("--scheme", gw.scheme, "multinomial | dirichlet | exponential")->capture_default_str();
    gen->add_option("--n", gw.n, "Number of weights")->required();
    gen->add_option("--seed", gw.seed, "Master seed")->capture_default_str();
    gen->add_option("--replicate", gw.replicate, "Replicate id (stream)")->capture_default_str();
    gen->add_option("--out", gw.out, "Output directory");

    FitArgs fa;
    auto *fit = app.add_subcommand("fit", "Maximum likelihood fit with Wald and likelihood intervals");
    fit->add_option("--family", fa.family, "weibull | lognormal | gengamma")->capture_default_str();
    fit->add_option("--data", fa.data, "Life data CSV or a bundled dataset name")->required();
    fit->add_option("--weights", fa.weights, "Per-record weights (header 'weight')");
    fit->add_option("--level", fa.level, "Confidence level")->capture_default_str();
    fit->add_flag("--profile", fa.profile, "Also compute likelihood-ratio intervals");
    fit->add_option("--out", fa.out, "Output directory");

    BootstrapArgs ba;
    auto *boot = app.add_subcommand("bootstrap", "Weighted bootstrap with bias-corrected percentile intervals");
    boot->add_option("--family", ba.family, "weibull | lognormal | gengamma")->capture_default_str();
    boot->add_option("--data", ba.data, "Life data CSV or a bundled dataset name")->required();
    boot->add_option("--scheme", ba.scheme, "multinomial | dirichlet | exponential")->capture_default_str();
    boot->add_option("--B", ba.replicates, "Number of replicates")->capture_default_str();
    boot->add_option("--seed", ba.seed, "Master seed")->capture_default_str();
    boot->add_option("--levels", ba.levels, "Comma-separated confidence levels")->capture_default_str();
    boot->add_option("--param", ba.param, "Parameter for the interval table (default: shape)");
    boot->add_flag("--record-level", ba.record_level, "Weight records rather than individual units");
    boot->add_option("--min-failures", ba.min_failures, "Integer-weight samples with fewer failures are degenerate");
    boot->add_flag("--strict", ba.strict, "Fail when too many replicates are pathological");
    boot->add_option("--strict-threshold", ba.strict_threshold, "Pathological fraction allowed in strict mode")
        ->capture_default_str();
    boot->add_option("--threads", ba.threads, "Worker threads (0 = all cores)");
    boot->add_option("--out", ba.out, "Output directory")->required();

    PredictArgs pa;
    auto *pred = app.add_subcommand("predict", "Fleet failure-count or individual remaining-life prediction");
    pred->add_option("--run", pa.run, "Bootstrap output directory")->required();
    pred->add_option("--risk-set", pa.risk_set, "CSV with unit_id,current_age")->required();
    pred->add_option("--horizon", pa.horizon, "Largest future time")->required();
    pred->add_option("--steps", pa.steps, "Grid intervals between 0 and the horizon")->capture_default_str();
    pred->add_option("--level", pa.level, "Prediction level")->required();
    pred->add_option("--sims", pa.sims, "Inner simulations per bootstrap draw")->capture_default_str();
    pred->add_option("--seed", pa.seed, "Simulation seed")->capture_default_str();
    pred->add_option("--unit", pa.unit, "Unit id for an individual remaining-life interval");
    pred->add_option("--threads", pa.threads, "Worker threads (0 = all cores)");
    pred->add_option("--out", pa.out, "Output directory");

    SelectArgs sa;
    auto *sel = app.add_subcommand("select", "Bootstrapped forward AIC selection");
    sel->add_option("--design", sa.design, "Design CSV (names, low row, high row, runs)")->required();
    sel->add_option("--response", sa.response, "Response CSV")->required();
    sel->add_option("--B", sa.replicates, "Number of replicates")->capture_default_str();
    sel->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
    sel->add_flag("--heredity", sa.heredity, "Enforce strong heredity");
    sel->add_option("--cutoff", sa.cutoff, "Proportion marked as selected")->capture_default_str();
    sel->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");
    sel->add_option("--out", sa.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        return report("usage", 2, e.what());
    }

    try {
        if (*gen) {
            cmd_gen_weights(gw);
        } else if (*fit) {
            cmd_fit(fa);
        } else if (*boot) {
            cmd_bootstrap(ba);
        } else if (*pred) {
            cmd_predict(pa);
        } else if (*sel) {
            cmd_select(sa);
        }
    } catch (const InputError &e) {
        return report("input", 2, e.what());
    } catch (const PathologyError &e) {
        return report("pathology", 4, e.what());
    } catch (const NumericalError &e) {
        return report("numerical", 3, e.what());
    } catch (const fs::filesystem_error &e) {
        return report("input", 2, e.what());
    } catch (const std::exception &e) {
        return report("numerical", 3, e.what());
    }
    return 0;
}
