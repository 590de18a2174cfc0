#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "frw/bootstrap.hpp"
#include "frw/prediction.hpp"
#include "frw/selection.hpp"

namespace frw {

/// Shortest text that parses back to the same double ("nan", "inf" allowed).
std::string format_double(double v);
/// Inverse of format_double; throws InputError.
double parse_double(const std::string &text, const std::string &what);

nlohmann::json params_to_json(const ModelParams &params);
ModelParams params_from_json(const nlohmann::json &j);

nlohmann::json fit_to_json(const FitResult &fit);
FitResult fit_from_json(const nlohmann::json &j);

/// Run metadata and the original-data fit; the replicate draws live in the CSV dump.
nlohmann::json run_to_json(const BootstrapRun &run);

/// One row per replicate: replicate_id, status, converged, degenerate,
/// boundary (';'-separated parameter names), then one column per parameter.
void write_replicates_csv(std::ostream &out, const BootstrapRun &run);
/// Fills estimates and statuses of `run`, whose family must already be set.
void read_replicates_csv(std::istream &in, BootstrapRun &run);

/// run.json + replicates.csv inside `dir`.
void save_run(const std::filesystem::path &dir, const BootstrapRun &run);
BootstrapRun load_run(const std::filesystem::path &dir);

nlohmann::json pathology_to_json(const PathologyReport &report);

void write_histogram_csv(std::ostream &out, const std::string &param, const Histogram &h);

void write_curve_csv(std::ostream &out, const PredictionCurve &curve);
PredictionCurve read_curve_csv(std::istream &in, double level);

/// Risk set file with header unit_id,current_age.
std::vector<RiskSetUnit> parse_risk_set(std::istream &in, const std::string &source);

/// Design file: header of factor names, then a "low" row, a "high" row and one
/// row per run. Response file: one value per run after a header line.
struct DesignData {
    DesignSpec spec;
    Eigen::MatrixXd x_raw;
};
DesignData parse_design(std::istream &in, const std::string &source);
Eigen::VectorXd parse_response(std::istream &in, const std::string &source);

void write_selection_proportions_csv(std::ostream &out, const BootstrapSelection &sel);
void write_selection_coefficients_csv(std::ostream &out, const BootstrapSelection &sel);

} // namespace frw
