#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frw/bootstrap.hpp"

namespace frw {

struct RiskSetUnit {
    double current_age = 0.0;
    std::string unit_id;
};

struct PredictionCurve {
    std::vector<double> horizon_grid;
    std::vector<double> point; // expected cumulative failures
    std::vector<double> lower;
    std::vector<double> upper;
    double level = 0.95;
};

/// P(fail by age + horizon | survived to age).
double conditional_failure_prob(const ModelParams &params, double age, double horizon);

struct FleetOptions {
    double level = 0.95;
    std::size_t sims_per_draw = 20;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0 means hardware concurrency
};

/// Simulated cumulative failure counts, one row per horizon and one column per
/// (usable draw, inner simulation) pair, draws outermost.
std::vector<std::vector<double>> fleet_simulated_counts(const BootstrapRun &run, std::span<const RiskSetUnit> risk_set,
                                                        std::span<const double> horizon_grid,
                                                        const FleetOptions &options);

PredictionCurve fleet_prediction(const BootstrapRun &run, std::span<const RiskSetUnit> risk_set,
                                 std::span<const double> horizon_grid, const FleetOptions &options);

/// Evenly spaced grid 0, h/steps, ..., h.
std::vector<double> make_horizon_grid(double horizon, std::size_t steps);

struct RemainingLife {
    double lower;
    double upper;
};

/// Median across usable draws of the conditional remaining-life quantiles.
RemainingLife individual_prediction(const BootstrapRun &run, const RiskSetUnit &unit, double level);

} // namespace frw
