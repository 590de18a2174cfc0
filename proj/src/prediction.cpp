#include "frw/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <atomic>

#include "frw/error.hpp"

namespace frw {

namespace {

void require_run(const BootstrapRun &run) {
    const std::size_t usable = run.usable_count();
    if (usable < kMinUsableDraws) {
        throw InputError("bootstrap run has " + std::to_string(usable) + " usable replicates; at least " +
                         std::to_string(kMinUsableDraws) + " are required");
    }
}

void require_grid(std::span<const double> grid) {
    if (grid.empty()) {
        throw InputError("horizon grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
            throw InputError("horizon grid values must be finite and non-negative");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw InputError("horizon grid must be strictly increasing");
        }
    }
}

void require_risk_set(std::span<const RiskSetUnit> risk_set) {
    if (risk_set.empty()) {
        throw InputError("risk set is empty");
    }
    for (const auto &u : risk_set) {
        if (!(u.current_age > 0.0) || !std::isfinite(u.current_age)) {
            throw InputError("unit '" + u.unit_id + "' must have a positive finite current age");
        }
    }
}

// Survival below the smallest normal double counts as underflow.
const double kLogSurvivalFloor = std::log(std::numeric_limits<double>::min());

bool survival_underflows(double log_s) { return !(log_s > kLogSurvivalFloor); }

std::vector<std::size_t> usable_rows(const BootstrapRun &run) {
    std::vector<std::size_t> rows;
    for (std::size_t b = 0; b < run.statuses.size(); ++b) {
        if (run.statuses[b].usable()) {
            rows.push_back(b);
        }
    }
    return rows;
}

} // namespace

double conditional_failure_prob(const ModelParams &params, double age, double horizon) {
    if (!(age > 0.0)) {
        throw InputError("conditional_failure_prob: age must be positive");
    }
    if (!(horizon >= 0.0)) {
        throw InputError("conditional_failure_prob: horizon must be non-negative");
    }
    if (horizon == 0.0) {
        return 0.0;
    }
    const double log_s0 = dist_eval(params, age).log_survival;
    if (survival_underflows(log_s0)) {
        return 1.0;
    }
    if (std::isinf(horizon)) {
        return 1.0;
    }
    const double log_s1 = dist_eval(params, age + horizon).log_survival;
    if (!std::isfinite(log_s1)) {
        return 1.0;
    }
    return std::clamp(-std::expm1(log_s1 - log_s0), 0.0, 1.0);
}

std::vector<std::vector<double>> fleet_simulated_counts(const BootstrapRun &run, std::span<const RiskSetUnit> risk_set,
                                                        std::span<const double> horizon_grid,
                                                        const FleetOptions &options) {
    require_run(run);
    require_risk_set(risk_set);
    require_grid(horizon_grid);
    if (options.sims_per_draw == 0) {
        throw InputError("sims_per_draw must be positive");
    }
    const std::vector<std::size_t> rows = usable_rows(run);
    const std::size_t sims = options.sims_per_draw;
    const std::size_t grid = horizon_grid.size();
    std::vector<std::vector<double>> counts(grid, std::vector<double>(rows.size() * sims, 0.0));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        std::vector<double> rho(risk_set.size() * grid);
        for (std::size_t d = next++; d < rows.size(); d = next++) {
            const ModelParams params = run.row_params(rows[d]);
            for (std::size_t i = 0; i < risk_set.size(); ++i) {
                for (std::size_t g = 0; g < grid; ++g) {
                    rho[i * grid + g] = conditional_failure_prob(params, risk_set[i].current_age, horizon_grid[g]);
                }
            }
            // Stream keyed by the replicate id so results do not depend on scheduling.
            Stream stream(options.seed, rows[d] + 1);
            for (std::size_t s = 0; s < sims; ++s) {
                const std::size_t col = d * sims + s;
                for (std::size_t i = 0; i < risk_set.size(); ++i) {
                    const double u = stream.uniform();
                    for (std::size_t g = 0; g < grid; ++g) {
                        if (u < rho[i * grid + g]) {
                            counts[g][col] += 1.0;
                        }
                    }
                }
            }
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, rows.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    return counts;
}

PredictionCurve fleet_prediction(const BootstrapRun &run, std::span<const RiskSetUnit> risk_set,
                                 std::span<const double> horizon_grid, const FleetOptions &options) {
    if (!(options.level > 0.0 && options.level < 1.0)) {
        throw InputError("prediction level must lie in (0, 1)");
    }
    std::vector<std::vector<double>> counts = fleet_simulated_counts(run, risk_set, horizon_grid, options);
    PredictionCurve curve;
    curve.level = options.level;
    curve.horizon_grid.assign(horizon_grid.begin(), horizon_grid.end());
    const double alpha = 0.5 * (1.0 - options.level);
    for (std::size_t g = 0; g < horizon_grid.size(); ++g) {
        double point = 0.0;
        for (const auto &u : risk_set) {
            point += conditional_failure_prob(run.point_fit.params, u.current_age, horizon_grid[g]);
        }
        curve.point.push_back(point);
        std::sort(counts[g].begin(), counts[g].end());
        curve.lower.push_back(sample_quantile(counts[g], alpha));
        curve.upper.push_back(sample_quantile(counts[g], 1.0 - alpha));
    }
    return curve;
}

std::vector<double> make_horizon_grid(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InputError("horizon must be positive and finite");
    }
    if (steps == 0) {
        throw InputError("horizon grid needs at least one step");
    }
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        grid[i] = horizon * double(i) / double(steps);
    }
    grid.back() = horizon;
    return grid;
}

RemainingLife individual_prediction(const BootstrapRun &run, const RiskSetUnit &unit, double level) {
    require_run(run);
    require_risk_set(std::span<const RiskSetUnit>(&unit, 1));
    if (!(level > 0.0 && level < 1.0)) {
        throw InputError("prediction level must lie in (0, 1)");
    }
    if (survival_underflows(dist_eval(run.point_fit.params, unit.current_age).log_survival)) {
        throw NumericalError("survival at age " + std::to_string(unit.current_age) +
                             " underflows under the fitted model; remaining-life bounds would be pure extrapolation");
    }
    const double alpha = 0.5 * (1.0 - level);
    std::vector<double> lows, highs;
    for (std::size_t row : usable_rows(run)) {
        const ModelParams params = run.row_params(row);
        const double log_s0 = dist_eval(params, unit.current_age).log_survival;
        if (survival_underflows(log_s0)) {
            continue;
        }
        lows.push_back(dist_quantile_log_survival(params, log_s0 + std::log1p(-alpha)));
        highs.push_back(dist_quantile_log_survival(params, log_s0 + std::log(alpha)));
    }
    if (lows.empty()) {
        throw NumericalError("survival at the unit's age underflows for every bootstrap draw");
    }
    std::sort(lows.begin(), lows.end());
    std::sort(highs.begin(), highs.end());
    return {std::max(0.0, sample_quantile(lows, 0.5) - unit.current_age),
            std::max(0.0, sample_quantile(highs, 0.5) - unit.current_age)};
}

} // namespace frw
