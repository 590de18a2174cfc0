#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frw/mlfit.hpp"
#include "frw/weights.hpp"

namespace frw {

inline constexpr std::size_t kDefaultReplicates = 2500;
inline constexpr std::size_t kMinUsableDraws = 100;

struct BootstrapOptions {
    WeightScheme scheme = WeightScheme::DirichletFractional;
    std::size_t replicates = kDefaultReplicates;
    std::uint64_t seed = 1;
    /// Draw weights per unit (expanding record counts) and sum them back per
    /// record. Reproduces resampling of individual units for grouped data.
    bool expand_units = false;
    /// Integer-weight samples with fewer failure units than this are marked
    /// degenerate even when the ML estimate formally exists.
    double min_failures = 0.0;
    /// Fail the run when more than `strict_threshold` of replicates are pathological.
    bool strict = false;
    double strict_threshold = 0.05;
    /// Worker threads; 0 means hardware concurrency. Output does not depend on it.
    unsigned threads = 0;
    FitOptions fit;
    /// Test hook: every replicate uses these record weights instead of drawing.
    std::optional<std::vector<double>> weight_override;
};

struct ReplicateStatus {
    bool converged = false;
    std::vector<std::string> boundary_hit;
    bool degenerate_weights = false;

    /// Excluded from interval computation.
    bool usable() const noexcept { return converged && !degenerate_weights; }
    bool pathological() const noexcept { return !converged || degenerate_weights || !boundary_hit.empty(); }
    std::string label() const;
};

struct BootstrapRun {
    Family family = Family::Weibull;
    WeightScheme scheme = WeightScheme::DirichletFractional;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    bool expand_units = false;
    Eigen::MatrixXd estimates; // replicates x parameters; NaN rows when no fit was made
    std::vector<ReplicateStatus> statuses;
    FitResult point_fit;

    std::size_t usable_count() const;
    /// Draws of one parameter from usable replicates, in replicate order.
    std::vector<double> usable_draws(std::size_t param) const;
    std::vector<double> usable_draws(const std::string &param) const;
    /// Parameter values of a usable replicate row.
    ModelParams row_params(std::size_t row) const;
};

/// Record-level weights for replicate `replicate_id` (1-based).
WeightVector replicate_weights(std::span<const Observation> data, const BootstrapOptions &options,
                               std::uint64_t replicate_id);

struct ReplicateResult {
    std::vector<double> estimate; // NaN when no fit was attempted
    ReplicateStatus status;
};

/// Runs one replicate from (seed, replicate_id) alone.
ReplicateResult run_replicate(Family family, std::span<const Observation> data, const BootstrapOptions &options,
                              const FitResult &point_fit, std::uint64_t replicate_id);

/// B weighted refits. Throws NumericalError when the original-data fit fails,
/// PathologyError in strict mode when too many replicates are pathological.
BootstrapRun run_bootstrap(Family family, std::span<const Observation> data, const BootstrapOptions &options);

struct PercentileInterval {
    double lower;
    double upper;
    std::size_t usable;
    std::size_t excluded; // non-finite draws dropped
};

/// Linear-interpolation sample quantile (order statistic at (n-1)p).
double sample_quantile(std::span<const double> sorted, double p);

/// Simple percentile interval. Non-finite draws are excluded and counted.
PercentileInterval percentile_interval(std::span<const double> draws, double level);

/// Bias-corrected percentile interval around `point_estimate`.
PercentileInterval bc_percentile_interval(std::span<const double> draws, double point_estimate, double level);

struct BoundaryCounts {
    std::size_t at_lower = 0;
    std::size_t at_upper = 0;
};

struct PathologyReport {
    std::size_t replicates = 0;
    std::map<std::string, BoundaryCounts> boundary; // per parameter name
    std::size_t unconverged_count = 0;
    std::size_t degenerate_count = 0;
    std::size_t pathological_count = 0; // replicates with any of the above
};

PathologyReport boundary_diagnostics(const BootstrapRun &run);

struct Histogram {
    std::vector<double> edges; // size bins + 1
    std::vector<std::size_t> counts;
};

/// Freedman-Diaconis binning of the finite draws (at most `max_bins` bins).
Histogram histogram(std::span<const double> draws, std::size_t max_bins = 1000);

} // namespace frw
