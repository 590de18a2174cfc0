#include "frw/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "frw/error.hpp"
#include "frw/special.hpp"

namespace frw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> finite_sorted(std::span<const double> draws) {
    std::vector<double> out;
    out.reserve(draws.size());
    for (double d : draws) {
        if (std::isfinite(d)) {
            out.push_back(d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void require_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw InputError("confidence level must lie in (0, 1)");
    }
}

void require_usable(std::size_t usable) {
    if (usable < kMinUsableDraws) {
        throw InputError("only " + std::to_string(usable) + " usable bootstrap draws; at least " +
                         std::to_string(kMinUsableDraws) + " are required");
    }
}

} // namespace

std::string ReplicateStatus::label() const {
    if (degenerate_weights) {
        return "degenerate";
    }
    if (!converged) {
        return "unconverged";
    }
    if (!boundary_hit.empty()) {
        return "boundary";
    }
    return "ok";
}

std::size_t BootstrapRun::usable_count() const {
    return std::size_t(std::count_if(statuses.begin(), statuses.end(), [](const auto &s) { return s.usable(); }));
}

std::vector<double> BootstrapRun::usable_draws(std::size_t param) const {
    std::vector<double> out;
    for (std::size_t b = 0; b < statuses.size(); ++b) {
        if (statuses[b].usable()) {
            out.push_back(estimates(long(b), long(param)));
        }
    }
    return out;
}

std::vector<double> BootstrapRun::usable_draws(const std::string &param) const {
    return usable_draws(parameter_index(family, param));
}

ModelParams BootstrapRun::row_params(std::size_t row) const {
    std::vector<double> v(std::size_t(estimates.cols()));
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = estimates(long(row), long(j));
    }
    return ModelParams::from_values(family, v);
}

WeightVector replicate_weights(std::span<const Observation> data, const BootstrapOptions &options,
                               std::uint64_t replicate_id) {
    if (options.weight_override) {
        if (options.weight_override->size() != data.size()) {
            throw InputError("weight override length does not match the data");
        }
        return WeightVector{*options.weight_override, options.scheme, replicate_id};
    }
    Stream stream(options.seed, replicate_id);
    if (!options.expand_units) {
        return gen_weights(options.scheme, data.size(), stream);
    }
    const long units = total_units(data);
    const WeightVector unit_weights = gen_weights(options.scheme, std::size_t(units), stream);
    WeightVector w{std::vector<double>(data.size(), 0.0), options.scheme, replicate_id};
    std::size_t u = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double sum = 0.0;
        for (long k = 0; k < data[i].count; ++k) {
            sum += unit_weights[u++];
        }
        // obs_loglik multiplies by count, so store the per-unit average.
        w.values[i] = sum / double(data[i].count);
    }
    return w;
}

ReplicateResult run_replicate(Family family, std::span<const Observation> data, const BootstrapOptions &options,
                              const FitResult &point_fit, std::uint64_t replicate_id) {
    const std::size_t p = parameter_count(family);
    ReplicateResult result{std::vector<double>(p, kNaN), {}};
    const WeightVector w = replicate_weights(data, options, replicate_id);
    if (!check_mle_exists(data, w) ||
        (w.scheme == WeightScheme::MultinomialInteger && failures_present(data, w) < options.min_failures)) {
        result.status.degenerate_weights = true;
        return result;
    }
    FitOptions fit_options = options.fit;
    fit_options.start = point_fit.internal;
    fit_options.compute_information = false;
    try {
        const FitResult fit = fit_ml(family, data, w, fit_options);
        result.estimate = fit.params.values();
        result.status.converged = fit.converged;
        result.status.boundary_hit = fit.boundary_hit;
    } catch (const DegenerateError &) {
        result.status.degenerate_weights = true;
    } catch (const NumericalError &) {
        result.status.converged = false;
    }
    return result;
}

BootstrapRun run_bootstrap(Family family, std::span<const Observation> data, const BootstrapOptions &options) {
    if (options.replicates == 0) {
        throw InputError("run_bootstrap: at least one replicate is required");
    }
    FitResult point_fit;
    try {
        point_fit = fit_ml(family, data, options.fit);
    } catch (const DegenerateError &e) {
        throw NumericalError(std::string("original-data fit failed: ") + e.what());
    }
    if (!point_fit.converged) {
        throw NumericalError("original-data fit did not converge; bootstrap refused");
    }

    BootstrapRun run;
    run.family = family;
    run.scheme = options.scheme;
    run.replicates = options.replicates;
    run.seed = options.seed;
    run.expand_units = options.expand_units;
    run.point_fit = point_fit;
    run.estimates = Eigen::MatrixXd::Constant(long(options.replicates), long(parameter_count(family)), kNaN);
    run.statuses.resize(options.replicates);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < options.replicates; b = next++) {
            ReplicateResult r = run_replicate(family, data, options, point_fit, b + 1);
            for (std::size_t j = 0; j < r.estimate.size(); ++j) {
                run.estimates(long(b), long(j)) = r.estimate[j];
            }
            run.statuses[b] = std::move(r.status);
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, options.replicates));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    if (options.strict) {
        const PathologyReport report = boundary_diagnostics(run);
        if (double(report.pathological_count) > options.strict_threshold * double(run.replicates)) {
            throw PathologyError(std::to_string(report.pathological_count) + " of " + std::to_string(run.replicates) +
                                 " replicates are pathological");
        }
    }
    return run;
}

double sample_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw InputError("sample_quantile: no data");
    }
    const double h = (double(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = std::size_t(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

PercentileInterval percentile_interval(std::span<const double> draws, double level) {
    require_level(level);
    const std::vector<double> sorted = finite_sorted(draws);
    require_usable(sorted.size());
    const double alpha = 0.5 * (1.0 - level);
    return {sample_quantile(sorted, alpha), sample_quantile(sorted, 1.0 - alpha), sorted.size(),
            draws.size() - sorted.size()};
}

PercentileInterval bc_percentile_interval(std::span<const double> draws, double point_estimate, double level) {
    require_level(level);
    if (!std::isfinite(point_estimate)) {
        throw InputError("bc_percentile_interval: point estimate must be finite");
    }
    const std::vector<double> sorted = finite_sorted(draws);
    require_usable(sorted.size());
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), point_estimate) - sorted.begin();
    const auto not_above = std::upper_bound(sorted.begin(), sorted.end(), point_estimate) - sorted.begin();
    const double frac = (double(below) + 0.5 * double(not_above - below)) / double(sorted.size());
    if (!(frac > 0.0 && frac < 1.0)) {
        throw NumericalError("all bootstrap draws lie on one side of the estimate; the bias correction is "
                             "infinite, use the simple percentile interval");
    }
    const double z0 = normal_quantile(frac);
    const double z = normal_quantile(0.5 * (1.0 - level));
    const double a1 = normal_cdf(2.0 * z0 + z);
    const double a2 = normal_cdf(2.0 * z0 - z);
    return {sample_quantile(sorted, a1), sample_quantile(sorted, a2), sorted.size(), draws.size() - sorted.size()};
}

PathologyReport boundary_diagnostics(const BootstrapRun &run) {
    PathologyReport report;
    report.replicates = run.statuses.size();
    for (const auto &name : parameter_names(run.family)) {
        report.boundary[name] = {};
    }
    for (std::size_t b = 0; b < run.statuses.size(); ++b) {
        const ReplicateStatus &s = run.statuses[b];
        report.degenerate_count += s.degenerate_weights ? 1 : 0;
        report.unconverged_count += (!s.degenerate_weights && !s.converged) ? 1 : 0;
        report.pathological_count += s.pathological() ? 1 : 0;
        for (const auto &name : s.boundary_hit) {
            const double v = run.estimates(long(b), long(parameter_index(run.family, name)));
            auto &counts = report.boundary[name];
            (v < 0.0 ? counts.at_lower : counts.at_upper) += 1;
        }
    }
    return report;
}

Histogram histogram(std::span<const double> draws, std::size_t max_bins) {
    const std::vector<double> sorted = finite_sorted(draws);
    Histogram h;
    if (sorted.empty()) {
        return h;
    }
    const double lo = sorted.front(), hi = sorted.back();
    const double iqr = sample_quantile(sorted, 0.75) - sample_quantile(sorted, 0.25);
    const double width = 2.0 * iqr / std::cbrt(double(sorted.size()));
    std::size_t bins = 1;
    if (width > 0.0 && hi > lo) {
        bins = std::size_t(std::ceil((hi - lo) / width));
        bins = std::clamp<std::size_t>(bins, 1, std::max<std::size_t>(max_bins, 1));
    }
    const double step = hi > lo ? (hi - lo) / double(bins) : 1.0;
    h.counts.assign(bins, 0);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.edges.push_back(lo + step * double(i));
    }
    h.edges.back() = hi > lo ? hi : lo + 1.0;
    for (double v : sorted) {
        auto k = std::size_t((v - lo) / step);
        h.counts[std::min(k, bins - 1)] += 1;
    }
    return h;
}

} // namespace frw
