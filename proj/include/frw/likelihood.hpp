#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frw/distributions.hpp"
#include "frw/weights.hpp"

namespace frw {

enum class ObsKind { Exact, RightCensored, LeftCensored, IntervalCensored };

std::string_view to_string(ObsKind kind);
/// Accepts exact|right|left|interval.
ObsKind parse_obs_kind(std::string_view name);

/// One life-data record. `count` replicates the record (grouped data).
struct Observation {
    double time = 0.0;
    std::optional<double> time2; // interval upper end
    ObsKind kind = ObsKind::Exact;
    std::optional<double> truncation_lower;
    long count = 1;

    static Observation exact(double t, long count = 1) { return {t, std::nullopt, ObsKind::Exact, std::nullopt, count}; }
    static Observation right(double t, long count = 1) {
        return {t, std::nullopt, ObsKind::RightCensored, std::nullopt, count};
    }
    static Observation left(double t, long count = 1) {
        return {t, std::nullopt, ObsKind::LeftCensored, std::nullopt, count};
    }
    static Observation interval(double lo, double hi, long count = 1) {
        return {lo, hi, ObsKind::IntervalCensored, std::nullopt, count};
    }
    Observation truncated_at(double tau) const {
        Observation o = *this;
        o.truncation_lower = tau;
        return o;
    }

    bool is_failure_side() const noexcept { return kind != ObsKind::RightCensored; }
};

/// Throws InputError naming the violated invariant.
void validate(const Observation &obs);
void validate(std::span<const Observation> data);

/// Total number of units (sum of counts).
long total_units(std::span<const Observation> data);
/// One count-1 record per unit.
std::vector<Observation> expand_counts(std::span<const Observation> data);

/// count * log-likelihood contribution of one record, conditioned on survival
/// past the truncation point when present. Returns -infinity when the
/// contribution is numerically zero; fitting treats that as infeasible.
double obs_loglik(const Observation &obs, const ModelParams &params);

/// sum_i w_i * obs_loglik(obs_i). Weights attach to records, before count
/// expansion. Zero-weight records are skipped entirely.
double weighted_loglik(std::span<const Observation> data, std::span<const double> w, const ModelParams &params);
double weighted_loglik(std::span<const Observation> data, const WeightVector &w, const ModelParams &params);
double loglik(std::span<const Observation> data, const ModelParams &params);

struct MleVerdict {
    bool exists = false;
    std::string reason; // empty when the estimate exists

    explicit operator bool() const noexcept { return exists; }
};

/// Existence of the ML estimate for a log-location-scale family under the
/// given weights. For exact and right-censored data this is: two distinct
/// positive-weight failure times, or a failure time with a positive-weight
/// right-censored time beyond it. Left- and interval-censored records are
/// handled by the same rule: the estimate fails to exist exactly when one
/// point mass is consistent with every positive-weight record.
MleVerdict check_mle_exists(std::span<const Observation> data, std::span<const double> w);
MleVerdict check_mle_exists(std::span<const Observation> data, const WeightVector &w);

/// Weibull scale maximizing the weighted likelihood at fixed shape:
/// eta(beta) = (sum_all w t^beta / sum_failures w)^(1/beta).
/// Exact and right-censored records only.
double weibull_profile_eta(std::span<const Observation> data, std::span<const double> w, double beta);

/// Number of failure units present in a weighted sample: integer weights
/// count duplicates, fractional weights keep every unit of a positive-weight record.
double failures_present(std::span<const Observation> data, const WeightVector &w);

} // namespace frw
