#include "frw/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frw/error.hpp"
#include "frw/special.hpp"

namespace frw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated sum.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace

std::string_view to_string(ObsKind kind) {
    switch (kind) {
    case ObsKind::Exact:
        return "exact";
    case ObsKind::RightCensored:
        return "right";
    case ObsKind::LeftCensored:
        return "left";
    case ObsKind::IntervalCensored:
        return "interval";
    }
    return "unknown";
}

ObsKind parse_obs_kind(std::string_view name) {
    if (name == "exact" || name == "failure") {
        return ObsKind::Exact;
    }
    if (name == "right") {
        return ObsKind::RightCensored;
    }
    if (name == "left") {
        return ObsKind::LeftCensored;
    }
    if (name == "interval") {
        return ObsKind::IntervalCensored;
    }
    throw InputError("unknown observation kind '" + std::string(name) + "'");
}

void validate(const Observation &obs) {
    if (!(obs.time > 0.0) || !std::isfinite(obs.time)) {
        throw InputError("observation time must be positive and finite");
    }
    if (obs.count < 1) {
        throw InputError("observation count must be at least 1");
    }
    if (obs.kind == ObsKind::IntervalCensored) {
        if (!obs.time2 || !(*obs.time2 > obs.time) || !std::isfinite(*obs.time2)) {
            throw InputError("interval observation needs time2 > time");
        }
    } else if (obs.time2) {
        throw InputError("time2 is only allowed for interval observations");
    }
    if (obs.truncation_lower) {
        const double tau = *obs.truncation_lower;
        if (!(tau >= 0.0) || !(tau < obs.time)) {
            throw InputError("truncation point must satisfy 0 <= tau < time");
        }
    }
}

void validate(std::span<const Observation> data) {
    for (const auto &obs : data) {
        validate(obs);
    }
}

long total_units(std::span<const Observation> data) {
    long n = 0;
    for (const auto &obs : data) {
        n += obs.count;
    }
    return n;
}

std::vector<Observation> expand_counts(std::span<const Observation> data) {
    std::vector<Observation> out;
    out.reserve(std::size_t(total_units(data)));
    for (const auto &obs : data) {
        Observation unit = obs;
        unit.count = 1;
        out.insert(out.end(), std::size_t(obs.count), unit);
    }
    return out;
}

double obs_loglik(const Observation &obs, const ModelParams &params) {
    double value = 0.0;
    switch (obs.kind) {
    case ObsKind::Exact:
        value = dist_eval(params, obs.time).log_pdf;
        break;
    case ObsKind::RightCensored:
        value = dist_eval(params, obs.time).log_survival;
        break;
    case ObsKind::LeftCensored:
        value = dist_eval(params, obs.time).log_cdf;
        break;
    case ObsKind::IntervalCensored: {
        const DistEval lo = dist_eval(params, obs.time);
        const DistEval hi = dist_eval(params, *obs.time2);
        value = lo.log_cdf < std::log(0.5) ? log_diff_exp(hi.log_cdf, lo.log_cdf)
                                           : log_diff_exp(lo.log_survival, hi.log_survival);
        break;
    }
    }
    if (obs.truncation_lower && *obs.truncation_lower > 0.0) {
        value -= dist_eval(params, *obs.truncation_lower).log_survival;
    }
    if (std::isnan(value)) {
        value = -kInf;
    }
    return double(obs.count) * value;
}

double weighted_loglik(std::span<const Observation> data, std::span<const double> w, const ModelParams &params) {
    if (data.size() != w.size()) {
        throw InputError("weighted_loglik: weight vector length does not match the data");
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] == 0.0) {
            continue;
        }
        const double term = obs_loglik(data[i], params);
        if (term == -kInf) {
            return -kInf;
        }
        total.add(w[i] * term);
    }
    return total.value();
}

double weighted_loglik(std::span<const Observation> data, const WeightVector &w, const ModelParams &params) {
    return weighted_loglik(data, std::span<const double>(w.values), params);
}

double loglik(std::span<const Observation> data, const ModelParams &params) {
    CompensatedSum total;
    for (const auto &obs : data) {
        const double term = obs_loglik(obs, params);
        if (term == -kInf) {
            return -kInf;
        }
        total.add(term);
    }
    return total.value();
}

MleVerdict check_mle_exists(std::span<const Observation> data, std::span<const double> w) {
    if (data.size() != w.size()) {
        throw InputError("check_mle_exists: weight vector length does not match the data");
    }
    // A single point mass c fits record i when c lies in [lower_i, upper_i].
    double lower = 0.0, upper = kInf;
    double exact_lo = kInf, exact_hi = -kInf;
    bool any_failure = false, any_right = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(w[i] > 0.0)) {
            continue;
        }
        const Observation &obs = data[i];
        switch (obs.kind) {
        case ObsKind::Exact:
            exact_lo = std::min(exact_lo, obs.time);
            exact_hi = std::max(exact_hi, obs.time);
            lower = std::max(lower, obs.time);
            upper = std::min(upper, obs.time);
            any_failure = true;
            break;
        case ObsKind::RightCensored:
            lower = std::max(lower, obs.time);
            any_right = true;
            break;
        case ObsKind::LeftCensored:
            upper = std::min(upper, obs.time);
            any_failure = true;
            break;
        case ObsKind::IntervalCensored:
            lower = std::max(lower, obs.time);
            upper = std::min(upper, *obs.time2);
            any_failure = true;
            break;
        }
    }
    if (!any_failure) {
        return {false, "no failures with positive weight"};
    }
    if (lower > upper) {
        return {true, {}};
    }
    if (exact_hi >= exact_lo) {
        return {false, any_right ? "no right-censored time exceeds the single distinct failure time"
                                 : "no two distinct failures"};
    }
    return {false, "censored records are consistent with a single failure time"};
}

MleVerdict check_mle_exists(std::span<const Observation> data, const WeightVector &w) {
    return check_mle_exists(data, std::span<const double>(w.values));
}

double weibull_profile_eta(std::span<const Observation> data, std::span<const double> w, double beta) {
    if (data.size() != w.size()) {
        throw InputError("weibull_profile_eta: weight vector length does not match the data");
    }
    if (!(beta > 0.0)) {
        throw InputError("weibull_profile_eta: beta must be positive");
    }
    // log sum_all w c t^beta and log sum_failures w c, via log-sum-exp.
    std::vector<double> all_terms;
    double failure_weight = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Observation &obs = data[i];
        if (obs.kind != ObsKind::Exact && obs.kind != ObsKind::RightCensored) {
            throw InputError("weibull_profile_eta: only exact and right-censored records are supported");
        }
        if (!(w[i] > 0.0)) {
            continue;
        }
        all_terms.push_back(std::log(w[i] * double(obs.count)) + beta * std::log(obs.time));
        if (obs.kind == ObsKind::Exact) {
            failure_weight += w[i] * double(obs.count);
        }
    }
    if (!(failure_weight > 0.0)) {
        throw DegenerateError("no failures with positive weight");
    }
    const double peak = *std::max_element(all_terms.begin(), all_terms.end());
    double acc = 0.0;
    for (double v : all_terms) {
        acc += std::exp(v - peak);
    }
    const double log_sum = peak + std::log(acc);
    return std::exp((log_sum - std::log(failure_weight)) / beta);
}

double failures_present(std::span<const Observation> data, const WeightVector &w) {
    double n = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!data[i].is_failure_side() || !(w[i] > 0.0)) {
            continue;
        }
        n += w.scheme == WeightScheme::MultinomialInteger ? w[i] * double(data[i].count) : double(data[i].count);
    }
    return n;
}

} // namespace frw
