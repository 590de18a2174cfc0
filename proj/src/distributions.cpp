#include "frw/distributions.hpp"

#include <cmath>
#include <limits>

#include "frw/error.hpp"
#include "frw/special.hpp"

namespace frw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this |lambda| the generalized gamma is evaluated as the lognormal.
constexpr double kLambdaSeam = 1e-4;

struct LogForms {
    double log_pdf;
    double log_cdf;
    double log_survival;
};

// All forms in terms of w = (log t - mu) / sigma; log_pdf is the density of w.
LogForms standardized(const ModelParams &p, double w) {
    double lambda = p.shape();
    if (p.family() == Family::Lognormal || (p.family() == Family::GenGamma && std::abs(lambda) < kLambdaSeam)) {
        return {normal_log_pdf(w), normal_log_cdf(w), normal_log_cdf(-w)};
    }
    if (p.family() == Family::Weibull || lambda == 1.0) {
        // Smallest extreme value: closed forms.
        const double ew = std::exp(w);
        const double log_s = -ew;
        // log(1 - exp(-x)) = log(x) - x/2 + O(x^2) keeps the far lower tail finite.
        const double log_cdf = ew < 1e-8 ? w - 0.5 * ew : std::log(-std::expm1(log_s));
        return {w - ew, log_cdf, log_s};
    }
    // Phi_lg(lambda w + log(lambda^-2), lambda^-2): the incomplete gamma at
    // v = kappa * exp(lambda w), with v / kappa - 1 = expm1(lambda w).
    const double kappa = 1.0 / (lambda * lambda);
    const double lw = lambda * w;
    const double log_v = std::log(kappa) + lw;
    if (log_v < -600.0) {
        // v is far below the series' second term: P = v^kappa / Gamma(kappa + 1) to double precision,
        // computed in logs because v itself may underflow.
        const double log_p = kappa * log_v - std::lgamma(kappa + 1.0);
        const double log_q = -std::exp(log_p);
        const double log_density = std::log(std::abs(lambda)) + kappa * log_v - std::lgamma(kappa);
        return lambda > 0 ? LogForms{log_density, log_p, log_q} : LogForms{log_density, log_q, log_p};
    }
    const double rel = std::expm1(lw);
    const double v = kappa * std::exp(lw);
    double log_density = std::log(std::abs(lambda)) + log_gamma_kernel(v, kappa, rel);
    if (!std::isfinite(v)) {
        log_density = -kInf;
        return lambda > 0 ? LogForms{log_density, 0.0, -kInf} : LogForms{log_density, -kInf, 0.0};
    }
    const LogGammaPQ pq = incomplete_gamma_log_pq(v, kappa, rel);
    if (lambda > 0.0) {
        return {log_density, pq.log_p, pq.log_q};
    }
    return {log_density, pq.log_q, pq.log_p};
}

void check_finite(double x, const char *what) {
    if (!std::isfinite(x)) {
        throw InputError(std::string("non-finite parameter ") + what);
    }
}

} // namespace

std::string_view to_string(Family family) {
    switch (family) {
    case Family::Weibull:
        return "weibull";
    case Family::Lognormal:
        return "lognormal";
    case Family::GenGamma:
        return "gengamma";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "weibull") {
        return Family::Weibull;
    }
    if (name == "lognormal") {
        return Family::Lognormal;
    }
    if (name == "gengamma" || name == "generalized-gamma") {
        return Family::GenGamma;
    }
    throw InputError("unknown distribution family '" + std::string(name) + "'");
}

std::size_t parameter_count(Family family) { return family == Family::GenGamma ? 3 : 2; }

std::vector<std::string> parameter_names(Family family) {
    switch (family) {
    case Family::Weibull:
        return {"eta", "beta"};
    case Family::Lognormal:
        return {"mu", "sigma"};
    case Family::GenGamma:
        return {"mu", "sigma", "lambda"};
    }
    return {};
}

ModelParams::ModelParams(Family family, std::array<double, 3> values) : family_(family), values_(values) {}

ModelParams ModelParams::weibull(double eta, double beta) {
    check_finite(eta, "eta");
    check_finite(beta, "beta");
    if (!(eta > 0.0) || !(beta > 0.0)) {
        throw InputError("weibull: eta and beta must be positive");
    }
    return ModelParams(Family::Weibull, {eta, beta, 1.0});
}

ModelParams ModelParams::lognormal(double mu, double sigma) {
    check_finite(mu, "mu");
    check_finite(sigma, "sigma");
    if (!(sigma > 0.0)) {
        throw InputError("lognormal: sigma must be positive");
    }
    return ModelParams(Family::Lognormal, {mu, sigma, 0.0});
}

ModelParams ModelParams::gengamma(double mu, double sigma, double lambda) {
    check_finite(mu, "mu");
    check_finite(sigma, "sigma");
    check_finite(lambda, "lambda");
    if (!(sigma > 0.0)) {
        throw InputError("gengamma: sigma must be positive");
    }
    if (std::abs(lambda) > kLambdaBound) {
        throw InputError("gengamma: lambda outside [-12, 12]");
    }
    return ModelParams(Family::GenGamma, {mu, sigma, lambda});
}

ModelParams ModelParams::from_values(Family family, const std::vector<double> &values) {
    if (values.size() != parameter_count(family)) {
        throw InputError("wrong number of parameters for " + std::string(to_string(family)));
    }
    switch (family) {
    case Family::Weibull:
        return weibull(values[0], values[1]);
    case Family::Lognormal:
        return lognormal(values[0], values[1]);
    case Family::GenGamma:
        return gengamma(values[0], values[1], values[2]);
    }
    throw InputError("unknown family");
}

double ModelParams::location() const noexcept {
    return family_ == Family::Weibull ? std::log(values_[0]) : values_[0];
}

double ModelParams::scale() const noexcept { return family_ == Family::Weibull ? 1.0 / values_[1] : values_[1]; }

double ModelParams::shape() const noexcept {
    switch (family_) {
    case Family::Weibull:
        return 1.0;
    case Family::Lognormal:
        return 0.0;
    case Family::GenGamma:
        return values_[2];
    }
    return 0.0;
}

DistEval dist_eval(const ModelParams &params, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw InputError("dist_eval: t must be positive and finite");
    }
    const double sigma = params.scale();
    const double log_t = std::log(t);
    const double w = (log_t - params.location()) / sigma;
    const LogForms f = standardized(params, w);
    const double log_pdf = f.log_pdf - std::log(sigma) - log_t;
    return {std::exp(log_pdf), std::exp(f.log_cdf), log_pdf, f.log_cdf, f.log_survival};
}

namespace {

// Solves for w with the standardized log-cdf (lower half) or log-survival
// (upper half) equal to the target. Bracket expansion, then Illinois steps
// with a bisection fallback.
double solve_standardized(const ModelParams &params, double log_p, double log_s) {
    const bool use_lower = log_p < std::log(0.5);
    auto residual = [&](double w) {
        const LogForms f = standardized(params, w);
        return use_lower ? f.log_cdf - log_p : log_s - f.log_survival;
    };
    double lo = -1.0, hi = 1.0;
    double f_lo = residual(lo), f_hi = residual(hi);
    for (int i = 0; i < 200 && f_lo > 0.0; ++i) {
        hi = lo;
        f_hi = f_lo;
        lo = 2.0 * lo - 1.0;
        f_lo = residual(lo);
    }
    for (int i = 0; i < 200 && f_hi < 0.0; ++i) {
        lo = hi;
        f_lo = f_hi;
        hi = 2.0 * hi + 1.0;
        f_hi = residual(hi);
    }
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
        throw NumericalError("quantile: failed to bracket the root");
    }
    int side = 0;
    for (int iter = 0; iter < 200; ++iter) {
        if (f_lo == 0.0) {
            return lo;
        }
        if (f_hi == 0.0) {
            return hi;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo))) {
            break;
        }
        double mid;
        if (std::isfinite(f_lo) && std::isfinite(f_hi)) {
            mid = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            if (!(mid > lo && mid < hi)) {
                mid = 0.5 * (lo + hi);
            }
        } else {
            mid = 0.5 * (lo + hi);
        }
        // Fall back to bisection every few steps to guarantee progress.
        if (iter % 4 == 3) {
            mid = 0.5 * (lo + hi);
        }
        const double f_mid = residual(mid);
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
            if (side == -1) {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if (side == 1) {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    return 0.5 * (lo + hi);
}

double from_standardized(const ModelParams &params, double w) {
    return std::exp(params.location() + params.scale() * w);
}

} // namespace

double dist_quantile(const ModelParams &params, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InputError("dist_quantile: p must lie in (0, 1)");
    }
    switch (params.family()) {
    case Family::Weibull:
        return params[0] * std::pow(-std::log1p(-p), 1.0 / params[1]);
    case Family::Lognormal:
        return from_standardized(params, normal_quantile(p));
    case Family::GenGamma:
        return from_standardized(params, solve_standardized(params, std::log(p), std::log1p(-p)));
    }
    throw InputError("unknown family");
}

double dist_quantile_log_survival(const ModelParams &params, double log_s) {
    if (!(log_s < 0.0) || std::isnan(log_s)) {
        throw InputError("dist_quantile_log_survival: target must be negative");
    }
    if (log_s == -kInf) {
        throw InputError("dist_quantile_log_survival: survival target is zero");
    }
    const double p = -std::expm1(log_s);
    switch (params.family()) {
    case Family::Weibull:
        return params[0] * std::pow(-log_s, 1.0 / params[1]);
    case Family::Lognormal:
        if (log_s > std::log(1e-300)) {
            return from_standardized(params, -normal_quantile(std::exp(log_s)));
        }
        return from_standardized(params, solve_standardized(params, std::log(p), log_s));
    case Family::GenGamma:
        return from_standardized(params, solve_standardized(params, std::log(p), log_s));
    }
    throw InputError("unknown family");
}

} // namespace frw
