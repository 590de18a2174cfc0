#include "frw/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "frw/error.hpp"

namespace frw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// log(1 + d) - d without cancellation for small d.
double log1pmx(double d) {
    if (std::abs(d) > 0.1) {
        return std::log1p(d) - d;
    }
    // -(d^2/2 - d^3/3 + d^4/4 - ...)
    double term = d * d;
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
        double next = term / k;
        sum += (k % 2 == 0) ? next : -next;
        if (std::abs(next) < kEps * std::abs(sum)) {
            break;
        }
        term *= d;
    }
    return -sum;
}

// lgamma(a) - Stirling approximation.
double stirling_error(double a) {
    if (a < 10.0) {
        return std::lgamma(a) - ((a - 0.5) * std::log(a) - a + 0.5 * std::log(2.0 * std::numbers::pi));
    }
    const double r = 1.0 / a;
    const double r2 = r * r;
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 / 1188))));
}

unsigned iteration_cap(double kappa) { return 1000u + unsigned(20.0 * std::sqrt(kappa)); }

} // namespace

double log_gamma_kernel(double v, double kappa, double rel) {
    if (v == 0.0) {
        return -kInf;
    }
    if (kappa < 10.0) {
        return kappa * std::log(v) - v - std::lgamma(kappa);
    }
    return kappa * log1pmx(rel) + 0.5 * std::log(kappa / (2.0 * std::numbers::pi)) - stirling_error(kappa);
}

LogGammaPQ incomplete_gamma_log_pq(double v, double kappa, double rel) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw InputError("incomplete gamma: kappa must be positive and finite");
    }
    if (!(v >= 0.0)) {
        throw InputError("incomplete gamma: v must be non-negative");
    }
    if (v == 0.0) {
        return {-kInf, 0.0};
    }
    if (std::isinf(v)) {
        return {0.0, -kInf};
    }
    const double kernel = log_gamma_kernel(v, kappa, rel);
    const unsigned cap = iteration_cap(kappa);
    if (v < kappa + 1.0) {
        double term = 1.0, sum = 1.0;
        for (unsigned n = 1; n < cap; ++n) {
            term *= v / (kappa + n);
            sum += term;
            if (term < sum * kEps) {
                break;
            }
        }
        const double log_p = kernel - std::log(kappa) + std::log(sum);
        const double p = std::exp(log_p);
        return {log_p, p < 0.5 ? std::log1p(-p) : std::log(-std::expm1(log_p))};
    }
    // Modified Lentz evaluation of the continued fraction for Q.
    double b = v + 1.0 - kappa;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (unsigned i = 1; i < cap; ++i) {
        const double an = -double(i) * (double(i) - kappa);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = b + an / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            break;
        }
    }
    const double log_q = kernel + std::log(h);
    const double q = std::exp(log_q);
    return {q < 0.5 ? std::log1p(-q) : std::log(-std::expm1(log_q)), log_q};
}

LogGammaPQ incomplete_gamma_log_pq(double v, double kappa) {
    return incomplete_gamma_log_pq(v, kappa, v / kappa - 1.0);
}

double incomplete_gamma_regularized(double v, double kappa) {
    return std::exp(incomplete_gamma_log_pq(v, kappa).log_p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_log_cdf(double x) {
    if (x > 0.0) {
        return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    }
    if (x > -35.0) {
        return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    }
    // Asymptotic expansion of the Mills ratio.
    const double r = 1.0 / (x * x);
    const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_log_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InputError("normal_quantile: p must lie in (0, 1)");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double log_diff_exp(double a, double b) {
    if (b == -kInf) {
        return a;
    }
    if (!(a > b)) {
        return -kInf;
    }
    const double d = b - a;
    return a + (d > -std::numbers::ln2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

} // namespace frw
