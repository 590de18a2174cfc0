#pragma once

// Special functions shared by the distribution kernels.

namespace frw {

/// Regularized lower incomplete gamma P(kappa, v) = int_0^v x^(kappa-1) e^-x dx / Gamma(kappa).
/// Series for v < kappa + 1, continued fraction otherwise.
double incomplete_gamma_regularized(double v, double kappa);

/// log P(kappa, v) and log Q(kappa, v) = log(1 - P), each computed without
/// forming the other first, so both stay accurate deep in the tails.
struct LogGammaPQ {
    double log_p;
    double log_q;
};
LogGammaPQ incomplete_gamma_log_pq(double v, double kappa);
/// Same, with rel = v / kappa - 1 supplied by the caller. Callers that know
/// rel to full precision (large kappa) avoid the cancellation in v - kappa.
LogGammaPQ incomplete_gamma_log_pq(double v, double kappa, double rel);

/// log(v^kappa e^-v / Gamma(kappa)), accurate for large kappa when rel = v/kappa - 1 is given.
double log_gamma_kernel(double v, double kappa, double rel);

double normal_cdf(double x);
double normal_log_cdf(double x);
double normal_log_pdf(double x);
/// Inverse standard normal cdf; p in (0, 1).
double normal_quantile(double p);

/// log(exp(a) - exp(b)) for a >= b.
double log_diff_exp(double a, double b);

} // namespace frw
