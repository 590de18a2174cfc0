#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frw/distributions.hpp"
#include "frw/likelihood.hpp"

namespace frw {

// Internal (unconstrained) coordinates used by the optimizer:
//   Weibull   (log eta, log sigma) with sigma = 1/beta
//   Lognormal (mu, log sigma)
//   GenGamma  (mu, log sigma, u) with lambda = 12 tanh(u / 12)
std::vector<double> to_internal(const ModelParams &params);
ModelParams from_internal(Family family, std::span<const double> internal);
/// d(reporting) / d(internal), diagonal for every family.
std::vector<double> reporting_jacobian(const ModelParams &params);

/// Estimates within this distance of +/-12 are reported as boundary hits.
inline constexpr double kLambdaBoundaryMargin = 1e-3;

struct FitOptions {
    int max_iterations = 2000; // per restart
    double gradient_tolerance = 1e-6;
    /// Warm start in internal coordinates, tried before the default starts.
    std::optional<std::vector<double>> start;
    /// Skip the observed-information computation (bootstrap replicates).
    bool compute_information = true;
};

struct FitResult {
    ModelParams params = ModelParams::weibull(1.0, 1.0);
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0; // max-norm in internal coordinates
    std::vector<double> internal;
    Eigen::MatrixXd info_matrix; // negative Hessian, internal coordinates
    std::vector<double> se;      // reporting parameterization; NaN if unavailable
    std::vector<std::string> boundary_hit;

    bool info_positive_definite() const;
    /// Covariance of the reporting parameters by the delta method.
    Eigen::MatrixXd reporting_covariance() const;
};

/// Weighted maximum likelihood. Throws DegenerateError when the estimate
/// does not exist for the weighted data; an iteration cap without
/// convergence is reported through `converged`, never thrown.
FitResult fit_ml(Family family, std::span<const Observation> data, std::span<const double> w,
                 const FitOptions &options = {});
FitResult fit_ml(Family family, std::span<const Observation> data, const WeightVector &w,
                 const FitOptions &options = {});
FitResult fit_ml(Family family, std::span<const Observation> data, const FitOptions &options = {});

/// Index of a reporting parameter name; throws InputError if unknown.
std::size_t parameter_index(Family family, const std::string &name);

struct Interval {
    double lower;
    double upper;
};

/// Normal-approximation interval, symmetric in the log-location-scale
/// parameters (mu, sigma, lambda). Weibull eta = exp(mu) and beta = 1/sigma
/// take their endpoints from the mu and sigma intervals; a sigma interval
/// reaching zero gives an infinite upper endpoint for beta.
Interval wald_interval(const FitResult &fit, const std::string &param, double level);

struct ProfileInterval {
    double lower;
    double upper;
    bool lower_open = false; // the profile never dropped below the cutoff
    bool upper_open = false;
};

/// Loglikelihood maximized over the other parameters with `param` held at `value`.
double profile_loglik(Family family, std::span<const Observation> data, std::span<const double> w,
                      const FitResult &fit, const std::string &param, double value);

ProfileInterval profile_likelihood_interval(Family family, std::span<const Observation> data,
                                            std::span<const double> w, const FitResult &fit,
                                            const std::string &param, double level);

} // namespace frw
