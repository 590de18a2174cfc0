#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace frw {

enum class Family { Weibull, Lognormal, GenGamma };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);
std::size_t parameter_count(Family family);
/// Reporting names: (eta, beta), (mu, sigma) or (mu, sigma, lambda).
std::vector<std::string> parameter_names(Family family);

/// Operational box for the generalized gamma shape parameter.
inline constexpr double kLambdaBound = 12.0;

/// Parameters of one lifetime distribution, stored in the family's reporting
/// parameterization. Weibull(eta, beta) is the log-location-scale member with
/// mu = log(eta) and sigma = 1 / beta.
class ModelParams {
  public:
    static ModelParams weibull(double eta, double beta);
    static ModelParams lognormal(double mu, double sigma);
    static ModelParams gengamma(double mu, double sigma, double lambda);
    /// Builds from reporting values in parameter_names() order.
    static ModelParams from_values(Family family, const std::vector<double> &values);

    Family family() const noexcept { return family_; }
    std::size_t size() const noexcept { return parameter_count(family_); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::vector<double> values() const { return {values_.begin(), values_.begin() + long(size())}; }

    /// Log-location and log-scale of the underlying log-time distribution.
    double location() const noexcept;
    double scale() const noexcept;
    /// Generalized gamma shape; 1 for Weibull, 0 for lognormal.
    double shape() const noexcept;

  private:
    ModelParams(Family family, std::array<double, 3> values);

    Family family_;
    std::array<double, 3> values_;
};

struct DistEval {
    double pdf;
    double cdf;
    double log_pdf;
    double log_cdf;
    double log_survival;
};

/// Density, cdf and log forms at time t > 0.
DistEval dist_eval(const ModelParams &params, double t);

/// Time t with cdf(t) = p, for p in (0, 1).
double dist_quantile(const ModelParams &params, double p);
/// Time t with log(1 - cdf(t)) = log_s, for log_s < 0. Stays accurate when
/// the survival target is far below double resolution of 1 - p.
double dist_quantile_log_survival(const ModelParams &params, double log_s);

} // namespace frw
