#include <doctest.h>

#include <cmath>
#include <numeric>

#include "frw/error.hpp"
#include "frw/lifedata.hpp"
#include "frw/mlfit.hpp"
#include "frw/rng.hpp"
#include "frw/special.hpp"

using namespace frw;

namespace {

std::vector<Observation> simulate_weibull(double eta, double beta, std::size_t n, std::uint64_t seed,
                                          double censor_at = INFINITY) {
    Stream s(seed, 0);
    std::vector<Observation> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = eta * std::pow(s.exponential(), 1.0 / beta);
        out.push_back(t < censor_at ? Observation::exact(t) : Observation::right(censor_at));
    }
    return out;
}

// Profile over eta by golden-section search on log eta.
double oracle_profile_beta(const std::vector<Observation> &data, double beta) {
    double a = std::log(1.0), b = std::log(1e4);
    const double g = (std::sqrt(5.0) - 1) / 2;
    auto f = [&](double le) { return -loglik(data, ModelParams::weibull(std::exp(le), beta)); };
    for (int i = 0; i < 200; ++i) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) < f(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return -f(0.5 * (a + b));
}

} // namespace

TEST_CASE("internal coordinates round trip") {
    for (const auto &p : {ModelParams::weibull(21.2, 8.1), ModelParams::lognormal(-0.3, 1.7),
                          ModelParams::gengamma(4.2, 0.51, 0.31), ModelParams::gengamma(4.2, 0.51, -11.5)}) {
        const auto x = to_internal(p);
        const auto q = from_internal(p.family(), x);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("rocket motor Weibull fit") {
    const auto data = load_lifedata("rocket_motor");
    const FitResult fit = fit_ml(Family::Weibull, data);
    CHECK(fit.converged);
    CHECK(fit.params[0] == doctest::Approx(21.228).epsilon(5e-4));
    CHECK(fit.params[1] == doctest::Approx(8.126).epsilon(5e-4));
    CHECK(fit.se[0] == doctest::Approx(4.591).epsilon(5e-3));
    CHECK(fit.se[1] == doctest::Approx(3.172).epsilon(5e-3));
    // The estimate is a stationary point of the likelihood in each coordinate.
    const double ll = fit.loglik;
    for (double f : {0.999, 1.001}) {
        CHECK(loglik(data, ModelParams::weibull(fit.params[0] * f, fit.params[1])) < ll);
        CHECK(loglik(data, ModelParams::weibull(fit.params[0], fit.params[1] * f)) < ll);
    }
}

TEST_CASE("rocket Wald intervals use the log-location-scale construction") {
    const auto data = load_lifedata("rocket_motor");
    const FitResult fit = fit_ml(Family::Weibull, data);
    const Interval beta = wald_interval(fit, "beta", 0.95);
    CHECK(beta.upper == doctest::Approx(34.6).epsilon(2e-3));
    const double z = normal_quantile(0.975);
    const double sigma = 1 / fit.params[1];
    const double se_sigma = fit.se[1] * sigma * sigma; // delta method from beta to sigma
    CHECK(beta.lower == doctest::Approx(1 / (sigma + z * se_sigma)).epsilon(1e-6));
    const Interval eta = wald_interval(fit, "eta", 0.95);
    const double se_mu = fit.se[0] / fit.params[0];
    CHECK(eta.lower == doctest::Approx(fit.params[0] * std::exp(-z * se_mu)).epsilon(1e-6));
    CHECK(eta.upper == doctest::Approx(fit.params[0] * std::exp(z * se_mu)).epsilon(1e-6));
}

TEST_CASE("rocket profile interval for beta matches a brute-force profile") {
    const auto data = load_lifedata("rocket_motor");
    const FitResult fit = fit_ml(Family::Weibull, data);
    const std::vector<double> w(data.size(), 1.0);
    const ProfileInterval pi = profile_likelihood_interval(Family::Weibull, data, w, fit, "beta", 0.95);
    CHECK_FALSE(pi.lower_open);
    CHECK_FALSE(pi.upper_open);
    const double cutoff = fit.loglik - 0.5 * std::pow(normal_quantile(0.975), 2);
    auto root = [&](double lo, double hi) {
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((oracle_profile_beta(data, mid) > cutoff) == (oracle_profile_beta(data, lo) > cutoff) ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double lo = root(1.0, fit.params[1]);
    const double hi = root(fit.params[1], 40.0);
    CHECK(pi.lower == doctest::Approx(lo).epsilon(1e-5));
    CHECK(pi.upper == doctest::Approx(hi).epsilon(1e-5));
    CHECK(pi.lower == doctest::Approx(2.963).epsilon(2e-3));
    CHECK(pi.upper == doctest::Approx(15.541).epsilon(2e-3));
    CHECK(profile_loglik(Family::Weibull, data, w, fit, "beta", 5.0) ==
          doctest::Approx(oracle_profile_beta(data, 5.0)).epsilon(1e-8));
}

TEST_CASE("lognormal fit on complete data has closed-form estimates and standard errors") {
    Stream s(17, 1);
    std::vector<Observation> data;
    double sum = 0;
    for (int i = 0; i < 60; ++i) {
        data.push_back(Observation::exact(std::exp(1.5 + 0.8 * s.normal())));
        sum += std::log(data.back().time);
    }
    const double mu = sum / 60;
    double ss = 0;
    for (const auto &o : data) {
        ss += std::pow(std::log(o.time) - mu, 2);
    }
    const double sigma = std::sqrt(ss / 60);
    const FitResult fit = fit_ml(Family::Lognormal, data);
    CHECK(fit.converged);
    CHECK(fit.params[0] == doctest::Approx(mu).epsilon(1e-7));
    CHECK(fit.params[1] == doctest::Approx(sigma).epsilon(1e-7));
    CHECK(fit.se[0] == doctest::Approx(sigma / std::sqrt(60.0)).epsilon(1e-4));
    CHECK(fit.se[1] == doctest::Approx(sigma / std::sqrt(120.0)).epsilon(1e-4));
}

TEST_CASE("integer weights match duplicated records") {
    const auto data = simulate_weibull(10, 2, 25, 3, 12.0);
    std::vector<double> w(data.size());
    std::vector<Observation> dup;
    Stream s(4, 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
        w[i] = double(s.below(3));
        for (int k = 0; k < int(w[i]); ++k) {
            dup.push_back(data[i]);
        }
    }
    const FitResult a = fit_ml(Family::Weibull, data, w);
    const FitResult b = fit_ml(Family::Weibull, dup);
    CHECK(a.params[0] == doctest::Approx(b.params[0]).epsilon(1e-7));
    CHECK(a.params[1] == doctest::Approx(b.params[1]).epsilon(1e-7));
    CHECK(a.loglik == doctest::Approx(b.loglik).epsilon(1e-10));
}

TEST_CASE("Weibull fit recovers simulation truth") {
    const auto data = simulate_weibull(50, 1.7, 800, 9, 70.0);
    const FitResult fit = fit_ml(Family::Weibull, data);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params[0] - 50) < 4 * fit.se[0]);
    CHECK(std::abs(fit.params[1] - 1.7) < 4 * fit.se[1]);
}

TEST_CASE("generalized gamma nests the Weibull fit") {
    const auto data = simulate_weibull(5, 2.5, 1500, 21);
    const FitResult wb = fit_ml(Family::Weibull, data);
    const FitResult gg = fit_ml(Family::GenGamma, data);
    CHECK(gg.converged);
    CHECK(gg.loglik >= wb.loglik - 1e-8);
    CHECK(std::abs(gg.params[2] - 1.0) < 4 * gg.se[2]);
    const ProfileInterval pi = profile_likelihood_interval(Family::GenGamma, data, std::vector<double>(data.size(), 1.0),
                                                           gg, "lambda", 0.95);
    CHECK(pi.lower < gg.params[2]);
    CHECK(pi.upper > gg.params[2]);
}

TEST_CASE("warm starts reach the same optimum") {
    const auto data = simulate_weibull(10, 3, 40, 12, 11.0);
    const FitResult cold = fit_ml(Family::Weibull, data);
    FitOptions warm;
    warm.start = std::vector<double>{std::log(30.0), -std::log(0.5)};
    const FitResult hot = fit_ml(Family::Weibull, data, warm);
    CHECK(hot.params[0] == doctest::Approx(cold.params[0]).epsilon(1e-6));
    CHECK(hot.params[1] == doctest::Approx(cold.params[1]).epsilon(1e-6));
}

TEST_CASE("nonexistent estimates raise a degenerate error") {
    const std::vector<Observation> data{Observation::right(1), Observation::right(2), Observation::exact(3)};
    CHECK_THROWS_AS(fit_ml(Family::Weibull, data), DegenerateError);
    CHECK_THROWS_AS(fit_ml(Family::GenGamma, std::vector<Observation>{Observation::exact(1), Observation::exact(2)}),
                    DegenerateError);
    CHECK_THROWS_AS(fit_ml(Family::Weibull, data, std::vector<double>{1.0}), InputError);
    CHECK_THROWS_AS(parameter_index(Family::Weibull, "mu"), InputError);
}
