#include <doctest.h>

#include <cmath>

#include "frw/error.hpp"
#include "frw/lifedata.hpp"
#include "frw/prediction.hpp"

using namespace frw;

namespace {

// A run whose every replicate equals the point estimate.
BootstrapRun constant_run(const ModelParams &p, std::size_t replicates = 150) {
    BootstrapRun run;
    run.family = p.family();
    run.replicates = replicates;
    run.point_fit.params = p;
    run.point_fit.converged = true;
    run.estimates.resize(long(replicates), long(p.size()));
    for (std::size_t b = 0; b < replicates; ++b) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            run.estimates(long(b), long(j)) = p[j];
        }
    }
    run.statuses.assign(replicates, ReplicateStatus{true, {}, false});
    return run;
}

const BootstrapRun &rocket_run() {
    static const BootstrapRun run = [] {
        BootstrapOptions o;
        o.replicates = 300;
        o.expand_units = true;
        return run_bootstrap(Family::Weibull, load_lifedata("rocket_motor"), o);
    }();
    return run;
}

std::vector<RiskSetUnit> synthetic_fleet(std::size_t n) {
    std::vector<RiskSetUnit> units;
    for (std::size_t i = 0; i < n; ++i) {
        units.push_back({1.0 + double(i % 17), "u" + std::to_string(i)});
    }
    return units;
}

} // namespace

TEST_CASE("conditional failure probability") {
    const auto w = ModelParams::weibull(10, 2);
    CHECK(conditional_failure_prob(w, 3, 0) == 0.0);
    CHECK(conditional_failure_prob(w, 3, 1e6) == doctest::Approx(1.0));
    CHECK(conditional_failure_prob(w, 3, INFINITY) == 1.0);
    const double direct = (std::exp(-0.09) - std::exp(-0.25)) / std::exp(-0.09);
    CHECK(conditional_failure_prob(w, 3, 2) == doctest::Approx(direct).epsilon(1e-12));
    const auto expo = ModelParams::weibull(4, 1);
    for (double age : {0.1, 2.0, 50.0}) {
        CHECK(conditional_failure_prob(expo, age, 3) == doctest::Approx(-std::expm1(-0.75)).epsilon(1e-12));
    }
    CHECK(conditional_failure_prob(ModelParams::weibull(1, 5), 1e3, 1) == 1.0);
    CHECK_THROWS_AS(conditional_failure_prob(w, 0, 1), InputError);
}

TEST_CASE("fleet point curve is the sum of conditional probabilities") {
    const auto &run = rocket_run();
    const auto fleet = synthetic_fleet(50);
    const auto grid = make_horizon_grid(10, 20);
    const PredictionCurve c = fleet_prediction(run, fleet, grid, {});
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0;
        for (const auto &u : fleet) {
            sum += conditional_failure_prob(run.point_fit.params, u.current_age, grid[g]);
        }
        CHECK(std::abs(c.point[g] - sum) <= 1e-12 * std::max(1.0, sum));
    }
}

TEST_CASE("fleet curves are monotone and bracket the point prediction") {
    const auto &run = rocket_run();
    const auto fleet = synthetic_fleet(50);
    const auto grid = make_horizon_grid(15, 30);
    std::vector<PredictionCurve> curves;
    for (double level : {0.8, 0.95, 0.99}) {
        FleetOptions fo;
        fo.level = level;
        curves.push_back(fleet_prediction(run, fleet, grid, fo));
        const auto &c = curves.back();
        for (std::size_t g = 0; g < grid.size(); ++g) {
            CHECK(c.lower[g] <= c.point[g]);
            CHECK(c.point[g] <= c.upper[g]);
            if (g > 0) {
                CHECK(c.point[g] >= c.point[g - 1]);
                CHECK(c.lower[g] >= c.lower[g - 1]);
                CHECK(c.upper[g] >= c.upper[g - 1]);
            }
        }
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double w80 = curves[0].upper[g] - curves[0].lower[g];
        const double w95 = curves[1].upper[g] - curves[1].lower[g];
        const double w99 = curves[2].upper[g] - curves[2].lower[g];
        CHECK(w99 >= w95);
        CHECK(w95 >= w80);
    }
}

TEST_CASE("certain failure gives a degenerate prediction") {
    const BootstrapRun run = constant_run(ModelParams::weibull(1, 3));
    const std::vector<RiskSetUnit> one{{2.0, "a"}};
    const std::vector<double> grid{0.0, 1e6};
    const PredictionCurve c = fleet_prediction(run, one, grid, {});
    CHECK(c.point[1] == doctest::Approx(1.0));
    CHECK(c.lower[1] == 1.0);
    CHECK(c.upper[1] == 1.0);
    CHECK(c.upper[0] == 0.0);
}

TEST_CASE("simulated counts follow the Bernoulli law for a single-draw run") {
    const auto p = ModelParams::weibull(10, 2);
    const BootstrapRun run = constant_run(p, 100);
    const std::vector<RiskSetUnit> one{{5.0, "a"}};
    const std::vector<double> grid{3.0};
    FleetOptions fo;
    fo.sims_per_draw = 1000; // 100 draws x 1000 = 1e5 inner simulations
    const auto counts = fleet_simulated_counts(run, one, grid, fo);
    REQUIRE(counts[0].size() == 100000);
    double hits = 0;
    for (double c : counts[0]) {
        hits += c;
    }
    const double rho = conditional_failure_prob(p, 5.0, 3.0);
    const double se = std::sqrt(rho * (1 - rho) / 1e5);
    CHECK(std::abs(hits / 1e5 - rho) < 3 * se);
}

TEST_CASE("fleet prediction is deterministic and validates its inputs") {
    const auto &run = rocket_run();
    const auto fleet = synthetic_fleet(10);
    const auto grid = make_horizon_grid(5, 5);
    FleetOptions fo;
    fo.threads = 1;
    const auto a = fleet_prediction(run, fleet, grid, fo);
    fo.threads = 3;
    const auto b = fleet_prediction(run, fleet, grid, fo);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK_THROWS_AS(fleet_prediction(run, std::vector<RiskSetUnit>{}, grid, fo), InputError);
    CHECK_THROWS_AS(fleet_prediction(run, fleet, std::vector<double>{1.0, 0.5}, fo), InputError);
    CHECK_THROWS_AS(fleet_prediction(constant_run(ModelParams::weibull(1, 1), 50), fleet, grid, fo), InputError);
}

TEST_CASE("individual prediction on a constant run equals the plug-in quantiles") {
    const auto p = ModelParams::weibull(10, 2);
    const BootstrapRun run = constant_run(p);
    const RiskSetUnit unit{4.0, "x"};
    const RemainingLife r = individual_prediction(run, unit, 0.95);
    // Closed-form conditional Weibull quantile: ((t0/eta)^beta - log(1-p))^(1/beta) * eta.
    auto q = [&](double prob) { return 10 * std::sqrt(std::pow(0.4, 2) - std::log1p(-prob)) - 4.0; };
    CHECK(r.lower == doctest::Approx(q(0.025)).epsilon(1e-9));
    CHECK(r.upper == doctest::Approx(q(0.975)).epsilon(1e-9));
    CHECK(r.lower >= 0.0);
}

TEST_CASE("older units have shorter upper remaining life under an increasing hazard") {
    const auto &run = rocket_run();
    const RemainingLife young = individual_prediction(run, {2.0, "young"}, 0.9);
    const RemainingLife old = individual_prediction(run, {15.0, "old"}, 0.9);
    CHECK(old.upper < young.upper);
    CHECK(old.lower >= 0.0);
    CHECK(young.lower >= 0.0);
    CHECK_THROWS_AS(individual_prediction(constant_run(ModelParams::weibull(1, 8)), {1e4, "ancient"}, 0.9),
                    NumericalError);
}
