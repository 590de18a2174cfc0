#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/binomial.hpp>

#include "frw/error.hpp"
#include "frw/rng.hpp"
#include "frw/weights.hpp"

using namespace frw;

TEST_CASE("stream is a pure function of seed and stream id") {
    Stream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::vector<std::uint64_t> xa, xb, xc, xd;
    for (int i = 0; i < 50; ++i) {
        xa.push_back(a());
        xb.push_back(b());
        xc.push_back(c());
        xd.push_back(d());
    }
    CHECK(xa == xb);
    CHECK(xa != xc);
    CHECK(xa != xd);
}

TEST_CASE("uniform variants respect their ranges") {
    Stream s(1, 1);
    double lo = 1, hi = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform_open();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        const double p = s.uniform_pos();
        REQUIRE(p > 0.0);
        REQUIRE(p <= 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 1e-3);
    CHECK(hi > 1 - 1e-3);
}

TEST_CASE("below is unbiased over a small range") {
    Stream s(9, 3);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        ++counts[s.below(7)];
    }
    for (int c : counts) {
        // Binomial(n, 1/7) standard deviation is about 92.
        CHECK(std::abs(c - n / 7) < 460);
    }
}

TEST_CASE("exponential and normal moments") {
    Stream s(5, 5);
    const int n = 200000;
    double se = 0, se2 = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double e = s.exponential();
        REQUIRE(e > 0.0);
        se += e;
        se2 += e * e;
        const double z = s.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(se2 / n == doctest::Approx(2.0).epsilon(0.03));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("child streams differ from the parent and each other") {
    Stream p(11, 2);
    Stream c1 = p.child(1), c2 = p.child(2), c1b = p.child(1);
    CHECK(c1() == c1b());
    Stream q(11, 2);
    std::set<std::uint64_t> first{q(), c2(), Stream(11, 2).child(1)()};
    CHECK(first.size() == 3);
}

TEST_CASE("scheme names parse") {
    CHECK(parse_weight_scheme("multinomial") == WeightScheme::MultinomialInteger);
    CHECK(parse_weight_scheme("resampling") == WeightScheme::MultinomialInteger);
    CHECK(parse_weight_scheme("dirichlet") == WeightScheme::DirichletFractional);
    CHECK(parse_weight_scheme("frw") == WeightScheme::DirichletFractional);
    CHECK(parse_weight_scheme("exponential") == WeightScheme::IidExponential);
    CHECK_THROWS_AS(parse_weight_scheme("poisson"), InputError);
    for (auto s : {WeightScheme::MultinomialInteger, WeightScheme::DirichletFractional, WeightScheme::IidExponential}) {
        CHECK(parse_weight_scheme(to_string(s)) == s);
    }
}

TEST_CASE("weight vectors satisfy their scheme invariants") {
    Stream s(3, 1);
    for (std::size_t n : {1u, 2u, 15u, 200u}) {
        const auto m = gen_weights(WeightScheme::MultinomialInteger, n, s);
        CHECK(m.size() == n);
        double sum = 0;
        for (double v : m.values) {
            CHECK(v >= 0.0);
            CHECK(v == std::floor(v));
            sum += v;
        }
        CHECK(sum == double(n));
        CHECK_NOTHROW(validate_weights(m));

        const auto d = gen_weights(WeightScheme::DirichletFractional, n, s);
        const double dsum = std::accumulate(d.values.begin(), d.values.end(), 0.0);
        CHECK(dsum == doctest::Approx(double(n)).epsilon(1e-12));
        CHECK(std::all_of(d.values.begin(), d.values.end(), [](double v) { return v > 0.0; }));
        CHECK_NOTHROW(validate_weights(d));

        const auto e = gen_weights(WeightScheme::IidExponential, n, s);
        CHECK(std::all_of(e.values.begin(), e.values.end(), [](double v) { return v > 0.0; }));
    }
    CHECK_THROWS_AS(gen_weights(WeightScheme::DirichletFractional, 0, s), InputError);
}

TEST_CASE("validate_weights rejects broken vectors") {
    WeightVector w{{1.0, 0.5}, WeightScheme::MultinomialInteger, 1};
    CHECK_THROWS_AS(validate_weights(w), InputError);
    WeightVector d{{1.0, 0.5}, WeightScheme::DirichletFractional, 1};
    CHECK_THROWS_AS(validate_weights(d), InputError);
    WeightVector e{{1.0, -0.5}, WeightScheme::IidExponential, 1};
    CHECK_THROWS_AS(validate_weights(e), InputError);
}

TEST_CASE("n = 1 weights are the single value 1 for sum-constrained schemes") {
    Stream s(1, 1);
    CHECK(gen_weights(WeightScheme::MultinomialInteger, 1, s)[0] == 1.0);
    CHECK(gen_weights(WeightScheme::DirichletFractional, 1, s)[0] == doctest::Approx(1.0));
}

TEST_CASE("weighted moments against a direct computation") {
    const std::vector<double> x{1, 2, 3, 4, 10};
    const std::vector<double> w{0.5, 1.5, 1, 2, 0};
    const auto m = weighted_moments(x, w);
    double sw = 0, sx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
    }
    const double mean = sx / sw;
    double v = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        v += w[i] * (x[i] - mean) * (x[i] - mean);
    }
    CHECK(m.mean == doctest::Approx(mean));
    CHECK(m.variance == doctest::Approx(v / sw));
    const std::vector<double> ones(5, 1.0);
    CHECK(weighted_moments(x, ones).mean == doctest::Approx(4.0));
}

TEST_CASE("degenerate-resample probability matches the binomial cdf") {
    for (auto [n, r] : std::vector<std::pair<unsigned, unsigned>>{{10, 2}, {50, 3}, {1703, 6}, {1940, 3}, {20, 20}}) {
        const boost::math::binomial_distribution<double> bin(n, double(r) / n);
        const double oracle = boost::math::cdf(bin, 1.0);
        CHECK(prob_degenerate_resample(n, r) == doctest::Approx(oracle).epsilon(1e-10));
    }
    CHECK(prob_degenerate_resample(10, 0) == 1.0);
    CHECK(prob_degenerate_resample(1, 1) == 1.0);
    CHECK(prob_degenerate_resample(5, 5) == 0.0);
}
