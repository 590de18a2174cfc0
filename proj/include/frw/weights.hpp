#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frw/rng.hpp"

namespace frw {

enum class WeightScheme {
    MultinomialInteger,  // classical resampling expressed as integer weights
    DirichletFractional, // uniform Dirichlet times n
    IidExponential,      // iid unit-mean exponentials, no sum constraint
};

std::string_view to_string(WeightScheme scheme);
/// Accepts "multinomial"/"resampling", "dirichlet"/"frw", "exponential"/"iid".
WeightScheme parse_weight_scheme(std::string_view name);

struct WeightVector {
    std::vector<double> values;
    WeightScheme scheme = WeightScheme::DirichletFractional;
    std::uint64_t replicate_id = 0;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    /// All-ones vector; reproduces the ordinary (unweighted) likelihood.
    static WeightVector ones(std::size_t n);
};

/// Draws one weight vector of length n. Throws InputError for n == 0.
WeightVector gen_weights(WeightScheme scheme, std::size_t n, Stream &stream);

/// Throws InputError if `w` violates the invariants of its scheme.
void validate_weights(const WeightVector &w);

struct WeightedMoments {
    double mean;
    double variance;
};

/// Weighted mean and (divide-by-sum-of-weights) variance.
WeightedMoments weighted_moments(std::span<const double> x, std::span<const double> w);

/// P(X <= 1) for X ~ Binomial(n, r/n): the chance that a resample of n units
/// from data with r failures contains at most one failure.
double prob_degenerate_resample(std::uint64_t n, std::uint64_t r);

} // namespace frw
