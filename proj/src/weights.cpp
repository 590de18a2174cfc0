#include "frw/weights.hpp"

#include <cmath>
#include <limits>

#include "frw/error.hpp"

namespace frw {

std::string_view to_string(WeightScheme scheme) {
    switch (scheme) {
    case WeightScheme::MultinomialInteger:
        return "multinomial";
    case WeightScheme::DirichletFractional:
        return "dirichlet";
    case WeightScheme::IidExponential:
        return "exponential";
    }
    return "unknown";
}

WeightScheme parse_weight_scheme(std::string_view name) {
    if (name == "multinomial" || name == "resampling") {
        return WeightScheme::MultinomialInteger;
    }
    if (name == "dirichlet" || name == "frw") {
        return WeightScheme::DirichletFractional;
    }
    if (name == "exponential" || name == "iid") {
        return WeightScheme::IidExponential;
    }
    throw InputError("unknown weight scheme '" + std::string(name) + "'");
}

WeightVector WeightVector::ones(std::size_t n) {
    return WeightVector{std::vector<double>(n, 1.0), WeightScheme::MultinomialInteger, 0};
}

WeightVector gen_weights(WeightScheme scheme, std::size_t n, Stream &stream) {
    if (n == 0) {
        throw InputError("gen_weights: n must be at least 1");
    }
    WeightVector w{std::vector<double>(n, 0.0), scheme, stream.stream_id()};
    switch (scheme) {
    case WeightScheme::MultinomialInteger:
        for (std::size_t k = 0; k < n; ++k) {
            w.values[stream.below(n)] += 1.0;
        }
        break;
    case WeightScheme::DirichletFractional: {
        double total = 0.0;
        for (auto &v : w.values) {
            v = stream.exponential();
            total += v;
        }
        const double scale = double(n) / total;
        for (auto &v : w.values) {
            v *= scale;
        }
        break;
    }
    case WeightScheme::IidExponential:
        for (auto &v : w.values) {
            v = stream.exponential();
        }
        break;
    }
    return w;
}

void validate_weights(const WeightVector &w) {
    const double n = double(w.size());
    double sum = 0.0;
    for (double v : w.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InputError("weights must be finite and non-negative");
        }
        sum += v;
    }
    switch (w.scheme) {
    case WeightScheme::MultinomialInteger:
        for (double v : w.values) {
            if (v != std::floor(v)) {
                throw InputError("multinomial weights must be integers");
            }
        }
        if (sum != n) {
            throw InputError("multinomial weights must sum to n");
        }
        break;
    case WeightScheme::DirichletFractional:
        if (std::abs(sum - n) > 1e-12 * n) {
            throw InputError("dirichlet weights must sum to n");
        }
        [[fallthrough]];
    case WeightScheme::IidExponential:
        for (double v : w.values) {
            if (!(v > 0.0)) {
                throw InputError("fractional weights must be strictly positive");
            }
        }
        break;
    }
}

WeightedMoments weighted_moments(std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size()) {
        throw InputError("weighted_moments: length mismatch");
    }
    double sw = 0.0, swx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (w[i] < 0.0) {
            throw InputError("weighted_moments: negative weight");
        }
        sw += w[i];
        swx += w[i] * x[i];
    }
    if (!(sw > 0.0)) {
        throw InputError("weighted_moments: weights sum to zero");
    }
    const double mean = swx / sw;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss += w[i] * (x[i] - mean) * (x[i] - mean);
    }
    return {mean, ss / sw};
}

double prob_degenerate_resample(std::uint64_t n, std::uint64_t r) {
    if (n == 0) {
        throw InputError("prob_degenerate_resample: n must be at least 1");
    }
    if (r > n) {
        throw InputError("prob_degenerate_resample: more failures than units");
    }
    if (r == 0) {
        return 1.0;
    }
    if (r == n) {
        return n == 1 ? 1.0 : 0.0;
    }
    const double nn = double(n);
    const double p = double(r) / nn;
    // log P(X=0) = n log(1-p); log P(X=1) = log n + log p + (n-1) log(1-p)
    const double log_q = std::log1p(-p);
    const double log_p0 = nn * log_q;
    const double log_p1 = std::log(nn) + std::log(p) + (nn - 1.0) * log_q;
    const double hi = std::max(log_p0, log_p1);
    return std::exp(hi) * (std::exp(log_p0 - hi) + std::exp(log_p1 - hi));
}

} // namespace frw
