#include "frw/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace frw {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

} // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                             const std::vector<double> &start, const std::vector<double> &step,
                             const NelderMeadOptions &options) {
    const std::size_t n = start.size();
    auto eval = [&](const std::vector<double> &x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = eval(simplex[i]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto along = [&](double coef, const std::vector<double> &worst, std::vector<double> &out) {
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
        }
    };

    NelderMeadResult result;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back(), second_worst = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        const double spread = values[worst] - values[best];
        if (std::isfinite(spread) && spread <= options.f_tolerance * (std::abs(values[best]) + 1e-8) &&
            diameter <= options.x_tolerance * (1.0 + std::abs(simplex[best][0]))) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += simplex[i][j] / double(n);
            }
        }

        along(kReflect, simplex[worst], trial);
        const double f_reflect = eval(trial);
        if (f_reflect < values[best]) {
            along(kExpand, simplex[worst], trial2);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }
        if (f_reflect < values[worst]) {
            along(kContract, simplex[worst], trial2); // outside
            const double f_c = eval(trial2);
            if (f_c <= f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_c;
                continue;
            }
        } else {
            along(-kContract, simplex[worst], trial2); // inside
            const double f_c = eval(trial2);
            if (f_c < values[worst]) {
                simplex[worst] = trial2;
                values[worst] = f_c;
                continue;
            }
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + kShrink * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = std::size_t(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    result.iterations = iter;
    return result;
}

} // namespace frw
