#pragma once

#include <functional>
#include <vector>

namespace frw {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double f_tolerance = 1e-13; // relative spread of vertex values
    double x_tolerance = 1e-10; // simplex diameter
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimizes `f` from `start` with a simplex of per-coordinate edge `step`.
/// Non-finite values are treated as +infinity (infeasible points).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                             const std::vector<double> &start, const std::vector<double> &step,
                             const NelderMeadOptions &options = {});

} // namespace frw
