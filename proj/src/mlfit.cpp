#include "frw/mlfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frw/error.hpp"
#include "frw/nelder_mead.hpp"
#include "frw/special.hpp"

namespace frw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// |u| beyond this maps to lambda within 1e-12 of the bound.
constexpr double kMaxShapeCoordinate = 200.0;
constexpr int kPolishIterations = 40;

double clamp_shape(double u) { return std::clamp(u, -kMaxShapeCoordinate, kMaxShapeCoordinate); }

class Objective {
  public:
    Objective(Family family, std::span<const Observation> data, std::span<const double> w)
        : family_(family), data_(data), w_(w) {}

    double operator()(std::span<const double> internal) const {
        try {
            return weighted_loglik(data_, w_, from_internal(family_, internal));
        } catch (const InputError &) {
            return -kInf;
        }
    }

    Family family() const { return family_; }

  private:
    Family family_;
    std::span<const Observation> data_;
    std::span<const double> w_;
};

// Restricts an objective to the coordinates not listed in `fixed_index`.
struct Slice {
    const Objective &objective;
    std::vector<double> base;
    std::optional<std::size_t> fixed_index;

    std::vector<double> embed(std::span<const double> free) const {
        std::vector<double> full = base;
        std::size_t j = 0;
        for (std::size_t i = 0; i < full.size(); ++i) {
            if (fixed_index && i == *fixed_index) {
                continue;
            }
            full[i] = free[j++];
        }
        return full;
    }
    std::vector<double> project(std::span<const double> full) const {
        std::vector<double> free;
        for (std::size_t i = 0; i < full.size(); ++i) {
            if (!(fixed_index && i == *fixed_index)) {
                free.push_back(full[i]);
            }
        }
        return free;
    }
    double operator()(std::span<const double> free) const { return objective(embed(free)); }
};

template <class F>
Eigen::VectorXd gradient(const F &f, const std::vector<double> &x) {
    const std::size_t n = x.size();
    Eigen::VectorXd g(static_cast<long>(n));
    std::vector<double> y = x;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = 1e-4 * std::max(1.0, std::abs(x[i]));
        double v[4];
        const double offsets[4] = {-2 * h, -h, h, 2 * h};
        for (int k = 0; k < 4; ++k) {
            y[i] = x[i] + offsets[k];
            v[k] = f(y);
        }
        y[i] = x[i];
        g(long(i)) = (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h);
    }
    return g;
}

template <class F>
Eigen::MatrixXd hessian(const F &f, const std::vector<double> &x) {
    const std::size_t n = x.size();
    Eigen::MatrixXd hess(static_cast<long>(n), static_cast<long>(n));
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = std::max(1e-5, 1e-5 * std::abs(x[i]));
    }
    const double f0 = f(x);
    std::vector<double> y = x;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x[i] + h[i];
        const double fp = f(y);
        y[i] = x[i] - h[i];
        const double fm = f(y);
        y[i] = x[i];
        hess(long(i), long(i)) = (fp - 2 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            double acc = 0.0;
            for (int si : {1, -1}) {
                for (int sj : {1, -1}) {
                    y[i] = x[i] + si * h[i];
                    y[j] = x[j] + sj * h[j];
                    acc += si * sj * f(y);
                }
            }
            y[i] = x[i];
            y[j] = x[j];
            hess(long(i), long(j)) = hess(long(j), long(i)) = acc / (4 * h[i] * h[j]);
        }
    }
    return hess;
}

double max_abs(const Eigen::VectorXd &g, std::optional<long> skip = std::nullopt) {
    double m = 0.0;
    for (long i = 0; i < g.size(); ++i) {
        if (skip && i == *skip) {
            continue;
        }
        m = std::max(m, std::abs(g(i)));
    }
    return m;
}

struct Maximum {
    std::vector<double> x;
    double value;
    int iterations;
};

// Damped Newton ascent from a simplex solution.
template <class F>
Maximum polish(const F &f, Maximum current, double tolerance) {
    for (int iter = 0; iter < kPolishIterations; ++iter) {
        const Eigen::VectorXd g = gradient(f, current.x);
        if (!g.allFinite() || max_abs(g) < 0.01 * tolerance) {
            break;
        }
        Eigen::MatrixXd neg_h = -hessian(f, current.x);
        if (!neg_h.allFinite()) {
            break;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg_h);
        const double min_eig = eig.eigenvalues().minCoeff();
        const double max_eig = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
        if (min_eig <= 1e-10 * max_eig) {
            neg_h += (1e-6 * max_eig - min_eig) * Eigen::MatrixXd::Identity(neg_h.rows(), neg_h.cols());
        }
        const Eigen::VectorXd step = neg_h.ldlt().solve(g);
        bool moved = false;
        double alpha = 1.0;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            std::vector<double> trial = current.x;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] += alpha * step(long(i));
            }
            const double v = f(trial);
            if (v >= current.value) {
                moved = trial != current.x;
                current.x = std::move(trial);
                current.value = v;
                break;
            }
        }
        if (!moved) {
            break;
        }
    }
    return current;
}

template <class F>
Maximum maximize(const F &f, const std::vector<double> &start, const std::vector<double> &step, int max_iterations) {
    NelderMeadOptions nm;
    nm.max_iterations = max_iterations;
    auto negated = [&](const std::vector<double> &x) { return -f(x); };
    NelderMeadResult first = nelder_mead(negated, start, step, nm);
    std::vector<double> small(step.size());
    for (std::size_t i = 0; i < step.size(); ++i) {
        small[i] = 0.1 * step[i];
    }
    NelderMeadResult second = nelder_mead(negated, first.x, small, nm);
    const NelderMeadResult &best = second.value <= first.value ? second : first;
    return {best.x, -best.value, first.iterations + second.iterations};
}

// Probability-plot least squares on a weighted product-limit estimate.
// Left- and interval-censored records are plotted as failures at their upper end.
std::vector<double> least_squares_start(Family family, std::span<const Observation> data, std::span<const double> w) {
    struct Point {
        double time;
        double weight;
        bool failure;
    };
    std::vector<Point> pts;
    double sw = 0.0, swl = 0.0, swl2 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(w[i] > 0.0)) {
            continue;
        }
        const Observation &o = data[i];
        const double t = o.kind == ObsKind::IntervalCensored ? std::sqrt(o.time * *o.time2) : o.time;
        const double wt = w[i] * double(o.count);
        pts.push_back({t, wt, o.kind != ObsKind::RightCensored});
        sw += wt;
        swl += wt * std::log(t);
        swl2 += wt * std::log(t) * std::log(t);
    }
    const double mean_log = swl / sw;
    const double sd_log = std::sqrt(std::max(swl2 / sw - mean_log * mean_log, 0.0));

    std::sort(pts.begin(), pts.end(), [](const Point &a, const Point &b) {
        return a.time < b.time || (a.time == b.time && a.failure && !b.failure);
    });
    double at_risk = sw, surv = 1.0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < pts.size();) {
        std::size_t j = i;
        double failed = 0.0, removed = 0.0;
        while (j < pts.size() && pts[j].time == pts[i].time) {
            failed += pts[j].failure ? pts[j].weight : 0.0;
            removed += pts[j].weight;
            ++j;
        }
        if (failed > 0.0 && at_risk > 0.0) {
            const double before = 1.0 - surv;
            surv *= 1.0 - failed / at_risk;
            const double f_mid = 0.5 * (before + 1.0 - surv);
            if (f_mid > 0.0 && f_mid < 1.0) {
                xs.push_back(std::log(pts[i].time));
                ys.push_back(family == Family::Lognormal ? normal_quantile(f_mid) : std::log(-std::log1p(-f_mid)));
            }
        }
        at_risk -= removed;
        i = j;
    }

    double mu = mean_log;
    double sigma = sd_log > 0.0 ? sd_log : 1.0;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= double(xs.size());
        my /= double(xs.size());
        double sxy = 0, syy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        if (syy > 0.0 && sxy > 0.0) {
            sigma = sxy / syy;
            mu = mx - sigma * my;
        }
    }
    return {mu, std::log(sigma)};
}

bool near_lambda_bound(double lambda) { return std::abs(lambda) >= kLambdaBound - kLambdaBoundaryMargin; }

} // namespace

std::vector<double> to_internal(const ModelParams &params) {
    switch (params.family()) {
    case Family::Weibull:
        return {std::log(params[0]), -std::log(params[1])};
    case Family::Lognormal:
        return {params[0], std::log(params[1])};
    case Family::GenGamma: {
        const double r = std::clamp(params[2] / kLambdaBound, -1.0, 1.0);
        return {params[0], std::log(params[1]), clamp_shape(kLambdaBound * std::atanh(r))};
    }
    }
    throw InputError("unknown family");
}

ModelParams from_internal(Family family, std::span<const double> x) {
    if (x.size() != parameter_count(family)) {
        throw InputError("from_internal: wrong dimension");
    }
    switch (family) {
    case Family::Weibull:
        return ModelParams::weibull(std::exp(x[0]), std::exp(-x[1]));
    case Family::Lognormal:
        return ModelParams::lognormal(x[0], std::exp(x[1]));
    case Family::GenGamma:
        return ModelParams::gengamma(x[0], std::exp(x[1]), kLambdaBound * std::tanh(x[2] / kLambdaBound));
    }
    throw InputError("unknown family");
}

std::vector<double> reporting_jacobian(const ModelParams &params) {
    switch (params.family()) {
    case Family::Weibull:
        return {params[0], -params[1]};
    case Family::Lognormal:
        return {1.0, params[1]};
    case Family::GenGamma: {
        const double r = params[2] / kLambdaBound;
        return {1.0, params[1], 1.0 - r * r};
    }
    }
    throw InputError("unknown family");
}

bool FitResult::info_positive_definite() const {
    if (info_matrix.size() == 0 || !info_matrix.allFinite()) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info_matrix);
    return eig.eigenvalues().minCoeff() > 0.0;
}

Eigen::MatrixXd FitResult::reporting_covariance() const {
    if (!info_positive_definite()) {
        throw NumericalError("observed information is not positive definite; use profile or bootstrap intervals");
    }
    const std::vector<double> jac = reporting_jacobian(params);
    Eigen::MatrixXd cov = info_matrix.inverse();
    for (long i = 0; i < cov.rows(); ++i) {
        for (long j = 0; j < cov.cols(); ++j) {
            cov(i, j) *= jac[std::size_t(i)] * jac[std::size_t(j)];
        }
    }
    return cov;
}

FitResult fit_ml(Family family, std::span<const Observation> data, std::span<const double> w,
                 const FitOptions &options) {
    validate(data);
    if (data.size() != w.size()) {
        throw InputError("fit_ml: weight vector length does not match the data");
    }
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InputError("fit_ml: weights must be finite and non-negative");
        }
    }
    const MleVerdict verdict = check_mle_exists(data, w);
    if (!verdict) {
        throw DegenerateError(verdict.reason);
    }
    if (family == Family::GenGamma) {
        double units = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            units += w[i] > 0.0 ? double(data[i].count) : 0.0;
        }
        if (units < 3.0) {
            throw DegenerateError("generalized gamma needs at least three positive-weight observations");
        }
    }

    const Objective objective(family, data, w);
    auto f = [&](const std::vector<double> &x) { return objective(x); };

    std::vector<std::vector<double>> starts;
    if (options.start) {
        if (options.start->size() != parameter_count(family)) {
            throw InputError("fit_ml: warm start has the wrong dimension");
        }
        starts.push_back(*options.start);
    }
    std::vector<double> step;
    if (family == Family::GenGamma) {
        FitOptions inner;
        inner.compute_information = false;
        inner.max_iterations = options.max_iterations;
        const FitResult ln = fit_ml(Family::Lognormal, data, w, inner);
        for (double lambda0 : {0.0, -0.5, 0.5}) {
            starts.push_back({ln.internal[0], ln.internal[1], kLambdaBound * std::atanh(lambda0 / kLambdaBound)});
        }
        step = {0.2, 0.2, 0.5};
    } else {
        const std::vector<double> ls = least_squares_start(family, data, w);
        const double spread = std::exp(ls[1]);
        starts.push_back(ls);
        starts.push_back({ls[0] + spread, ls[1] - std::log(2.0)});
        starts.push_back({ls[0] - 0.5 * spread, ls[1] + std::log(2.0)});
        step = {0.2, 0.2};
    }

    Maximum best{{}, -kInf, 0};
    int iterations = 0;
    for (const auto &s : starts) {
        if (!std::isfinite(f(s))) {
            continue;
        }
        Maximum m = maximize(f, s, step, options.max_iterations);
        iterations += m.iterations;
        if (m.value > best.value) {
            best = std::move(m);
        }
    }
    if (!std::isfinite(best.value)) {
        // Every start was infeasible; the fit is reported as unconverged.
        FitResult failed;
        failed.params = from_internal(family, starts.front());
        failed.loglik = -kInf;
        failed.internal = starts.front();
        failed.iterations = iterations;
        failed.gradient_norm = kInf;
        failed.se.assign(parameter_count(family), kNaN);
        return failed;
    }
    best = polish(f, best, options.gradient_tolerance);
    if (family == Family::GenGamma) {
        best.x[2] = clamp_shape(best.x[2]);
        best.value = f(best.x);
    }

    FitResult fit;
    fit.params = from_internal(family, best.x);
    fit.loglik = best.value;
    fit.internal = best.x;
    fit.iterations = iterations;
    const Eigen::VectorXd g = gradient(f, best.x);
    std::optional<long> shape_index;
    if (family == Family::GenGamma && near_lambda_bound(fit.params[2])) {
        fit.boundary_hit.push_back("lambda");
        shape_index = 2;
    }
    fit.gradient_norm = max_abs(g);
    fit.converged = g.allFinite() && max_abs(g, shape_index) < options.gradient_tolerance;

    fit.se.assign(parameter_count(family), kNaN);
    if (options.compute_information) {
        fit.info_matrix = -hessian(f, best.x);
        if (fit.info_positive_definite()) {
            const Eigen::MatrixXd cov = fit.reporting_covariance();
            for (long i = 0; i < cov.rows(); ++i) {
                fit.se[std::size_t(i)] = std::sqrt(cov(i, i));
            }
        }
    }
    return fit;
}

FitResult fit_ml(Family family, std::span<const Observation> data, const WeightVector &w, const FitOptions &options) {
    return fit_ml(family, data, std::span<const double>(w.values), options);
}

FitResult fit_ml(Family family, std::span<const Observation> data, const FitOptions &options) {
    const std::vector<double> ones(data.size(), 1.0);
    return fit_ml(family, data, std::span<const double>(ones), options);
}

std::size_t parameter_index(Family family, const std::string &name) {
    const auto names = parameter_names(family);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw InputError("unknown parameter '" + name + "' for family " + std::string(to_string(family)));
    }
    return std::size_t(it - names.begin());
}

namespace {

bool is_positive_parameter(Family family, std::size_t index) {
    return family == Family::Weibull || index == 1;
}

// Reporting value <-> internal coordinate for one parameter.
double internal_coordinate(Family family, std::size_t index, double value) {
    if (family == Family::Weibull) {
        return index == 0 ? std::log(value) : -std::log(value);
    }
    if (index == 1) {
        return std::log(value);
    }
    if (index == 2) {
        return clamp_shape(kLambdaBound * std::atanh(std::clamp(value / kLambdaBound, -1.0, 1.0)));
    }
    return value;
}

double reporting_value(Family family, std::size_t index, double c) {
    if (family == Family::Weibull) {
        return index == 0 ? std::exp(c) : std::exp(-c);
    }
    if (index == 1) {
        return std::exp(c);
    }
    if (index == 2) {
        return kLambdaBound * std::tanh(c / kLambdaBound);
    }
    return c;
}

struct ProfilePoint {
    double value;
    std::vector<double> full;
};

ProfilePoint profile_at(const Objective &objective, std::vector<double> warm, std::size_t index, double c) {
    warm[index] = c;
    Slice slice{objective, warm, index};
    auto f = [&](const std::vector<double> &free) { return slice(free); };
    const std::vector<double> start = slice.project(warm);
    std::vector<double> step(start.size(), 0.1);
    Maximum m = maximize(f, start, step, 2000);
    m = polish(f, m, 1e-7);
    return {m.value, slice.embed(m.x)};
}

} // namespace

Interval wald_interval(const FitResult &fit, const std::string &param, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw InputError("wald_interval: level must lie in (0, 1)");
    }
    if (!fit.info_positive_definite()) {
        throw NumericalError("observed information is not positive definite; use profile or bootstrap intervals");
    }
    const Family family = fit.params.family();
    const std::size_t k = parameter_index(family, param);
    // Symmetric intervals on the log-location-scale parameters (mu, sigma[, lambda]);
    // eta = exp(mu) and beta = 1/sigma are mapped from those endpoints.
    const Eigen::MatrixXd internal_cov = fit.info_matrix.inverse();
    const double sigma = fit.params.scale();
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double se_internal = std::sqrt(internal_cov(long(k), long(k)));
    if (k == 0) {
        const double mu = fit.params.location();
        const double half = z * se_internal;
        if (family == Family::Weibull) {
            return {std::exp(mu - half), std::exp(mu + half)};
        }
        return {mu - half, mu + half};
    }
    if (k == 1) {
        const double half = z * sigma * se_internal;
        if (family == Family::Weibull) {
            const double upper = sigma - half > 0.0 ? 1.0 / (sigma - half) : kInf;
            return {1.0 / (sigma + half), upper};
        }
        return {sigma - half, sigma + half};
    }
    const double lambda = fit.params[2];
    const double r = lambda / kLambdaBound;
    const double half = z * (1.0 - r * r) * se_internal;
    return {lambda - half, lambda + half};
}

double profile_loglik(Family family, std::span<const Observation> data, std::span<const double> w,
                      const FitResult &fit, const std::string &param, double value) {
    const std::size_t k = parameter_index(family, param);
    const Objective objective(family, data, w);
    return profile_at(objective, fit.internal, k, internal_coordinate(family, k, value)).value;
}

ProfileInterval profile_likelihood_interval(Family family, std::span<const Observation> data,
                                            std::span<const double> w, const FitResult &fit,
                                            const std::string &param, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw InputError("profile_likelihood_interval: level must lie in (0, 1)");
    }
    if (!fit.converged && fit.boundary_hit.empty()) {
        throw NumericalError("profile_likelihood_interval: the fit did not converge");
    }
    if (data.size() != w.size()) {
        throw InputError("profile_likelihood_interval: weight vector length does not match the data");
    }
    const std::size_t k = parameter_index(family, param);
    const Objective objective(family, data, w);
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double cutoff = fit.loglik - 0.5 * z * z;
    const double center = fit.internal[k];

    double scale = 0.1;
    if (fit.info_positive_definite()) {
        scale = std::clamp(std::sqrt(fit.info_matrix.inverse()(long(k), long(k))), 1e-3, 1.0);
    }
    // A million-fold range on the reporting scale for positive parameters.
    const double range = std::log(1e6) * (is_positive_parameter(family, k) ? 1.0 : std::max(1.0, scale));

    auto search = [&](double direction, bool &open) {
        ProfilePoint inside{fit.loglik, fit.internal};
        double inside_c = center;
        double distance = 0.5 * scale;
        double outside_c = kNaN;
        while (true) {
            double c = center + direction * std::min(distance, range);
            if (k == 2 && family == Family::GenGamma) {
                c = clamp_shape(c);
            }
            const ProfilePoint p = profile_at(objective, inside.full, k, c);
            if (p.value < cutoff) {
                outside_c = c;
                break;
            }
            inside = p;
            inside_c = c;
            if (distance >= range || std::abs(c) >= kMaxShapeCoordinate) {
                open = true;
                return inside_c;
            }
            distance *= 2.0;
        }
        double lo = inside_c, hi = outside_c;
        while (std::abs(hi - lo) > 1e-8 * std::max(1.0, std::abs(lo))) {
            const double mid = 0.5 * (lo + hi);
            const ProfilePoint p = profile_at(objective, inside.full, k, mid);
            if (p.value < cutoff) {
                hi = mid;
            } else {
                lo = mid;
                inside = p;
            }
        }
        return 0.5 * (lo + hi);
    };

    bool open_minus = false, open_plus = false;
    const double c_minus = search(-1.0, open_minus);
    const double c_plus = search(1.0, open_plus);
    double a = reporting_value(family, k, c_minus);
    double b = reporting_value(family, k, c_plus);
    bool open_a = open_minus, open_b = open_plus;
    if (a > b) {
        std::swap(a, b);
        std::swap(open_a, open_b);
    }
    ProfileInterval out{a, b, open_a, open_b};
    if (out.lower_open) {
        out.lower = is_positive_parameter(family, k) ? 0.0 : (k == 2 ? -kLambdaBound : -kInf);
    }
    if (out.upper_open) {
        out.upper = k == 2 && family == Family::GenGamma ? kLambdaBound : kInf;
    }
    return out;
}

} // namespace frw
