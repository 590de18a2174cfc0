#include "frw/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

#include "frw/error.hpp"

namespace frw {

double DesignSpec::code(std::size_t j, double raw) const {
    const Factor &f = factors.at(j);
    return (2.0 * raw - (f.low + f.high)) / (f.high - f.low);
}

double Term::evaluate(std::span<const double> coded) const {
    switch (kind) {
    case TermKind::Main:
        return coded[a];
    case TermKind::Interaction:
    case TermKind::Quadratic:
        return coded[a] * coded[b];
    }
    return 0.0;
}

std::vector<Term> build_candidates(const DesignSpec &spec) {
    const std::size_t k = spec.factors.size();
    if (k == 0) {
        throw InputError("design needs at least one factor");
    }
    std::set<std::string> names;
    for (const auto &f : spec.factors) {
        if (f.name.empty()) {
            throw InputError("factor names must be non-empty");
        }
        if (!names.insert(f.name).second) {
            throw InputError("duplicate factor name '" + f.name + "'");
        }
        if (!(f.low < f.high) || !std::isfinite(f.low) || !std::isfinite(f.high)) {
            throw InputError("factor '" + f.name + "' needs finite low < high");
        }
    }
    std::vector<Term> terms;
    for (std::size_t a = 0; a < k; ++a) {
        terms.push_back({TermKind::Main, a, a, spec.factors[a].name});
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            terms.push_back({TermKind::Interaction, a, b, spec.factors[a].name + "*" + spec.factors[b].name});
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        terms.push_back({TermKind::Quadratic, a, a, spec.factors[a].name + "^2"});
    }
    return terms;
}

Eigen::MatrixXd code_design(const DesignSpec &spec, const Eigen::MatrixXd &x_raw) {
    if (std::size_t(x_raw.cols()) != spec.factors.size()) {
        throw InputError("design has " + std::to_string(x_raw.cols()) + " columns but " +
                         std::to_string(spec.factors.size()) + " factors");
    }
    Eigen::MatrixXd coded(x_raw.rows(), x_raw.cols());
    for (long i = 0; i < x_raw.rows(); ++i) {
        for (long j = 0; j < x_raw.cols(); ++j) {
            if (!std::isfinite(x_raw(i, j))) {
                throw InputError("design value in row " + std::to_string(i + 1) + " is not finite");
            }
            coded(i, j) = spec.code(std::size_t(j), x_raw(i, j));
        }
    }
    return coded;
}

namespace {

Eigen::VectorXd term_column(const Term &t, const Eigen::MatrixXd &coded) {
    Eigen::VectorXd col(coded.rows());
    for (long i = 0; i < coded.rows(); ++i) {
        const double a = coded(i, long(t.a));
        col(i) = t.kind == TermKind::Main ? a : a * coded(i, long(t.b));
    }
    return col;
}

bool heredity_ok(const Term &t, const std::vector<bool> &in_model, std::span<const Term> candidates) {
    auto main_in = [&](std::size_t factor) {
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (candidates[c].kind == TermKind::Main && candidates[c].a == factor) {
                return bool(in_model[c]);
            }
        }
        return true;
    };
    if (t.kind == TermKind::Main) {
        return true;
    }
    return main_in(t.a) && main_in(t.b);
}

double weighted_variance(const Eigen::VectorXd &y, std::span<const double> w) {
    double sw = 0.0, mean = 0.0;
    for (long i = 0; i < y.size(); ++i) {
        sw += w[std::size_t(i)];
        mean += w[std::size_t(i)] * y(i);
    }
    mean /= sw;
    double var = 0.0;
    for (long i = 0; i < y.size(); ++i) {
        var += w[std::size_t(i)] * (y(i) - mean) * (y(i) - mean);
    }
    return var / sw;
}

WlsFit wls_impl(const Eigen::MatrixXd &columns, const Eigen::VectorXd &y, std::span<const double> w,
                double variance_floor) {
    const long n = y.size();
    const long p = columns.cols() + 1;
    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd b(n);
    double sw = 0.0;
    for (long i = 0; i < n; ++i) {
        const double r = std::sqrt(w[std::size_t(i)]);
        sw += w[std::size_t(i)];
        a(i, 0) = r;
        a.row(i).tail(p - 1) = r * columns.row(i);
        b(i) = r * y(i);
    }
    WlsFit fit;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-9);
    if (qr.rank() < p) {
        return fit;
    }
    fit.full_rank = true;
    fit.beta = qr.solve(b);
    const double rss = (b - a * fit.beta).squaredNorm();
    const double sigma2 = std::max(rss / sw, variance_floor);
    fit.aic = sw * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0) + 2.0 * double(p + 1);
    return fit;
}

void check_inputs(const Eigen::VectorXd &y, std::span<const double> w, long rows) {
    if (rows < 3) {
        throw InputError("selection needs at least 3 runs");
    }
    if (y.size() != rows || std::size_t(rows) != w.size()) {
        throw InputError("design, response and weights must have the same number of rows");
    }
    double sw = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InputError("selection weights must be finite and non-negative");
        }
        sw += v;
    }
    if (!(sw > 0.0)) {
        throw InputError("selection weights must have a positive sum");
    }
    for (long i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y(i))) {
            throw InputError("response in row " + std::to_string(i + 1) + " is not finite");
        }
    }
}

} // namespace

WlsFit weighted_least_squares(const Eigen::MatrixXd &columns, const Eigen::VectorXd &y, std::span<const double> w) {
    check_inputs(y, w, columns.rows());
    return wls_impl(columns, y, w, 1e-12 * weighted_variance(y, w));
}

SelectionResult forward_select_aic(std::span<const Term> candidates, const Eigen::MatrixXd &coded,
                                   const Eigen::VectorXd &y, std::span<const double> w,
                                   const SelectionOptions &options) {
    check_inputs(y, w, coded.rows());
    if (candidates.empty()) {
        throw InputError("no candidate terms");
    }
    const double floor = std::max(1e-12 * weighted_variance(y, w), 1e-300);
    std::vector<Eigen::VectorXd> cols;
    for (const auto &t : candidates) {
        cols.push_back(term_column(t, coded));
    }

    SelectionResult result;
    std::vector<bool> in_model(candidates.size(), false);
    Eigen::MatrixXd current(coded.rows(), 0);
    WlsFit fit = wls_impl(current, y, w, floor);
    if (!fit.full_rank) {
        throw NumericalError("intercept-only model is not estimable under these weights");
    }
    result.aic_trace.push_back(fit.aic);
    bool first_step = true;
    for (;;) {
        std::size_t best = candidates.size();
        WlsFit best_fit;
        bool any_estimable = false;
        Eigen::MatrixXd trial(coded.rows(), current.cols() + 1);
        trial.leftCols(current.cols()) = current;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (in_model[c] || (options.strong_heredity && !heredity_ok(candidates[c], in_model, candidates))) {
                continue;
            }
            trial.col(current.cols()) = cols[c];
            WlsFit f = wls_impl(trial, y, w, floor);
            if (!f.full_rank) {
                continue;
            }
            any_estimable = true;
            if (best == candidates.size() || f.aic < best_fit.aic) {
                best = c;
                best_fit = std::move(f);
            }
        }
        if (first_step && !any_estimable) {
            throw InputError("no candidate column is estimable on this design");
        }
        first_step = false;
        const double cur = result.aic_trace.back();
        if (best == candidates.size() || !(best_fit.aic < cur - 1e-10 * (1.0 + std::abs(cur)))) {
            break;
        }
        in_model[best] = true;
        result.selected.push_back(best);
        current = Eigen::MatrixXd(trial.rows(), trial.cols());
        current.leftCols(trial.cols() - 1) = trial.leftCols(trial.cols() - 1);
        current.col(trial.cols() - 1) = cols[best];
        fit = std::move(best_fit);
        result.aic_trace.push_back(fit.aic);
    }
    result.coefficients.assign(candidates.size(), 0.0);
    result.intercept = fit.beta(0);
    for (std::size_t k = 0; k < result.selected.size(); ++k) {
        result.coefficients[result.selected[k]] = fit.beta(long(k) + 1);
    }
    return result;
}

BootstrapSelection bootstrap_selection(const DesignSpec &spec, const Eigen::MatrixXd &x_raw, const Eigen::VectorXd &y,
                                       const BootstrapSelectionOptions &options) {
    if (options.replicates == 0) {
        throw InputError("bootstrap_selection: at least one replicate is required");
    }
    BootstrapSelection out;
    out.candidates = build_candidates(spec);
    const Eigen::MatrixXd coded = code_design(spec, x_raw);
    const std::vector<double> ones(std::size_t(coded.rows()), 1.0);
    out.point = forward_select_aic(out.candidates, coded, y, ones, options.selection);

    const std::size_t reps = options.replicates;
    const std::size_t m = out.candidates.size();
    out.coefficients = Eigen::MatrixXd::Constant(long(reps), long(m), std::numeric_limits<double>::quiet_NaN());
    out.aic_traces.assign(reps, {});
    out.selected.assign(reps, {});
    std::vector<char> failed(reps, 0);
    std::vector<std::string> errors(reps);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < reps; b = next++) {
            Stream stream(options.seed, b + 1);
            const WeightVector w = gen_weights(WeightScheme::DirichletFractional, std::size_t(coded.rows()), stream);
            try {
                SelectionResult r = forward_select_aic(out.candidates, coded, y, w.values, options.selection);
                for (std::size_t c = 0; c < m; ++c) {
                    out.coefficients(long(b), long(c)) = r.coefficients[c];
                }
                out.aic_traces[b] = std::move(r.aic_trace);
                out.selected[b] = std::move(r.selected);
            } catch (const std::exception &e) {
                failed[b] = 1;
                errors[b] = e.what();
            }
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, reps));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    out.failed = std::size_t(std::count(failed.begin(), failed.end(), 1));
    if (double(out.failed) > 0.1 * double(reps)) {
        const auto first = std::find(failed.begin(), failed.end(), 1) - failed.begin();
        throw NumericalError(std::to_string(out.failed) + " of " + std::to_string(reps) +
                             " selection replicates failed; first failure (replicate " + std::to_string(first + 1) +
                             "): " + errors[std::size_t(first)]);
    }
    std::vector<std::size_t> hits(m, 0);
    for (const auto &sel : out.selected) {
        for (std::size_t c : sel) {
            ++hits[c];
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        out.proportions.push_back({c, double(hits[c]) / double(reps)});
    }
    std::stable_sort(out.proportions.begin(), out.proportions.end(),
                     [](const TermProportion &x, const TermProportion &y) { return x.proportion > y.proportion; });
    return out;
}

} // namespace frw
