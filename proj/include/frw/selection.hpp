#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frw/weights.hpp"

namespace frw {

struct Factor {
    std::string name;
    double low;
    double high;
};

struct DesignSpec {
    std::vector<Factor> factors;

    /// Maps a raw level of factor j onto [-1, 1].
    double code(std::size_t j, double raw) const;
};

enum class TermKind { Main, Interaction, Quadratic };

/// A candidate model term over coded factor values.
struct Term {
    TermKind kind;
    std::size_t a;
    std::size_t b; // equal to a for main and quadratic terms
    std::string label;

    double evaluate(std::span<const double> coded) const;
};

/// Mains in factor order, then interactions (a < b, lexicographic), then quadratics.
std::vector<Term> build_candidates(const DesignSpec &spec);

/// Coded factor values, one row per run.
Eigen::MatrixXd code_design(const DesignSpec &spec, const Eigen::MatrixXd &x_raw);

struct SelectionOptions {
    /// Admit an interaction or quadratic only after all of its parent mains.
    bool strong_heredity = false;
};

struct SelectionResult {
    std::vector<std::size_t> selected; // candidate indices in order of entry
    std::vector<double> coefficients;  // per candidate, 0 when not selected
    double intercept = 0.0;
    std::vector<double> aic_trace; // AIC after each accepted step, starting with the intercept-only model
};

struct WlsFit {
    bool full_rank = false;
    double aic = 0.0;
    Eigen::VectorXd beta; // intercept first
};
/// Weighted least squares of y on [1, columns] with its Gaussian AIC.
/// `full_rank` is false (and nothing else is set) for rank-deficient columns.
WlsFit weighted_least_squares(const Eigen::MatrixXd &columns, const Eigen::VectorXd &y, std::span<const double> w);

SelectionResult forward_select_aic(std::span<const Term> candidates, const Eigen::MatrixXd &coded,
                                   const Eigen::VectorXd &y, std::span<const double> w,
                                   const SelectionOptions &options = {});

struct TermProportion {
    std::size_t term;
    double proportion;
};

struct BootstrapSelection {
    std::vector<Term> candidates;
    SelectionResult point; // unit-weight selection
    std::vector<TermProportion> proportions; // sorted by descending proportion, ties by candidate order
    Eigen::MatrixXd coefficients;            // replicates x candidates, 0 for unselected terms
    std::vector<std::vector<std::size_t>> selected; // per replicate, entry order
    std::vector<std::vector<double>> aic_traces;    // empty for failed replicates
    std::size_t failed = 0;
};

struct BootstrapSelectionOptions {
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    SelectionOptions selection;
    unsigned threads = 0;
};

/// FRW replicates of forward selection. Throws NumericalError when more than
/// 10% of replicates fail.
BootstrapSelection bootstrap_selection(const DesignSpec &spec, const Eigen::MatrixXd &x_raw, const Eigen::VectorXd &y,
                                       const BootstrapSelectionOptions &options);

} // namespace frw
