#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "optsale/gbm.hpp"
#include "optsale/xou.hpp"

namespace optsale {

using Solution = std::variant<GbmSolution, XouSolution>;

Solution solve(const ProblemSpec& problem);
std::optional<double> solution_threshold(const Solution& sol);
ExtReal solution_value(const Solution& sol, double price);
CeResult solution_ce(const Solution& sol, double price);

struct McConfig {
    long n_paths = 200000;
    double dt = 1.0 / 252;
    /// Truncation time in years; empty selects ceil(-log(1e-4) / r), so the
    /// discount factor at truncation is at most 1e-4.
    std::optional<double> horizon;
    std::uint64_t seed = 42;
    /// Worker count; 0 = hardware concurrency. Estimates are bit-identical
    /// for any value (per-path substreams, ordered reduction).
    int n_threads = 0;

    McConfig() = default;
    McConfig(long n_paths_, double dt_, std::optional<double> horizon_, std::uint64_t seed_,
             int n_threads_ = 0);

    double resolve_horizon(double r) const;
};

struct McEstimate {
    double mean;
    double std_error;
    long n;
    /// e^(-rT) times the empirical mean of |U(nu * price_T)| over paths not
    /// stopped by the truncation time T.
    double truncation_bias_bound;
};

/// Exact-transition Monte-Carlo value of the strategy "sell at the first grid
/// time the price is at or above `threshold`". GBM log-price steps are
/// arithmetic-Brownian; OU log-price uses the exact conditional law. Paths
/// not stopped by the horizon contribute zero and feed the truncation bound.
McEstimate mc_strategy_value(const ProblemSpec& problem, double threshold,
                             const McConfig& cfg);

struct SweepResult {
    double best_threshold;
    std::vector<double> grid;
    std::vector<McEstimate> table;
};

/// Brute-force strategy-value sweep over candidate thresholds with common
/// random numbers (each path is simulated once and scored against every
/// candidate). Ties break toward the smaller threshold.
SweepResult oracle_threshold_sweep(const ProblemSpec& problem, std::span<const double> grid,
                                   const McConfig& cfg);

struct ViPoint {
    double price;
    bool in_continuation;
    double generator_residual;  // normalized (L - r)V
    double gap;                 // normalized U - V
};

/// Pointwise audit of max{(L - r)V, U - V} = 0 with analytic branch
/// derivatives. Violations are recorded, not thrown.
struct ViReport {
    std::vector<ViPoint> points;
    double max_violation;     // positive parts of both members
    double max_equality_gap;  // deviation of the member that should vanish
    double tol;

    bool pass() const { return max_violation <= tol && max_equality_gap <= tol; }
};

ViReport vi_residual_grid(const Solution& sol, std::span<const double> prices,
                          double tol = 1e-6);

struct PastingReport {
    double threshold;
    double value_gap;  // relative
    double deriv_gap;  // relative
    double tol;

    bool pass() const { return value_gap <= tol && deriv_gap <= tol; }
};

/// Value-matching and smooth-pasting audit at the threshold.
PastingReport smooth_pasting_audit(const Solution& sol, double tol = 1e-8);

}  // namespace optsale
