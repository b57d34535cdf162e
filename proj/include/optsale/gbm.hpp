#pragma once

#include <optional>

#include "optsale/model.hpp"

namespace optsale {

/// Solution of the GBM-model sale-timing problem (exponential, log, or power
/// utility). `coefficient` is the pasting constant of the continuation branch:
/// A = (1 - e^(-gamma nu a_e)) a_e^(-alpha) for exponential, B = 1/(alpha e)
/// for log; absent for the trivial power cases.
struct GbmSolution {
    ProblemSpec problem;
    double alpha;
    StrategyClass strategy;
    std::optional<double> coefficient;

    std::optional<double> threshold() const {
        if (const auto* t = std::get_if<Threshold>(&strategy)) return t->level;
        return std::nullopt;
    }
};

/// Positive exponent of the increasing power solution s^alpha of the
/// discounted generator equation:
///   alpha = (1/2 - mu/sigma^2) + sqrt((mu/sigma^2 - 1/2)^2 + 2 r / sigma^2).
/// alpha < 1 iff r < mu; alpha >= 1 iff r >= mu.
double compute_alpha(const GbmParams& model, double r);

GbmSolution solve_gbm(const ProblemSpec& problem);

/// Value function at price s. Continuation branch: coefficient * (s or nu s)^alpha;
/// stopping branch: U(nu s). Infinite only for the power wait-forever case.
ExtReal eval_value_gbm(const GbmSolution& sol, double s);

CeResult eval_ce_gbm(const GbmSolution& sol, double s);

}  // namespace optsale
