#pragma once

#include "optsale/model.hpp"
#include "optsale/ou_eigen.hpp"

namespace optsale {

/// Solution of the XOU-model sale-timing problem. The strategy is always a
/// price threshold e^b. `eigen` holds the eigenfunction parameters actually
/// used (power-reduced theta/eta for power utility); `coefficient` is the
/// pasting constant K (exponential), D (log), or M (power).
struct XouSolution {
    ProblemSpec problem;
    OuEigenParams eigen;
    double b;            // log-price threshold
    double coefficient;
    StrategyClass strategy;

    double threshold() const { return std::get<Threshold>(strategy).level.value(); }
};

/// Guaranteed strict lower bound for the log-price threshold, used to seed
/// root bracketing. Exponential: the root zeta of
///   h(z) = eta^2/2 (1 - gamma nu e^z) + kappa (theta - z)
///          - r (e^(gamma nu e^z) - 1) / (gamma nu e^z);
/// log: the linear root (kappa theta - r log nu) / (kappa + r);
/// power: the linear-payoff root theta~ + eta~^2/(2 kappa) - r/kappa in the
/// reduced log-price w = p z.
double bracket_lower(const ProblemSpec& problem);

XouSolution solve_xou(const ProblemSpec& problem);

/// Value function at price x > 0: coefficient * F(log x) (power: F(p log x)
/// on reduced parameters) in the continuation region, U(nu x) at or above the
/// threshold.
double eval_value_xou(const XouSolution& sol, double x);

CeResult eval_ce_xou(const XouSolution& sol, double x);

}  // namespace optsale
