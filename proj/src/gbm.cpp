#include "optsale/gbm.hpp"

#include <cmath>

#include "optsale/rootfind.hpp"

namespace optsale {

namespace {

// g(x) = mu x - sigma^2 x^2 / 2 - r (e^x - 1) in the scaled variable
// x = gamma nu s. Strictly concave, g(0) = 0, g'(0) = mu - r; for mu > r it
// has a unique positive root phi, a strict lower bound for the scaled
// threshold x* = gamma nu a_e.
double scaled_g_root(double mu, double sigma, double r) {
    const auto g = [&](double x) {
        return mu * x - 0.5 * sigma * sigma * x * x - r * std::expm1(x);
    };
    double lo = 1.0;
    while (g(lo) <= 0.0) {
        lo *= 0.5;
        if (lo < 1e-12)
            throw numerical_error("gbm bracket: no positive region of g found (mu <= r?)");
    }
    auto [blo, bhi] = expand_upper(g, lo, lo);
    return brent_root(g, blo, bhi);
}

}  // namespace

double compute_alpha(const GbmParams& model, double r) {
    if (!(r > 0.0)) throw validation_error("r must be > 0");
    const double m = model.mu / (model.sigma * model.sigma);
    return (0.5 - m) + std::sqrt((m - 0.5) * (m - 0.5) + 2.0 * r / (model.sigma * model.sigma));
}

GbmSolution solve_gbm(const ProblemSpec& problem) {
    const GbmParams& m = problem.gbm();
    const double alpha = compute_alpha(m, problem.r);
    const StrategyClass regime = classify_strategy(problem);

    if (std::holds_alternative<ExponentialUtility>(problem.utility)) {
        if (std::holds_alternative<SellNow>(regime))
            return {problem, alpha, SellNow{}, std::nullopt};
        // alpha (e^x - 1) - x = 0 in x = gamma nu a_e; the equation depends on
        // gamma and nu only through x. Unique positive root above phi.
        const double gn = std::get<ExponentialUtility>(problem.utility).gamma * problem.nu;
        const auto f = [alpha](double x) { return alpha * std::expm1(x) - x; };
        const double phi = scaled_g_root(m.mu, m.sigma, problem.r);
        auto [lo, hi] = expand_upper(f, phi, std::max(phi, 1.0));
        const double x_star = brent_root(f, lo, hi);
        const double a_e = x_star / gn;
        const double coeff = -std::expm1(-x_star) * std::pow(a_e, -alpha);
        return {problem, alpha, Threshold{a_e}, coeff};
    }
    if (std::holds_alternative<LogUtility>(problem.utility)) {
        const double a_l = std::exp(1.0 / alpha) / problem.nu;
        return {problem, alpha, Threshold{a_l}, 1.0 / (alpha * std::exp(1.0))};
    }
    return {problem, alpha, regime, std::nullopt};
}

ExtReal eval_value_gbm(const GbmSolution& sol, double s) {
    const bool is_log = std::holds_alternative<LogUtility>(sol.problem.utility);
    if (s < 0.0 || (is_log && s == 0.0))
        throw validation_error(is_log ? "price must be > 0 for log utility"
                                      : "price must be >= 0");
    if (std::holds_alternative<WaitForever>(sol.strategy)) return ExtReal::infinity();
    if (const auto* t = std::get_if<Threshold>(&sol.strategy)) {
        const double a = t->level.value();
        if (s < a) {
            const double base = is_log ? sol.problem.nu * s : s;
            return *sol.coefficient * std::pow(base, sol.alpha);
        }
    }
    return utility_value(sol.problem.utility, sol.problem.nu * s);
}

CeResult eval_ce_gbm(const GbmSolution& sol, double s) {
    if (std::holds_alternative<WaitForever>(sol.strategy))
        return {ExtReal::infinity(), ExtReal::infinity()};
    const double cash = sol.problem.nu * s;
    const auto* t = std::get_if<Threshold>(&sol.strategy);
    if (!t || s >= t->level.value()) return {cash, 0.0};

    const ExtReal v = eval_value_gbm(sol, s);
    double ce;
    if (const auto* eu = std::get_if<ExponentialUtility>(&sol.problem.utility)) {
        const double arg = v.value();
        if (!(arg >= 0.0 && arg < 1.0))
            throw numerical_error("exponential certainty equivalent: value outside [0, 1) "
                                  "in the continuation region");
        ce = -std::log1p(-arg) / eu->gamma;
    } else {
        ce = utility_inverse(sol.problem.utility, v.value());
    }
    // dominance guarantees ce >= cash; clamp away rounding at the boundary
    return {ce, std::max(0.0, ce - cash)};
}

}  // namespace optsale
