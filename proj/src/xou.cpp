#include "optsale/xou.hpp"

#include <cmath>
#include <unordered_map>

#include "optsale/rootfind.hpp"

namespace optsale {

namespace {

// Per-solve memo of F and F' keyed by z; result-invariant, confined to the
// solve call.
struct EigenCache {
    const OuEigenParams& par;
    std::unordered_map<double, std::pair<double, double>> memo;

    std::pair<double, double> at(double z) {
        auto it = memo.find(z);
        if (it != memo.end()) return it->second;
        std::pair<double, double> fv{eval_F(par, z, 0), eval_F(par, z, 1)};
        memo.emplace(z, fv);
        return fv;
    }
};

// (e^u - 1)/u, stable near u = 0.
double expm1_over(double u) { return u < 1e-12 ? 1.0 + 0.5 * u : std::expm1(u) / u; }

double exp_bracket_root(const XouParams& m, double r, double gn) {
    const auto h = [&](double z) {
        const double u = gn * std::exp(z);
        return 0.5 * m.eta * m.eta * (1.0 - u) + m.kappa * (m.theta - z) - r * expm1_over(u);
    };
    // h is strictly decreasing with h(-inf) = +inf; expand around theta
    const double step = m.eta / std::sqrt(2.0 * m.kappa);
    double lo = m.theta;
    int guard = 0;
    while (h(lo) <= 0.0) {
        lo -= step;
        if (++guard > 400) throw numerical_error("exp bracket: no h > 0 region found");
    }
    auto [blo, bhi] = expand_upper(h, lo, step);
    return brent_root(h, blo, bhi);
}

}  // namespace

double bracket_lower(const ProblemSpec& problem) {
    const XouParams& m = problem.xou();
    return std::visit(
        [&](const auto& u) -> double {
            using T = std::decay_t<decltype(u)>;
            if constexpr (std::is_same_v<T, ExponentialUtility>) {
                return exp_bracket_root(m, problem.r, u.gamma * problem.nu);
            } else if constexpr (std::is_same_v<T, LogUtility>) {
                return (m.kappa * m.theta - problem.r * std::log(problem.nu)) /
                       (m.kappa + problem.r);
            } else {
                const XouParams red = std::get<XouParams>(power_reduced_params(problem));
                return red.theta + red.eta * red.eta / (2.0 * red.kappa) -
                       problem.r / red.kappa;
            }
        },
        problem.utility);
}

XouSolution solve_xou(const ProblemSpec& problem) {
    const XouParams& m = problem.xou();
    const double r = problem.r;
    const double lower = bracket_lower(problem);

    if (const auto* eu = std::get_if<ExponentialUtility>(&problem.utility)) {
        const double gn = eu->gamma * problem.nu;
        OuEigenParams par(m, r);
        EigenCache cache{par};
        // (1 - e^-u) F'(b) = u e^-u F(b), u = gamma nu e^b; negative below the
        // root, positive above
        const auto res = [&](double z) {
            const double u = gn * std::exp(z);
            const auto [f, fp] = cache.at(z);
            return -std::expm1(-u) * fp - u * std::exp(-u) * f;
        };
        const double step = m.eta / std::sqrt(2.0 * m.kappa);
        auto [lo, hi] = expand_upper(res, lower, step);
        const double b = brent_root(res, lo, hi);
        const double K = -std::expm1(-gn * std::exp(b)) / cache.at(b).first;
        return {problem, par, b, K, Threshold{std::exp(b)}};
    }
    if (std::holds_alternative<LogUtility>(problem.utility)) {
        const double log_nu = std::log(problem.nu);
        OuEigenParams par(m, r);
        EigenCache cache{par};
        // F(b) = (b + log nu) F'(b); positive below the root, negative above
        const auto res = [&](double z) {
            const auto [f, fp] = cache.at(z);
            return f - (z + log_nu) * fp;
        };
        const double step = m.eta / std::sqrt(2.0 * m.kappa);
        auto [lo, hi] = expand_upper(res, lower, step);
        const double b = brent_root(res, lo, hi);
        const double D = (b + log_nu) / cache.at(b).first;
        return {problem, par, b, D, Threshold{std::exp(b)}};
    }

    // Power: substitute w = p z once and solve F'(w) = F(w) on the reduced
    // parameters; the threshold b_p = w*/p is independent of quantity.
    const double p = std::get<PowerUtility>(problem.utility).p;
    const XouParams red = std::get<XouParams>(power_reduced_params(problem));
    OuEigenParams par(red, r);
    EigenCache cache{par};
    const auto res = [&](double w) {
        const auto [f, fp] = cache.at(w);
        return fp - f;
    };
    const double step = red.eta / std::sqrt(2.0 * red.kappa);
    auto [lo, hi] = expand_upper(res, lower, step);
    const double w_star = brent_root(res, lo, hi);
    const double b = w_star / p;
    const double M =
        std::pow(problem.nu, p) * std::exp(w_star) / (p * cache.at(w_star).first);
    return {problem, par, b, M, Threshold{std::exp(b)}};
}

double eval_value_xou(const XouSolution& sol, double x) {
    if (!(x > 0.0)) throw validation_error("price must be > 0");
    const double z = std::log(x);
    if (z >= sol.b) return utility_value(sol.problem.utility, sol.problem.nu * x);
    if (const auto* pu = std::get_if<PowerUtility>(&sol.problem.utility))
        return sol.coefficient * eval_F(sol.eigen, pu->p * z);
    return sol.coefficient * eval_F(sol.eigen, z);
}

CeResult eval_ce_xou(const XouSolution& sol, double x) {
    if (!(x > 0.0)) throw validation_error("price must be > 0");
    const double cash = sol.problem.nu * x;
    if (std::log(x) >= sol.b) return {cash, 0.0};

    const double v = eval_value_xou(sol, x);
    double ce;
    if (const auto* eu = std::get_if<ExponentialUtility>(&sol.problem.utility)) {
        if (!(v >= 0.0 && v < 1.0))
            throw numerical_error("exponential certainty equivalent: value outside [0, 1) "
                                  "in the continuation region");
        ce = -std::log1p(-v) / eu->gamma;
    } else {
        ce = utility_inverse(sol.problem.utility, v);
    }
    return {ce, std::max(0.0, ce - cash)};
}

}  // namespace optsale
