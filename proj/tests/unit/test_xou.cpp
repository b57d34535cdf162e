#include <doctest.h>

#include <cmath>

#include "optsale/xou.hpp"

using namespace optsale;

namespace {

const XouParams kModel(0.6, 1.0, 0.2);

ProblemSpec exp_problem(double gamma = 0.5, double nu = 1.0) {
    return ProblemSpec(kModel, ExponentialUtility(gamma), 0.02, nu);
}

ProblemSpec log_problem(double nu = 1.0) {
    return ProblemSpec(kModel, LogUtility{}, 0.02, nu);
}

ProblemSpec pow_problem(double nu = 1.0, double p = 0.3) {
    return ProblemSpec(kModel, PowerUtility(p), 0.02, nu);
}

}  // namespace

TEST_CASE("bracket roots") {
    // log: closed form (kappa theta - r log nu) / (kappa + r)
    CHECK(bracket_lower(log_problem()) ==
          doctest::Approx(0.6 / 0.62).epsilon(1e-14));
    CHECK(bracket_lower(log_problem(2.0)) ==
          doctest::Approx((0.6 - 0.02 * std::log(2.0)) / 0.62).epsilon(1e-14));

    // exponential: frozen zeta for gamma nu = 0.5
    CHECK(bracket_lower(exp_problem()) ==
          doctest::Approx(0.92450081102812536).epsilon(1e-8));
    // gamma nu -> 0 limit: theta + eta^2/(2 kappa) - r/kappa = 1 exactly here
    CHECK(bracket_lower(exp_problem(1e-9)) == doctest::Approx(1.0).epsilon(1e-6));

    // power: linear root on reduced parameters
    CHECK(bracket_lower(pow_problem()) ==
          doctest::Approx(0.26966666666666667).epsilon(1e-12));
}

TEST_CASE("exponential threshold") {
    const XouSolution sol = solve_xou(exp_problem());
    CHECK(sol.b == doctest::Approx(1.1266624361139727).epsilon(1e-9));
    CHECK(sol.threshold() == doctest::Approx(3.085341771394333).epsilon(1e-9));
    CHECK(sol.coefficient == doctest::Approx(0.025154121280758906).epsilon(1e-9));

    // normalized root residual
    const double u = 0.5 * std::exp(sol.b);
    const double resid = -std::expm1(-u) * eval_F(sol.eigen, sol.b, 1) -
                         u * std::exp(-u) * eval_F(sol.eigen, sol.b, 0);
    CHECK(std::abs(resid) / (eval_F(sol.eigen, sol.b, 0) * std::max(1.0, u)) <= 1e-10);

    // threshold lies above the bracket root
    CHECK(sol.b > bracket_lower(exp_problem()));
}

TEST_CASE("exponential product law gamma*nu") {
    const double b1 = solve_xou(exp_problem(0.5, 1.0)).b;
    const double b2 = solve_xou(exp_problem(0.25, 2.0)).b;
    const double b3 = solve_xou(exp_problem(1.0, 0.5)).b;
    CHECK(b1 == doctest::Approx(b2).epsilon(1e-12));
    CHECK(b1 == doctest::Approx(b3).epsilon(1e-12));
}

TEST_CASE("log threshold and quantity effect") {
    const XouSolution sol = solve_xou(log_problem());
    CHECK(sol.b == doctest::Approx(1.2285405507876338).epsilon(1e-9));
    CHECK(sol.threshold() == doctest::Approx(3.4162400673614876).epsilon(1e-9));
    CHECK(sol.coefficient == doctest::Approx(0.037023094087056183).epsilon(1e-9));
    CHECK(sol.b > bracket_lower(log_problem()));

    const double resid = eval_F(sol.eigen, sol.b, 0) - sol.b * eval_F(sol.eigen, sol.b, 1);
    CHECK(std::abs(resid) / eval_F(sol.eigen, sol.b, 0) <= 1e-10);

    // frozen quantity table: b_l decreasing, nu e^(b_l) increasing
    const double frozen[][2] = {{0.5, 1.3148398115164694},
                                {1.0, 1.2285405507876338},
                                {2.0, 1.1675678645200191},
                                {5.0, 1.103571585266393}};
    double prev_b = 1e300, prev_cash = 0.0;
    for (const auto& [nu, expected_b] : frozen) {
        const XouSolution s = solve_xou(log_problem(nu));
        CHECK(s.b == doctest::Approx(expected_b).epsilon(1e-9));
        CHECK(s.b + std::log(nu) > 0.0);
        CHECK(s.b < prev_b);
        const double cash = nu * std::exp(s.b);
        CHECK(cash > prev_cash);
        prev_b = s.b;
        prev_cash = cash;
    }
}

TEST_CASE("power threshold is quantity-independent") {
    const XouSolution sol = solve_xou(pow_problem());
    CHECK(sol.b == doctest::Approx(1.0639562977223172).epsilon(1e-9));
    CHECK(sol.threshold() == doctest::Approx(2.8978129512181561).epsilon(1e-9));
    CHECK(sol.coefficient == doctest::Approx(0.15005373210187732).epsilon(1e-9));
    // reduced eigen parameters are the ones used
    CHECK(sol.eigen.theta == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(sol.eigen.eta == doctest::Approx(0.06).epsilon(1e-14));

    for (double nu : {0.5, 5.0})
        CHECK(solve_xou(pow_problem(nu)).b == doctest::Approx(sol.b).epsilon(1e-12));

    // dual algebraic route: the same threshold solves F'(b) = p F(b) on the
    // unreduced parameters
    const OuEigenParams unreduced(kModel, 0.02);
    const double lhs = eval_F(unreduced, sol.b, 1);
    const double rhs = 0.3 * eval_F(unreduced, sol.b, 0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("value function branches and dominance") {
    const XouSolution sol = solve_xou(exp_problem());
    const double xbar = sol.threshold();

    // value-matching at the threshold
    const double stop = -std::expm1(-0.5 * xbar);
    CHECK(sol.coefficient * eval_F(sol.eigen, sol.b) ==
          doctest::Approx(stop).epsilon(1e-12));
    CHECK(eval_value_xou(sol, xbar) == doctest::Approx(stop).epsilon(1e-12));

    CHECK(eval_value_xou(sol, 1.0) ==
          doctest::Approx(0.69969446296337864).epsilon(1e-10));
    CHECK(eval_value_xou(sol, 1.0) > -std::expm1(-0.5));

    for (double x = 0.2; x < xbar; x *= 1.3)
        CHECK(eval_value_xou(sol, x) > -std::expm1(-0.5 * x));
    for (double x = xbar; x < 4.0 * xbar; x *= 1.3)
        CHECK(eval_value_xou(sol, x) == -std::expm1(-0.5 * x));

    CHECK_THROWS_AS((void)eval_value_xou(sol, 0.0), validation_error);

    // log case: dominance is strict as x -> 0 (utility diverges, value stays finite)
    const XouSolution lsol = solve_xou(log_problem());
    CHECK(eval_value_xou(lsol, 1e-3) > std::log(1e-3));
    CHECK(eval_value_xou(lsol, 1e-3) < eval_value_xou(lsol, 1e-2));

    // power case value at x = 1
    const XouSolution psol = solve_xou(pow_problem());
    CHECK(eval_value_xou(psol, 1.0) ==
          doctest::Approx(4.1739389075373859).epsilon(1e-10));
}

TEST_CASE("certainty equivalents") {
    const XouSolution esol = solve_xou(exp_problem());
    const XouSolution lsol = solve_xou(log_problem());
    const XouSolution psol = solve_xou(pow_problem());

    SUBCASE("stopping branch returns cash") {
        for (const XouSolution* s : {&esol, &lsol, &psol}) {
            const double x = 1.1 * s->threshold();
            const CeResult ce = eval_ce_xou(*s, x);
            CHECK(ce.ce.value() == doctest::Approx(x).epsilon(1e-12));
            CHECK(ce.premium.value() == 0.0);
        }
    }
    SUBCASE("frozen continuation values at x = 1") {
        CHECK(eval_ce_xou(esol, 1.0).ce.value() ==
              doctest::Approx(2.4059097316248985).epsilon(1e-10));
        CHECK(eval_ce_xou(lsol, 1.0).ce.value() ==
              doctest::Approx(2.8006325831748008).epsilon(1e-10));
        CHECK(eval_ce_xou(psol, 1.0).ce.value() ==
              doctest::Approx(2.116205357834907).epsilon(1e-10));
    }
    SUBCASE("power certainty equivalent is linear in quantity") {
        const XouSolution p2 = solve_xou(pow_problem(2.0));
        for (double x : {0.5, 1.0, 2.0}) {
            CHECK(eval_ce_xou(p2, x).ce.value() ==
                  doctest::Approx(2.0 * eval_ce_xou(psol, x).ce.value()).epsilon(1e-12));
            CHECK(eval_ce_xou(p2, x).premium.value() >=
                  eval_ce_xou(psol, x).premium.value());
        }
    }
    SUBCASE("log certainty equivalent stays above 1 and shrinks toward small x") {
        CHECK(eval_ce_xou(lsol, 1e-3).ce.value() > 1.0);
        CHECK(eval_ce_xou(lsol, 1e-3).ce.value() < eval_ce_xou(lsol, 0.5).ce.value());
    }
    SUBCASE("corrupt coefficient triggers the log-argument guard") {
        XouSolution bad = esol;
        bad.coefficient = 100.0;
        CHECK_THROWS_AS((void)eval_ce_xou(bad, 1.0), numerical_error);
    }
}

TEST_CASE("value function is initially convex near the threshold") {
    // positive second difference in price inside the continuation region
    for (const ProblemSpec& p : {exp_problem(), log_problem(), pow_problem()}) {
        const XouSolution sol = solve_xou(p);
        const double xbar = sol.threshold();
        const double h = xbar / 200.0;
        bool found = false;
        for (double x = xbar / 4.0; x + h < xbar; x += h) {
            const double d2 = eval_value_xou(sol, x - h) - 2.0 * eval_value_xou(sol, x) +
                              eval_value_xou(sol, x + h);
            if (d2 > 0.0) {
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}
