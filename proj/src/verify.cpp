#include "optsale/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "optsale/rng.hpp"

namespace optsale {

Solution solve(const ProblemSpec& problem) {
    if (problem.is_gbm()) return solve_gbm(problem);
    return solve_xou(problem);
}

std::optional<double> solution_threshold(const Solution& sol) {
    const StrategyClass& s = std::holds_alternative<GbmSolution>(sol)
                                 ? std::get<GbmSolution>(sol).strategy
                                 : std::get<XouSolution>(sol).strategy;
    if (const auto* t = std::get_if<Threshold>(&s)) return t->level;
    return std::nullopt;
}

ExtReal solution_value(const Solution& sol, double price) {
    if (const auto* g = std::get_if<GbmSolution>(&sol)) return eval_value_gbm(*g, price);
    return eval_value_xou(std::get<XouSolution>(sol), price);
}

CeResult solution_ce(const Solution& sol, double price) {
    if (const auto* g = std::get_if<GbmSolution>(&sol)) return eval_ce_gbm(*g, price);
    return eval_ce_xou(std::get<XouSolution>(sol), price);
}

McConfig::McConfig(long n_paths_, double dt_, std::optional<double> horizon_,
                   std::uint64_t seed_, int n_threads_)
    : n_paths(n_paths_), dt(dt_), horizon(horizon_), seed(seed_), n_threads(n_threads_) {
    if (n_paths < 1) throw validation_error("mc.paths must be >= 1");
    if (!(dt > 0.0)) throw validation_error("mc.dt must be > 0");
    if (horizon && !(*horizon > 0.0)) throw validation_error("mc.horizon must be > 0");
    if (n_threads < 0) throw validation_error("mc.threads must be >= 0");
}

double McConfig::resolve_horizon(double r) const {
    if (horizon) return *horizon;
    return std::ceil(-std::log(1e-4) / r);
}

namespace {

struct GbmStepper {
    double drift, vol;
    double advance(double z, double n) const { return z + drift + vol * n; }
};

struct OuStepper {
    double theta, decay, vol;
    double advance(double z, double n) const {
        return theta + (z - theta) * decay + vol * n;
    }
};

GbmStepper make_gbm_stepper(const GbmParams& m, double dt) {
    return {(m.mu - 0.5 * m.sigma * m.sigma) * dt, m.sigma * std::sqrt(dt)};
}

OuStepper make_ou_stepper(const XouParams& m, double dt) {
    const double decay = std::exp(-m.kappa * dt);
    return {m.theta, decay,
            m.eta * std::sqrt((1.0 - decay * decay) / (2.0 * m.kappa))};
}

int worker_count(const McConfig& cfg) {
    if (cfg.n_threads > 0) return cfg.n_threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename Fn>
void parallel_over_paths(long n_paths, int n_workers, Fn&& body) {
    if (n_workers <= 1 || n_paths < 2 * n_workers) {
        body(0L, n_paths);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (n_paths + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
        const long lo = w * chunk, hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

struct PathStats {
    double mean, std_error, bias;
};

// Ordered reduction: identical for any worker partition.
PathStats reduce(const std::vector<double>& payoff, const std::vector<double>& tail,
                 double discount_at_horizon) {
    const long n = static_cast<long>(payoff.size());
    double sum = 0.0, tail_sum = 0.0;
    for (long i = 0; i < n; ++i) {
        sum += payoff[i];
        tail_sum += tail[i];
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (long i = 0; i < n; ++i) {
        const double dlt = payoff[i] - mean;
        ss += dlt * dlt;
    }
    const double se =
        n > 1 ? std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n))) : 0.0;
    return {mean, se, discount_at_horizon * tail_sum / static_cast<double>(n)};
}

template <typename Stepper>
McEstimate run_mc(const Stepper& step, double z0, double zbar, double r, double nu,
                  const std::function<double(double)>& payoff_of_price, const McConfig& cfg,
                  double t_end, long m_steps) {
    const double u0 = payoff_of_price(std::exp(z0));
    if (z0 >= zbar)  // immediate sale at the actual initial price on every path
        return {u0, 0.0, cfg.n_paths, 0.0};

    std::vector<double> payoff(static_cast<std::size_t>(cfg.n_paths));
    std::vector<double> tail(static_cast<std::size_t>(cfg.n_paths), 0.0);
    const double rdt = r * cfg.dt;

    parallel_over_paths(cfg.n_paths, worker_count(cfg), [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            NormalSampler normal(path_seed(cfg.seed, static_cast<std::uint64_t>(i)));
            double z = z0;
            bool stopped = false;
            for (long k = 1; k <= m_steps; ++k) {
                z = step.advance(z, normal());
                if (z >= zbar) {
                    payoff[i] = std::exp(-rdt * static_cast<double>(k)) *
                                payoff_of_price(std::exp(z));
                    stopped = true;
                    break;
                }
            }
            if (!stopped) {
                payoff[i] = 0.0;
                tail[i] = std::abs(payoff_of_price(std::exp(z)));
            }
        }
    });

    (void)nu;
    const PathStats st = reduce(payoff, tail, std::exp(-r * t_end));
    return {st.mean, st.std_error, cfg.n_paths, st.bias};
}

}  // namespace

McEstimate mc_strategy_value(const ProblemSpec& problem, double threshold,
                             const McConfig& cfg) {
    if (!(threshold > 0.0)) throw validation_error("threshold must be > 0");
    const double T = cfg.resolve_horizon(problem.r);
    const long m_steps = std::max<long>(1, std::llround(T / cfg.dt));
    const double t_end = static_cast<double>(m_steps) * cfg.dt;
    const double z0 = std::log(problem.initial_price);
    const double zbar = std::log(threshold);
    const double nu = problem.nu;
    const UtilitySpec& util = problem.utility;
    const auto payoff = [&util, nu](double price) { return utility_value(util, nu * price); };

    if (problem.is_gbm())
        return run_mc(make_gbm_stepper(problem.gbm(), cfg.dt), z0, zbar, problem.r, nu,
                      payoff, cfg, t_end, m_steps);
    return run_mc(make_ou_stepper(problem.xou(), cfg.dt), z0, zbar, problem.r, nu, payoff,
                  cfg, t_end, m_steps);
}

namespace {

template <typename Stepper>
SweepResult run_sweep(const Stepper& step, const ProblemSpec& problem,
                      std::span<const double> grid, const McConfig& cfg) {
    const std::size_t nc = grid.size();
    const double T = cfg.resolve_horizon(problem.r);
    const long m_steps = std::max<long>(1, std::llround(T / cfg.dt));
    const double t_end = static_cast<double>(m_steps) * cfg.dt;
    const double z0 = std::log(problem.initial_price);
    const double rdt = problem.r * cfg.dt;
    const double nu = problem.nu;
    const UtilitySpec& util = problem.utility;
    const auto payoff_of_price = [&util, nu](double p) { return utility_value(util, nu * p); };

    std::vector<double> zbar(nc);
    for (std::size_t j = 0; j < nc; ++j) zbar[j] = std::log(grid[j]);

    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> pay(n * nc, 0.0);
    std::vector<double> tail_val(n, 0.0);
    std::vector<std::size_t> unstopped_from(n, nc);

    parallel_over_paths(cfg.n_paths, worker_count(cfg), [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            double* row = &pay[static_cast<std::size_t>(i) * nc];
            std::size_t j = 0;
            const double u0 = payoff_of_price(std::exp(z0));
            while (j < nc && z0 >= zbar[j]) row[j++] = u0;  // immediate sale
            if (j == nc) continue;
            NormalSampler normal(path_seed(cfg.seed, static_cast<std::uint64_t>(i)));
            double z = z0;
            for (long k = 1; k <= m_steps && j < nc; ++k) {
                z = step.advance(z, normal());
                if (z >= zbar[j]) {
                    const double v = std::exp(-rdt * static_cast<double>(k)) *
                                     payoff_of_price(std::exp(z));
                    while (j < nc && z >= zbar[j]) row[j++] = v;
                }
            }
            if (j < nc) {
                unstopped_from[i] = j;
                tail_val[i] = std::abs(payoff_of_price(std::exp(z)));
            }
        }
    });

    SweepResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.table.reserve(nc);
    const double disc_T = std::exp(-problem.r * t_end);
    for (std::size_t j = 0; j < nc; ++j) {
        double sum = 0.0, tail_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += pay[i * nc + j];
            if (j >= unstopped_from[i]) tail_sum += tail_val[i];
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = pay[i * nc + j] - mean;
            ss += d * d;
        }
        const double se = n > 1 ? std::sqrt(ss / (static_cast<double>(n - 1) *
                                                  static_cast<double>(n)))
                                : 0.0;
        out.table.push_back(
            {mean, se, cfg.n_paths, disc_T * tail_sum / static_cast<double>(n)});
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < nc; ++j)
        if (out.table[j].mean > out.table[best].mean) best = j;  // ties -> smaller
    out.best_threshold = grid[best];
    return out;
}

}  // namespace

SweepResult oracle_threshold_sweep(const ProblemSpec& problem, std::span<const double> grid,
                                   const McConfig& cfg) {
    if (grid.empty()) throw validation_error("sweep grid must be nonempty");
    for (std::size_t j = 0; j + 1 < grid.size(); ++j)
        if (!(grid[j] < grid[j + 1]))
            throw validation_error("sweep grid must be strictly increasing");
    if (!(grid.front() > 0.0)) throw validation_error("sweep thresholds must be > 0");

    if (problem.is_gbm())
        return run_sweep(make_gbm_stepper(problem.gbm(), cfg.dt), problem, grid, cfg);
    return run_sweep(make_ou_stepper(problem.xou(), cfg.dt), problem, grid, cfg);
}

namespace {

struct Branch {
    double value, d1, d2;  // value and derivatives in the evaluation variable
};

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// continuation branch of a GBM solution at price s
Branch gbm_continuation(const GbmSolution& sol, double s) {
    const double alpha = sol.alpha;
    const double A = sol.coefficient.value();
    if (std::holds_alternative<LogUtility>(sol.problem.utility)) {
        const double nu = sol.problem.nu;
        const double v = A * std::pow(nu * s, alpha);
        return {v, alpha * v / s, alpha * (alpha - 1.0) * v / (s * s)};
    }
    const double v = A * std::pow(s, alpha);
    return {v, alpha * v / s, alpha * (alpha - 1.0) * v / (s * s)};
}

// payoff branch U(nu s) with derivatives in s
Branch gbm_payoff(const ProblemSpec& p, double s) {
    const double w = p.nu * s;
    return {utility_value(p.utility, w), p.nu * utility_derivative(p.utility, w),
            p.nu * p.nu * utility_second_derivative(p.utility, w)};
}

// continuation branch of an XOU solution, derivatives in z = log price
Branch xou_continuation(const XouSolution& sol, double z) {
    if (const auto* pu = std::get_if<PowerUtility>(&sol.problem.utility)) {
        const double p = pu->p, M = sol.coefficient;
        const double w = p * z;
        return {M * eval_F(sol.eigen, w, 0), M * p * eval_F(sol.eigen, w, 1),
                M * p * p * eval_F(sol.eigen, w, 2)};
    }
    const double C = sol.coefficient;
    return {C * eval_F(sol.eigen, z, 0), C * eval_F(sol.eigen, z, 1),
            C * eval_F(sol.eigen, z, 2)};
}

// payoff branch U(nu e^z) with derivatives in z
Branch xou_payoff(const ProblemSpec& p, double z) {
    const double x = std::exp(z);
    return std::visit(
        [&](const auto& u) -> Branch {
            using T = std::decay_t<decltype(u)>;
            if constexpr (std::is_same_v<T, ExponentialUtility>) {
                const double gx = u.gamma * p.nu * x;
                const double d1 = gx * std::exp(-gx);
                return {-std::expm1(-gx), d1, d1 * (1.0 - gx)};
            } else if constexpr (std::is_same_v<T, LogUtility>) {
                return {z + std::log(p.nu), 1.0, 0.0};
            } else {
                const double e = std::pow(p.nu, u.p) * std::exp(u.p * z);
                return {e / u.p, e, u.p * e};
            }
        },
        p.utility);
}

double gbm_generator(const GbmParams& m, double r, double s, const Branch& b) {
    return 0.5 * m.sigma * m.sigma * s * s * b.d2 + m.mu * s * b.d1 - r * b.value;
}

double gbm_generator_scale(const GbmParams& m, double r, double s, const Branch& b) {
    const double t2 = std::abs(0.5 * m.sigma * m.sigma * s * s * b.d2);
    const double t1 = std::abs(m.mu * s * b.d1);
    const double t0 = std::abs(r * b.value);
    return std::max(t2 + t1 + t0, 1e-30);
}

double ou_generator(const XouParams& m, double r, double z, const Branch& b) {
    return 0.5 * m.eta * m.eta * b.d2 + m.kappa * (m.theta - z) * b.d1 - r * b.value;
}

double ou_generator_scale(const XouParams& m, double r, double z, const Branch& b) {
    return std::max(std::abs(0.5 * m.eta * m.eta * b.d2) +
                        std::abs(m.kappa * (m.theta - z) * b.d1) + std::abs(r * b.value),
                    1e-30);
}

}  // namespace

ViReport vi_residual_grid(const Solution& sol, std::span<const double> prices, double tol) {
    ViReport report;
    report.tol = tol;
    report.max_violation = 0.0;
    report.max_equality_gap = 0.0;

    const bool is_gbm = std::holds_alternative<GbmSolution>(sol);
    const ProblemSpec& problem =
        is_gbm ? std::get<GbmSolution>(sol).problem : std::get<XouSolution>(sol).problem;
    const StrategyClass& strategy =
        is_gbm ? std::get<GbmSolution>(sol).strategy : std::get<XouSolution>(sol).strategy;
    if (std::holds_alternative<WaitForever>(strategy))
        throw usage_error("vi_residual_grid: wait-forever value is infinite");
    const std::optional<double> thr = solution_threshold(sol);

    for (double price : prices) {
        const bool stopping = !thr.has_value() || price >= *thr;
        double resid_norm, gap_norm;
        if (is_gbm) {
            const GbmSolution& g = std::get<GbmSolution>(sol);
            const Branch pay = gbm_payoff(problem, price);
            const Branch active = stopping ? pay : gbm_continuation(g, price);
            const double resid = gbm_generator(problem.gbm(), problem.r, price, active);
            resid_norm = resid / gbm_generator_scale(problem.gbm(), problem.r, price, active);
            const double gap = pay.value - active.value;
            gap_norm = gap / std::max({1.0, std::abs(pay.value), std::abs(active.value)});
        } else {
            const XouSolution& x = std::get<XouSolution>(sol);
            const double z = std::log(price);
            const Branch pay = xou_payoff(problem, z);
            const Branch active = stopping ? pay : xou_continuation(x, z);
            const double resid = ou_generator(problem.xou(), problem.r, z, active);
            resid_norm = resid / ou_generator_scale(problem.xou(), problem.r, z, active);
            const double gap = pay.value - active.value;
            gap_norm = gap / std::max({1.0, std::abs(pay.value), std::abs(active.value)});
        }
        report.points.push_back({price, !stopping, resid_norm, gap_norm});
        if (stopping) {
            // payoff branch active: U - V = 0 must hold exactly, (L-r)U <= 0
            report.max_equality_gap = std::max(report.max_equality_gap, std::abs(gap_norm));
            report.max_violation = std::max(report.max_violation, positive_part(resid_norm));
        } else {
            // continuation branch: (L-r)V = 0 must hold, U - V <= 0
            report.max_equality_gap =
                std::max(report.max_equality_gap, std::abs(resid_norm));
            report.max_violation = std::max(report.max_violation, positive_part(gap_norm));
        }
    }
    return report;
}

PastingReport smooth_pasting_audit(const Solution& sol, double tol) {
    const std::optional<double> thr = solution_threshold(sol);
    if (!thr) throw usage_error("smooth_pasting_audit requires a threshold solution");
    PastingReport rep;
    rep.threshold = *thr;
    rep.tol = tol;

    if (const auto* g = std::get_if<GbmSolution>(&sol)) {
        const Branch cont = gbm_continuation(*g, *thr);
        const Branch pay = gbm_payoff(g->problem, *thr);
        rep.value_gap = std::abs(cont.value - pay.value) / std::max(1.0, std::abs(pay.value));
        rep.deriv_gap = std::abs(cont.d1 - pay.d1) / std::max(1.0, std::abs(pay.d1));
        return rep;
    }
    const XouSolution& x = std::get<XouSolution>(sol);
    const Branch cont = xou_continuation(x, x.b);
    const Branch pay = xou_payoff(x.problem, x.b);
    rep.value_gap = std::abs(cont.value - pay.value) / std::max(1.0, std::abs(pay.value));
    rep.deriv_gap = std::abs(cont.d1 - pay.d1) / std::max(1.0, std::abs(pay.d1));
    return rep;
}

}  // namespace optsale
