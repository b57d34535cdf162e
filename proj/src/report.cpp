#include "optsale/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace optsale {

using nlohmann::json;

GridSpec::GridSpec(double min_, double max_, int points_, bool log_spacing_)
    : min(min_), max(max_), points(points_), log_spacing(log_spacing_) {
    if (!(min < max)) throw validation_error("grid.min must be < grid.max");
    if (points < 2) throw validation_error("grid.points must be >= 2");
    if (log_spacing && !(min > 0.0))
        throw validation_error("grid.min must be > 0 for log spacing");
}

std::vector<double> GridSpec::values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    if (log_spacing) {
        const double lo = std::log(min), step = (std::log(max) - lo) / (points - 1);
        for (int i = 0; i < points; ++i) v[i] = std::exp(lo + step * i);
    } else {
        const double step = (max - min) / (points - 1);
        for (int i = 0; i < points; ++i) v[i] = min + step * i;
    }
    v.front() = min;
    v.back() = max;
    return v;
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error("config line " + std::to_string(lineno) +
                                   ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw validation_error("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

namespace {

class ConfigReader {
public:
    explicit ConfigReader(const KeyValues& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string require_str(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw validation_error("missing required config key '" + key + "'");
        return it->second;
    }

    double require_num(const std::string& key) const { return to_num(key, require_str(key)); }

    double num_or(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : to_num(key, it->second);
    }

    std::optional<double> num_opt(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        return to_num(key, it->second);
    }

    long int_or(const std::string& key, long fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        const double v = to_num(key, it->second);
        if (v != std::floor(v))
            throw validation_error("config key '" + key + "' must be an integer");
        return static_cast<long>(v);
    }

    std::string str_or(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    std::vector<double> num_list(const std::string& key) const {
        auto it = kv_.find(key);
        std::vector<double> out;
        if (it == kv_.end()) return out;
        std::istringstream in(it->second);
        std::string tok;
        while (std::getline(in, tok, ',')) out.push_back(to_num(key, tok));
        return out;
    }

    std::optional<GridSpec> grid_opt(const std::string& prefix) const {
        if (!has(prefix + ".min") && !has(prefix + ".max")) return std::nullopt;
        const bool log_sp = str_or(prefix + ".spacing", "linear") == "log";
        return GridSpec(require_num(prefix + ".min"), require_num(prefix + ".max"),
                        static_cast<int>(int_or(prefix + ".points", 101)), log_sp);
    }

private:
    static double to_num(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw validation_error("invalid number for config key '" + key + "': '" + s + "'");
        }
    }

    const KeyValues& kv_;
};

ProblemSpec build_problem(const ConfigReader& c) {
    const std::string kind = c.require_str("model.kind");
    ModelParams model =
        kind == "gbm"
            ? ModelParams(GbmParams(c.require_num("model.mu"), c.require_num("model.sigma")))
        : kind == "xou"
            ? ModelParams(XouParams(c.require_num("model.kappa"), c.require_num("model.theta"),
                                    c.require_num("model.eta")))
            : throw validation_error("config key 'model.kind' must be 'gbm' or 'xou' (got '" +
                                     kind + "')");

    const std::string ukind = c.require_str("utility.kind");
    UtilitySpec utility =
        ukind == "exponential"
            ? UtilitySpec(ExponentialUtility(c.require_num("utility.gamma")))
        : ukind == "log" ? UtilitySpec(LogUtility{})
        : ukind == "power"
            ? UtilitySpec(PowerUtility(c.require_num("utility.p")))
            : throw validation_error(
                  "config key 'utility.kind' must be 'exponential', 'log', or 'power' (got '" +
                  ukind + "')");

    return ProblemSpec(std::move(model), std::move(utility), c.require_num("r"),
                       c.require_num("nu"), c.num_or("initial_price", 1.0));
}

}  // namespace

RunConfig build_run_config(const KeyValues& kv) {
    const ConfigReader c(kv);
    RunConfig cfg(build_problem(c));
    cfg.grid = c.grid_opt("grid");
    cfg.quantity_grid = c.grid_opt("quantity_grid");
    cfg.curve_mode = c.str_or("curve.mode", "price");
    if (cfg.curve_mode != "price" && cfg.curve_mode != "quantity" &&
        cfg.curve_mode != "price_quantity")
        throw validation_error("config key 'curve.mode' must be 'price', 'quantity', or "
                               "'price_quantity' (got '" + cfg.curve_mode + "')");
    cfg.sweep_gammas = c.num_list("sweep.gammas");
    cfg.mc = McConfig(c.int_or("mc.paths", 200000), c.num_or("mc.dt", 1.0 / 252),
                      c.num_opt("mc.horizon"),
                      static_cast<std::uint64_t>(c.int_or("mc.seed", 42)),
                      static_cast<int>(c.int_or("mc.threads", 0)));
    cfg.verify_prices = c.num_list("verify.prices");
    cfg.verify_sweep = c.grid_opt("verify.sweep");
    cfg.override_threshold = c.num_opt("verify.override_threshold");
    if (cfg.override_threshold && !(*cfg.override_threshold > 0.0))
        throw validation_error("verify.override_threshold must be > 0");
    cfg.output_path = c.str_or("output.path", "");
    cfg.output_format = c.str_or("output.format", "csv");
    if (cfg.output_format != "csv" && cfg.output_format != "json")
        throw validation_error("config key 'output.format' must be 'csv' or 'json' (got '" +
                               cfg.output_format + "')");
    return cfg;
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    KeyValues kv = parse_key_values(buf.str());
    for (const auto& [k, v] : overrides) kv[k] = v;
    return build_run_config(kv);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string CurveTable::to_csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_number(row[i]);
        os << "\n";
    }
    return os.str();
}

json CurveTable::to_json() const {
    json out;
    out["metadata"] = metadata;
    out["columns"] = columns;
    out["rows"] = rows;
    return out;
}

namespace {

json problem_json(const ProblemSpec& p) {
    json m;
    m["kind"] = model_kind_name(p.model);
    if (p.is_gbm()) {
        m["mu"] = p.gbm().mu;
        m["sigma"] = p.gbm().sigma;
    } else {
        m["kappa"] = p.xou().kappa;
        m["theta"] = p.xou().theta;
        m["eta"] = p.xou().eta;
    }
    json u;
    u["kind"] = utility_kind_name(p.utility);
    if (const auto* e = std::get_if<ExponentialUtility>(&p.utility)) u["gamma"] = e->gamma;
    if (const auto* pw = std::get_if<PowerUtility>(&p.utility)) u["p"] = pw->p;
    json out;
    out["model"] = m;
    out["utility"] = u;
    out["r"] = p.r;
    out["nu"] = p.nu;
    out["initial_price"] = p.initial_price;
    return out;
}

}  // namespace

json solve_summary(const Solution& sol) {
    json out;
    if (const auto* g = std::get_if<GbmSolution>(&sol)) {
        out["problem"] = problem_json(g->problem);
        out["strategy"] = strategy_name(g->strategy);
        out["alpha"] = g->alpha;
        if (const auto thr = g->threshold()) out["threshold"] = *thr;
        if (g->coefficient) out["coefficient"] = *g->coefficient;
        if (std::holds_alternative<WaitForever>(g->strategy))
            out["certainty_equivalent"] = "inf";
    } else {
        const XouSolution& x = std::get<XouSolution>(sol);
        out["problem"] = problem_json(x.problem);
        out["strategy"] = strategy_name(x.strategy);
        out["threshold"] = x.threshold();
        out["log_threshold"] = x.b;
        out["coefficient"] = x.coefficient;
        out["eigen"] = {{"kappa", x.eigen.kappa},
                        {"theta", x.eigen.theta},
                        {"eta", x.eigen.eta},
                        {"r", x.eigen.r}};
        out["bracket_lower"] = bracket_lower(x.problem);
    }
    return out;
}

json run_solve(const RunConfig& cfg) { return solve_summary(solve(cfg.problem)); }

namespace {

ProblemSpec with_nu(const ProblemSpec& p, double nu) {
    return ProblemSpec(p.model, p.utility, p.r, nu, p.initial_price);
}

ProblemSpec with_utility(const ProblemSpec& p, UtilitySpec u) {
    return ProblemSpec(p.model, std::move(u), p.r, p.nu, p.initial_price);
}

void append_price_rows(const Solution& sol, const ProblemSpec& problem,
                       const std::vector<double>& prices, std::optional<double> nu_column,
                       CurveTable& table) {
    for (double price : prices) {
        const double u = utility_value(problem.utility, problem.nu * price);
        const ExtReal v = solution_value(sol, price);
        const CeResult ce = solution_ce(sol, price);
        const double value = v.value();
        const double ceq = ce.ce.value();
        const double prem = ce.premium.value();
        if (!(value >= u - 1e-9 * std::max(1.0, std::abs(u))))
            throw numerical_error("curve row violates value >= utility at price " +
                                  format_number(price));
        if (!(prem >= 0.0))
            throw numerical_error("curve row has negative premium at price " +
                                  format_number(price));
        std::vector<double> row;
        if (nu_column) row.push_back(*nu_column);
        row.insert(row.end(), {price, u, value, ceq, prem});
        table.rows.push_back(std::move(row));
    }
}

CurveTable price_curve(const RunConfig& cfg) {
    if (!cfg.grid) throw validation_error("curve mode 'price' requires grid.min/max");
    CurveTable table;
    table.columns = {"price", "utility", "value", "certainty_equivalent", "premium"};
    const Solution sol = solve(cfg.problem);
    table.metadata = solve_summary(sol);
    if (std::holds_alternative<GbmSolution>(sol) &&
        std::holds_alternative<WaitForever>(std::get<GbmSolution>(sol).strategy)) {
        table.metadata["warning"] =
            "wait-forever strategy: value and certainty equivalent are infinite; "
            "no curve rows emitted";
        return table;
    }
    append_price_rows(sol, cfg.problem, cfg.grid->values(), std::nullopt, table);
    return table;
}

CurveTable quantity_curve(const RunConfig& cfg) {
    if (!cfg.quantity_grid)
        throw validation_error("curve mode 'quantity' requires quantity_grid.min/max");
    CurveTable table;
    std::vector<double> gammas = cfg.sweep_gammas;
    if (gammas.empty()) {
        if (const auto* e = std::get_if<ExponentialUtility>(&cfg.problem.utility))
            gammas.push_back(e->gamma);
        else
            gammas.push_back(0.5);
    }
    const bool gbm = cfg.problem.is_gbm();
    table.columns = {"nu"};
    for (double g : gammas)
        table.columns.push_back((gbm ? "a_e_gamma" : "x_e_gamma") + format_number(g));
    table.columns.push_back(gbm ? "a_l" : "x_l");
    if (!gbm) table.columns.push_back("x_p");

    double power_p = 0.3;
    if (const auto* pw = std::get_if<PowerUtility>(&cfg.problem.utility)) power_p = pw->p;

    json meta;
    meta["problem"] = problem_json(cfg.problem);
    meta["mode"] = "quantity";
    meta["gammas"] = gammas;
    if (!gbm) meta["p"] = power_p;
    table.metadata = meta;

    for (double nu : cfg.quantity_grid->values()) {
        std::vector<double> row{nu};
        for (double g : gammas) {
            const ProblemSpec p =
                with_nu(with_utility(cfg.problem, ExponentialUtility(g)), nu);
            const Solution s = solve(p);
            const auto thr = solution_threshold(s);
            row.push_back(thr ? *thr : 0.0);  // 0 marks an immediate-sale regime
        }
        {
            const ProblemSpec p = with_nu(with_utility(cfg.problem, LogUtility{}), nu);
            row.push_back(*solution_threshold(solve(p)));
        }
        if (!gbm) {
            const ProblemSpec p =
                with_nu(with_utility(cfg.problem, PowerUtility(power_p)), nu);
            row.push_back(*solution_threshold(solve(p)));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CurveTable price_quantity_curve(const RunConfig& cfg) {
    if (!cfg.grid || !cfg.quantity_grid)
        throw validation_error(
            "curve mode 'price_quantity' requires grid.min/max and quantity_grid.min/max");
    CurveTable table;
    table.columns = {"nu", "price", "utility", "value", "certainty_equivalent", "premium"};
    json meta;
    meta["problem"] = problem_json(cfg.problem);
    meta["mode"] = "price_quantity";
    table.metadata = meta;
    const std::vector<double> prices = cfg.grid->values();
    for (double nu : cfg.quantity_grid->values()) {
        const ProblemSpec p = with_nu(cfg.problem, nu);
        const Solution sol = solve(p);
        if (std::holds_alternative<GbmSolution>(sol) &&
            std::holds_alternative<WaitForever>(std::get<GbmSolution>(sol).strategy)) {
            table.metadata["warning"] = "wait-forever rows omitted";
            continue;
        }
        append_price_rows(sol, p, prices, nu, table);
    }
    return table;
}

}  // namespace

CurveTable run_curve(const RunConfig& cfg) {
    if (cfg.curve_mode == "quantity") return quantity_curve(cfg);
    if (cfg.curve_mode == "price_quantity") return price_quantity_curve(cfg);
    return price_curve(cfg);
}

namespace {

json estimate_json(const McEstimate& est) {
    return {{"mean", est.mean},
            {"std_error", est.std_error},
            {"n", est.n},
            {"truncation_bias_bound", est.truncation_bias_bound}};
}

}  // namespace

VerifyOutcome run_verify(const RunConfig& cfg) {
    const Solution sol = solve(cfg.problem);
    json report;
    report["summary"] = solve_summary(sol);
    json checks = json::array();
    bool all_pass = true;
    const auto add_check = [&](const std::string& name, bool pass, json details) {
        details["name"] = name;
        details["pass"] = pass;
        checks.push_back(std::move(details));
        all_pass = all_pass && pass;
    };

    const std::optional<double> analytic_thr = solution_threshold(sol);

    if (!analytic_thr) {
        // wait-forever: no finite strategy to value; check that sweep values
        // grow along an expanding threshold grid instead
        std::vector<double> grid;
        double level = cfg.problem.initial_price;
        for (int i = 0; i < 6; ++i) {
            grid.push_back(level);
            level *= 1.6;
        }
        McConfig quick(std::min<long>(cfg.mc.n_paths, 20000), cfg.mc.dt, cfg.mc.horizon,
                       cfg.mc.seed, cfg.mc.n_threads);
        const SweepResult sweep = oracle_threshold_sweep(cfg.problem, grid, quick);
        bool increasing = true;
        for (std::size_t j = 1; j < sweep.table.size(); ++j) {
            const double slack = 2.0 * (sweep.table[j - 1].std_error +
                                        sweep.table[j].std_error);
            if (sweep.table[j].mean < sweep.table[j - 1].mean - slack) increasing = false;
        }
        json d;
        d["grid"] = sweep.grid;
        json means = json::array();
        for (const auto& est : sweep.table) means.push_back(est.mean);
        d["means"] = means;
        add_check("sweep_value_increasing", increasing, d);
        report["checks"] = checks;
        report["passed"] = all_pass;
        return {report, all_pass};
    }

    {
        const PastingReport p = smooth_pasting_audit(sol);
        add_check("smooth_pasting", p.pass(),
                  {{"threshold", p.threshold},
                   {"value_gap", p.value_gap},
                   {"deriv_gap", p.deriv_gap},
                   {"tol", p.tol}});
    }
    {
        const GridSpec vi_grid(*analytic_thr / 20.0, 3.0 * *analytic_thr, 200, true);
        const ViReport vi = vi_residual_grid(sol, vi_grid.values());
        add_check("variational_inequality", vi.pass(),
                  {{"points", vi.points.size()},
                   {"max_violation", vi.max_violation},
                   {"max_equality_gap", vi.max_equality_gap},
                   {"tol", vi.tol}});
    }

    const double traded_thr = cfg.override_threshold.value_or(*analytic_thr);
    std::vector<double> prices = cfg.verify_prices;
    if (prices.empty())
        prices = {0.8 * *analytic_thr, 0.9 * *analytic_thr, 0.97 * *analytic_thr};

    for (double price : prices) {
        const ProblemSpec p(cfg.problem.model, cfg.problem.utility, cfg.problem.r,
                            cfg.problem.nu, price);
        const McEstimate est = mc_strategy_value(p, traded_thr, cfg.mc);
        const double analytic = solution_value(sol, price).value();
        const double err = std::abs(est.mean - analytic);
        const bool value_ok = err <= 3.0 * est.std_error;
        const bool bias_ok = est.truncation_bias_bound <= 5.0 * est.std_error;
        json d;
        d["price"] = price;
        d["threshold"] = traded_thr;
        d["estimate"] = estimate_json(est);
        d["analytic_value"] = analytic;
        d["abs_error"] = err;
        if (cfg.override_threshold) d["threshold_overridden"] = true;
        add_check("mc_vs_analytic", value_ok && bias_ok, d);
    }

    if (cfg.verify_sweep) {
        const std::vector<double> grid = cfg.verify_sweep->values();
        const SweepResult sweep = oracle_threshold_sweep(cfg.problem, grid, cfg.mc);
        const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
        const bool ok = std::abs(sweep.best_threshold - *analytic_thr) <= 1.0001 * step;
        json d;
        d["grid_min"] = grid.front();
        d["grid_max"] = grid.back();
        d["grid_step"] = step;
        d["best_threshold"] = sweep.best_threshold;
        d["analytic_threshold"] = *analytic_thr;
        json means = json::array();
        for (const auto& est : sweep.table) means.push_back(est.mean);
        d["means"] = means;
        add_check("sweep_argmax", ok, d);
    }

    report["checks"] = checks;
    report["passed"] = all_pass;
    return {report, all_pass};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot open output path '" + path + "'");
    out << content;
    if (!out) throw validation_error("failed writing output path '" + path + "'");
}

}  // namespace optsale
