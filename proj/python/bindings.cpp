#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <optional>
#include <variant>

#include "optsale/report.hpp"
#include "optsale/verify.hpp"

namespace py = pybind11;
using namespace optsale;

namespace {

double ext_to_float(const ExtReal& v) {
    return v.is_infinite() ? std::numeric_limits<double>::infinity() : v.value();
}

// The domain variants have no default-constructible first alternative, so we
// dispatch on the Python type instead of relying on pybind's variant caster.
ModelParams to_model(const py::object& obj) {
    if (py::isinstance<GbmParams>(obj)) return obj.cast<GbmParams>();
    if (py::isinstance<XouParams>(obj)) return obj.cast<XouParams>();
    throw usage_error("model must be a GbmParams or XouParams instance");
}

UtilitySpec to_utility(const py::object& obj) {
    if (py::isinstance<ExponentialUtility>(obj)) return obj.cast<ExponentialUtility>();
    if (py::isinstance<LogUtility>(obj)) return obj.cast<LogUtility>();
    if (py::isinstance<PowerUtility>(obj)) return obj.cast<PowerUtility>();
    throw usage_error(
        "utility must be an ExponentialUtility, LogUtility, or PowerUtility instance");
}

/// Uniform Python-facing view over GBM and XOU solutions.
struct PySolution {
    Solution sol;

    std::string strategy() const {
        return strategy_name(std::holds_alternative<GbmSolution>(sol)
                                 ? std::get<GbmSolution>(sol).strategy
                                 : std::get<XouSolution>(sol).strategy);
    }
    std::optional<double> threshold() const { return solution_threshold(sol); }
    std::optional<double> log_threshold() const {
        if (const auto* x = std::get_if<XouSolution>(&sol)) return x->b;
        return std::nullopt;
    }
    std::optional<double> alpha() const {
        if (const auto* g = std::get_if<GbmSolution>(&sol)) return g->alpha;
        return std::nullopt;
    }
    std::optional<double> coefficient() const {
        if (const auto* g = std::get_if<GbmSolution>(&sol)) return g->coefficient;
        return std::get<XouSolution>(sol).coefficient;
    }
    double value(double price) const { return ext_to_float(solution_value(sol, price)); }
    std::pair<double, double> certainty_equivalent(double price) const {
        const CeResult ce = solution_ce(sol, price);
        return {ext_to_float(ce.ce), ext_to_float(ce.premium)};
    }
};

}  // namespace

PYBIND11_MODULE(_optsale, m) {
    m.doc() = "Optimal risk-averse asset-sale timing under GBM and exponential-OU "
              "price dynamics";

    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<usage_error>(m, "UsageError", PyExc_TypeError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<GbmParams>(m, "GbmParams")
        .def(py::init<double, double>(), py::arg("mu"), py::arg("sigma"))
        .def_readonly("mu", &GbmParams::mu)
        .def_readonly("sigma", &GbmParams::sigma)
        .def("__repr__", [](const GbmParams& p) {
            return "GbmParams(mu=" + format_number(p.mu) + ", sigma=" +
                   format_number(p.sigma) + ")";
        });

    py::class_<XouParams>(m, "XouParams")
        .def(py::init<double, double, double>(), py::arg("kappa"), py::arg("theta"),
             py::arg("eta"))
        .def_readonly("kappa", &XouParams::kappa)
        .def_readonly("theta", &XouParams::theta)
        .def_readonly("eta", &XouParams::eta)
        .def("__repr__", [](const XouParams& p) {
            return "XouParams(kappa=" + format_number(p.kappa) + ", theta=" +
                   format_number(p.theta) + ", eta=" + format_number(p.eta) + ")";
        });

    py::class_<ExponentialUtility>(m, "ExponentialUtility")
        .def(py::init<double>(), py::arg("gamma"))
        .def_readonly("gamma", &ExponentialUtility::gamma);
    py::class_<LogUtility>(m, "LogUtility").def(py::init<>());
    py::class_<PowerUtility>(m, "PowerUtility")
        .def(py::init<double>(), py::arg("p"))
        .def_readonly("p", &PowerUtility::p);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def(py::init([](const py::object& model, const py::object& utility, double r,
                         double nu, double initial_price) {
                 return ProblemSpec(to_model(model), to_utility(utility), r, nu,
                                    initial_price);
             }),
             py::arg("model"), py::arg("utility"), py::arg("r"), py::arg("nu"),
             py::arg("initial_price") = 1.0)
        .def_readonly("r", &ProblemSpec::r)
        .def_readonly("nu", &ProblemSpec::nu)
        .def_readonly("initial_price", &ProblemSpec::initial_price);

    py::class_<OuEigenParams>(m, "OuEigenParams")
        .def(py::init<double, double, double, double>(), py::arg("kappa"), py::arg("theta"),
             py::arg("eta"), py::arg("r"))
        .def_readonly("kappa", &OuEigenParams::kappa)
        .def_readonly("theta", &OuEigenParams::theta)
        .def_readonly("eta", &OuEigenParams::eta)
        .def_readonly("r", &OuEigenParams::r);

    m.def("eval_F", [](const OuEigenParams& p, double z, int order) {
        return eval_F(p, z, order);
    }, py::arg("params"), py::arg("z"), py::arg("order") = 0,
       "Increasing OU eigenfunction (order 0) or its z-derivatives (order 1, 2)");
    m.def("eval_G", [](const OuEigenParams& p, double z, int order) {
        return eval_G(p, z, order);
    }, py::arg("params"), py::arg("z"), py::arg("order") = 0,
       "Decreasing OU eigenfunction or its z-derivatives");

    m.def("classify_strategy", [](const ProblemSpec& p) {
        return strategy_name(classify_strategy(p));
    }, py::arg("problem"), "Strategy regime: 'sell_now', 'wait_forever', or 'threshold'");
    m.def("compute_alpha", &compute_alpha, py::arg("model"), py::arg("r"));
    m.def("bracket_lower", &bracket_lower, py::arg("problem"));

    py::class_<PySolution>(m, "Solution")
        .def_property_readonly("strategy", &PySolution::strategy)
        .def_property_readonly("threshold", &PySolution::threshold)
        .def_property_readonly("log_threshold", &PySolution::log_threshold)
        .def_property_readonly("alpha", &PySolution::alpha)
        .def_property_readonly("coefficient", &PySolution::coefficient)
        .def("value", &PySolution::value, py::arg("price"))
        .def("certainty_equivalent", &PySolution::certainty_equivalent, py::arg("price"),
             "Returns (certainty_equivalent, premium); infinite values map to math.inf");

    m.def("solve", [](const ProblemSpec& p) { return PySolution{solve(p)}; },
          py::arg("problem"));

    py::class_<McConfig>(m, "McConfig")
        .def(py::init<long, double, std::optional<double>, std::uint64_t, int>(),
             py::arg("n_paths") = 200000, py::arg("dt") = 1.0 / 252,
             py::arg("horizon") = std::nullopt, py::arg("seed") = 42,
             py::arg("n_threads") = 0)
        .def_readonly("n_paths", &McConfig::n_paths)
        .def_readonly("dt", &McConfig::dt)
        .def_readonly("seed", &McConfig::seed);

    py::class_<McEstimate>(m, "McEstimate")
        .def_readonly("mean", &McEstimate::mean)
        .def_readonly("std_error", &McEstimate::std_error)
        .def_readonly("n", &McEstimate::n)
        .def_readonly("truncation_bias_bound", &McEstimate::truncation_bias_bound)
        .def("__repr__", [](const McEstimate& e) {
            return "McEstimate(mean=" + format_number(e.mean) + ", std_error=" +
                   format_number(e.std_error) + ", n=" + std::to_string(e.n) + ")";
        });

    m.def("mc_strategy_value", &mc_strategy_value, py::arg("problem"), py::arg("threshold"),
          py::arg("config") = McConfig(),
          "Exact-transition Monte-Carlo value of a threshold sale strategy");

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("best_threshold", &SweepResult::best_threshold)
        .def_readonly("grid", &SweepResult::grid)
        .def_readonly("table", &SweepResult::table);

    m.def("threshold_sweep", [](const ProblemSpec& p, const std::vector<double>& grid,
                                const McConfig& cfg) {
        return oracle_threshold_sweep(p, grid, cfg);
    }, py::arg("problem"), py::arg("grid"), py::arg("config") = McConfig());

    m.def("smooth_pasting_audit", [](const PySolution& s) {
        const PastingReport r = smooth_pasting_audit(s.sol);
        py::dict d;
        d["threshold"] = r.threshold;
        d["value_gap"] = r.value_gap;
        d["deriv_gap"] = r.deriv_gap;
        d["pass"] = r.pass();
        return d;
    }, py::arg("solution"));

    m.def("vi_residual_grid", [](const PySolution& s, const std::vector<double>& prices) {
        const ViReport r = vi_residual_grid(s.sol, prices);
        py::dict d;
        d["max_violation"] = r.max_violation;
        d["max_equality_gap"] = r.max_equality_gap;
        d["pass"] = r.pass();
        return d;
    }, py::arg("solution"), py::arg("prices"));
}
