#include "optsale/model.hpp"

#include <cmath>
#include <sstream>

namespace optsale {

namespace {

void require(bool cond, const char* field, double got, const char* what) {
    if (!cond) {
        std::ostringstream os;
        os << field << " " << what << " (got " << got << ")";
        throw validation_error(os.str());
    }
}

}  // namespace

GbmParams::GbmParams(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
    require(std::isfinite(mu), "mu", mu, "must be finite");
    require(std::isfinite(sigma) && sigma > 0.0, "sigma", sigma, "must be > 0");
}

XouParams::XouParams(double kappa_, double theta_, double eta_)
    : kappa(kappa_), theta(theta_), eta(eta_) {
    require(std::isfinite(kappa) && kappa > 0.0, "kappa", kappa, "must be > 0");
    require(std::isfinite(theta), "theta", theta, "must be finite");
    require(std::isfinite(eta) && eta > 0.0, "eta", eta, "must be > 0");
}

ExponentialUtility::ExponentialUtility(double gamma_) : gamma(gamma_) {
    require(std::isfinite(gamma) && gamma > 0.0, "gamma", gamma, "must be > 0");
}

PowerUtility::PowerUtility(double p_) : p(p_) {
    require(std::isfinite(p) && p > 0.0 && p <= 1.0, "p", p, "must lie in (0, 1]");
}

ProblemSpec::ProblemSpec(ModelParams model_, UtilitySpec utility_, double r_, double nu_,
                         double initial_price_)
    : model(std::move(model_)), utility(std::move(utility_)), r(r_), nu(nu_),
      initial_price(initial_price_) {
    require(std::isfinite(r) && r > 0.0, "r", r, "must be > 0");
    require(std::isfinite(nu) && nu > 0.0, "nu", nu, "must be > 0");
    require(std::isfinite(initial_price) && initial_price > 0.0, "initial_price",
            initial_price, "must be > 0");
}

const GbmParams& ProblemSpec::gbm() const {
    if (!is_gbm()) throw usage_error("problem model is not GBM");
    return std::get<GbmParams>(model);
}

const XouParams& ProblemSpec::xou() const {
    if (!is_xou()) throw usage_error("problem model is not XOU");
    return std::get<XouParams>(model);
}

double power_drift(const GbmParams& m, double p) {
    return p * m.mu + 0.5 * p * (p - 1.0) * m.sigma * m.sigma;
}

StrategyClass classify_strategy(const ProblemSpec& problem) {
    if (problem.is_xou()) return Threshold{};
    const GbmParams& m = problem.gbm();
    if (std::holds_alternative<ExponentialUtility>(problem.utility)) {
        if (problem.r >= m.mu) return SellNow{};
        return Threshold{};
    }
    if (std::holds_alternative<LogUtility>(problem.utility)) return Threshold{};
    const double p = std::get<PowerUtility>(problem.utility).p;
    return power_drift(m, p) <= problem.r ? StrategyClass{SellNow{}}
                                          : StrategyClass{WaitForever{}};
}

ModelParams power_reduced_params(const ProblemSpec& problem) {
    const auto* pu = std::get_if<PowerUtility>(&problem.utility);
    if (!pu) throw usage_error("power_reduced_params requires power utility");
    const double p = pu->p;
    if (problem.is_gbm()) {
        const GbmParams& m = problem.gbm();
        return GbmParams(power_drift(m, p), p * m.sigma);
    }
    const XouParams& m = problem.xou();
    return XouParams(m.kappa, p * m.theta, p * m.eta);
}

double utility_value(const UtilitySpec& u, double w) {
    return std::visit(
        [w](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ExponentialUtility>) {
                return -std::expm1(-v.gamma * w);
            } else if constexpr (std::is_same_v<T, LogUtility>) {
                if (w <= 0.0) throw validation_error("log utility requires w > 0");
                return std::log(w);
            } else {
                if (w < 0.0) throw validation_error("power utility requires w >= 0");
                return std::pow(w, v.p) / v.p;
            }
        },
        u);
}

double utility_derivative(const UtilitySpec& u, double w) {
    return std::visit(
        [w](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ExponentialUtility>) {
                return v.gamma * std::exp(-v.gamma * w);
            } else if constexpr (std::is_same_v<T, LogUtility>) {
                if (w <= 0.0) throw validation_error("log utility requires w > 0");
                return 1.0 / w;
            } else {
                return std::pow(w, v.p - 1.0);
            }
        },
        u);
}

double utility_second_derivative(const UtilitySpec& u, double w) {
    return std::visit(
        [w](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ExponentialUtility>) {
                return -v.gamma * v.gamma * std::exp(-v.gamma * w);
            } else if constexpr (std::is_same_v<T, LogUtility>) {
                if (w <= 0.0) throw validation_error("log utility requires w > 0");
                return -1.0 / (w * w);
            } else {
                return (v.p - 1.0) * std::pow(w, v.p - 2.0);
            }
        },
        u);
}

double utility_inverse(const UtilitySpec& u, double value) {
    return std::visit(
        [value](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ExponentialUtility>) {
                if (value >= 1.0)
                    throw validation_error("exponential utility inverse requires value < 1");
                return -std::log1p(-value) / v.gamma;
            } else if constexpr (std::is_same_v<T, LogUtility>) {
                return std::exp(value);
            } else {
                if (value < 0.0)
                    throw validation_error("power utility inverse requires value >= 0");
                return std::pow(v.p * value, 1.0 / v.p);
            }
        },
        u);
}

const char* model_kind_name(const ModelParams& m) {
    return std::holds_alternative<GbmParams>(m) ? "gbm" : "xou";
}

const char* utility_kind_name(const UtilitySpec& u) {
    if (std::holds_alternative<ExponentialUtility>(u)) return "exponential";
    if (std::holds_alternative<LogUtility>(u)) return "log";
    return "power";
}

std::string strategy_name(const StrategyClass& s) {
    if (std::holds_alternative<SellNow>(s)) return "sell_now";
    if (std::holds_alternative<WaitForever>(s)) return "wait_forever";
    return "threshold";
}

}  // namespace optsale
