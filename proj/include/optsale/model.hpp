#pragma once

#include <optional>
#include <string>
#include <variant>

#include "optsale/errors.hpp"

namespace optsale {

/// Geometric Brownian motion: dS = mu S dt + sigma S dB.
struct GbmParams {
    double mu;
    double sigma;

    GbmParams(double mu_, double sigma_);
};

/// Exponential Ornstein-Uhlenbeck: X = e^Z, dZ = kappa (theta - Z) dt + eta dB.
struct XouParams {
    double kappa;
    double theta;
    double eta;

    XouParams(double kappa_, double theta_, double eta_);
};

using ModelParams = std::variant<GbmParams, XouParams>;

/// U(w) = 1 - e^(-gamma w), gamma > 0.
struct ExponentialUtility {
    double gamma;
    explicit ExponentialUtility(double gamma_);
};

/// U(w) = log(w), w > 0.
struct LogUtility {};

/// U(w) = w^p / p with p = 1 - rho in (0, 1]. p = 1 is the linear
/// (zero-risk-aversion) boundary and is admitted.
struct PowerUtility {
    double p;
    explicit PowerUtility(double p_);
};

using UtilitySpec = std::variant<ExponentialUtility, LogUtility, PowerUtility>;

/// Full input of a sale-timing problem: price model, utility, discount rate r,
/// quantity nu, and the initial price used by evaluation/verification entry points.
struct ProblemSpec {
    ModelParams model;
    UtilitySpec utility;
    double r;
    double nu;
    double initial_price;

    ProblemSpec(ModelParams model_, UtilitySpec utility_, double r_, double nu_,
                double initial_price_ = 1.0);

    bool is_gbm() const { return std::holds_alternative<GbmParams>(model); }
    bool is_xou() const { return std::holds_alternative<XouParams>(model); }
    const GbmParams& gbm() const;
    const XouParams& xou() const;
};

struct SellNow {};
struct WaitForever {};

/// Sell at the first time the price reaches `level`. `level` is empty only in
/// the output of classify_strategy (the solvers fill it); when present it is
/// finite and positive.
struct Threshold {
    std::optional<double> level;
};

using StrategyClass = std::variant<SellNow, WaitForever, Threshold>;

/// Extended value: a finite real or the +infinity sentinel used by the
/// wait-forever cases. The sentinel never leaks into arithmetic; value()
/// throws when infinite.
class ExtReal {
public:
    ExtReal(double v) : value_(v) {}
    static ExtReal infinity() {
        ExtReal r(0.0);
        r.infinite_ = true;
        return r;
    }
    bool is_infinite() const { return infinite_; }
    double value() const {
        if (infinite_) throw usage_error("ExtReal: value() called on +infinity sentinel");
        return value_;
    }

private:
    double value_;
    bool infinite_ = false;
};

/// Certainty equivalent U^{-1}(V) and liquidation premium CE - nu * price.
struct CeResult {
    ExtReal ce;
    ExtReal premium;
};

/// Drift of the power process S^p: p mu + p (p - 1) sigma^2 / 2.
double power_drift(const GbmParams& m, double p);

/// Strategy regime for the problem. GBM/exponential: SellNow iff r >= mu,
/// else a threshold exists (level left to the solver). GBM/power: SellNow iff
/// the reduced drift <= r, else WaitForever. GBM/log and every XOU case are
/// threshold problems.
StrategyClass classify_strategy(const ProblemSpec& problem);

/// Parameters of the reduced model driving S^p (GBM) or X^p (XOU).
/// Requires power utility.
ModelParams power_reduced_params(const ProblemSpec& problem);

double utility_value(const UtilitySpec& u, double w);
double utility_derivative(const UtilitySpec& u, double w);
double utility_second_derivative(const UtilitySpec& u, double w);
double utility_inverse(const UtilitySpec& u, double value);

const char* model_kind_name(const ModelParams& m);
const char* utility_kind_name(const UtilitySpec& u);
std::string strategy_name(const StrategyClass& s);

}  // namespace optsale
