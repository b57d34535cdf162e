#pragma once

#include "optsale/errors.hpp"
#include "optsale/model.hpp"

namespace optsale {

/// Parameters of the OU generator eigenfunction family for discount rate r:
/// the positive solutions of (eta^2/2) f'' + kappa (theta - z) f' = r f.
struct OuEigenParams {
    double kappa;
    double theta;
    double eta;
    double r;

    OuEigenParams(double kappa_, double theta_, double eta_, double r_);
    OuEigenParams(const XouParams& m, double r_)
        : OuEigenParams(m.kappa, m.theta, m.eta, r_) {}

    /// Power exponent a = r / kappa of the integrand weight.
    double exponent() const { return r / kappa; }
    /// Coefficient c = sqrt(2 kappa / eta^2) multiplying (z - theta).
    double scale() const;
};

struct QuadratureConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-300;   // absolute floor guard for near-zero integrals
    int max_refinements = 30;  // adaptive bisection depth

    void validate() const;
};

/// Increasing eigenfunction
///   F(z) = int_0^inf v^(r/kappa - 1) exp(c (z - theta) v - v^2/2) dv,
/// or its first/second z-derivative (order 1 or 2), obtained by
/// differentiating under the integral (each derivative multiplies the
/// integrand by c v). F > 0, F' > 0, F'' > 0.
double eval_F(const OuEigenParams& params, double z, int order = 0,
              const QuadratureConfig& cfg = {});

/// Decreasing eigenfunction (mirror of F: z - theta -> theta - z).
/// G > 0, G' < 0, G'' > 0.
double eval_G(const OuEigenParams& params, double z, int order = 0,
              const QuadratureConfig& cfg = {});

}  // namespace optsale
