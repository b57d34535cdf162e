#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "optsale/errors.hpp"

namespace optsale {

/// Brent's method on a bracketing interval [a, b] with f(a) f(b) <= 0.
/// Combines inverse quadratic interpolation, secant steps, and bisection.
template <typename F>
double brent_root(F&& f, double a, double b, double xtol = 1e-13, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) {
        std::ostringstream os;
        os << "brent_root: interval does not bracket a root: f(" << a << ")=" << fa
           << ", f(" << b << ")=" << fb;
        throw numerical_error(os.str());
    }
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b)
                            + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // interpolation step (secant or inverse quadratic)
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
        }
    }
    throw numerical_error("brent_root: max iterations exceeded");
}

/// Expands upward from `lo` in increments of `step` (doubling after each miss)
/// until f changes sign relative to f(lo). Returns the bracketing pair.
template <typename F>
std::pair<double, double> expand_upper(F&& f, double lo, double step, int max_expansions = 200) {
    const double flo = f(lo);
    if (flo == 0.0) return {lo, lo};
    double hi = lo;
    for (int i = 0; i < max_expansions; ++i) {
        hi += step;
        const double fhi = f(hi);
        if (fhi == 0.0 || (flo > 0.0) != (fhi > 0.0)) return {lo, hi};
        step *= 2.0;
    }
    std::ostringstream os;
    os << "expand_upper: no sign change in [" << lo << ", " << hi << "] after "
       << max_expansions << " expansions (f(lo)=" << flo << ")";
    throw numerical_error(os.str());
}

}  // namespace optsale
