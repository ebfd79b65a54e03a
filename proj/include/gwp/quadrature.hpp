#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "gwp/errors.hpp"

namespace gwp {

struct QuadratureResult {
    double value;
    double error_estimate;
    bool converged;
};

namespace detail {
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth, bool& ok, double& err) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
        ok = false;
        err += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) {
        err += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok, err) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok, err);
}
}  // namespace detail

// Adaptive Simpson on [a, b] with absolute tolerance tol. The interval is first
// cut into `panels` pieces so that oscillatory integrands are not mistaken for
// flat ones at the coarsest level.
template <class F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double tol, int panels = 16,
                                  int max_depth = 40) {
    if (a == b) return {0.0, 0.0, true};
    QuadratureResult r{0.0, 0.0, true};
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + h * k;
        const double hi = (k + 1 == panels) ? b : a + h * (k + 1);
        const double flo = f(lo), fhi = f(hi), fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        r.value += detail::simpson_rec(f, lo, hi, flo, fm, fhi, whole, tol / panels, max_depth,
                                       r.converged, r.error_estimate);
    }
    return r;
}

template <class F>
double integrate_or_throw(const F& f, double a, double b, double tol, const char* what) {
    auto r = adaptive_simpson(f, a, b, tol);
    if (!r.converged || !std::isfinite(r.value))
        throw NumericError(std::string(what) + ": quadrature did not converge, achieved error " +
                           std::to_string(r.error_estimate));
    return r.value;
}

}  // namespace gwp
