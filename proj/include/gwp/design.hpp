#pragma once

#include <cmath>

#include "gwp/core.hpp"
#include "gwp/evolve.hpp"
#include "gwp/propagators.hpp"

namespace gwp::design {

struct ResizePlan {
    double T_c;
    double new_delta_sq;
};

// Quarter-period switch from an omega trap to an omega_c trap: the omega
// ground state comes out with linewidth (omega/omega_c) hbar/(2 m omega_c).
inline ResizePlan quarter_period_resize(double omega, double omega_c, double m, double hbar,
                                        int k = 0) {
    if (!(omega > 0.0) || !(omega_c > 0.0)) throw DomainError("frequencies must be positive");
    if (k < 0) throw DomainError("k must be non-negative");
    return {(2.0 * pi * k + 0.5 * pi) / omega_c, (omega / omega_c) * hbar / (2.0 * m * omega_c)};
}

struct LinewidthTarget {
    double delta_y_sq;
    double tw;
};

struct TwoPulseSolution {
    double omega, T, omega_o, T_o;
    double A0, B0, n_o;
    double achieved_delta_y_sq, achieved_tw;
    int branch;  // 0: omega T in (0, pi), 1: (pi, 2 pi)
};

struct ReducedCoefficients {
    double S_bb, S_ab_sq;
};

// S_bb and S_ab^2 of the two-pulse kernel once S_aa = 0 holds.
inline ReducedCoefficients reduced_coefficients(double omega, double T, double omega_o) {
    const double t = std::tan(omega * T);
    const double t2 = t * t;
    return {(omega * omega - omega_o * omega_o) / omega * t / (1.0 + t2),
            (omega_o * omega_o + omega * omega * t2) / (1.0 + t2)};
}

inline LinewidthTarget forward_two_pulse(double omega, double T, double omega_o, double T_o,
                                         double delta_x_sq, double T0, double m, double hbar) {
    if (!(omega > 0.0) || !(omega_o > 0.0) || !(T > 0.0) || !(T_o > 0.0))
        throw DomainError("frequencies and durations must be positive");
    if (!(delta_x_sq > 0.0)) throw DomainError("delta_x_sq must be positive");
    if (detail::rotation(omega * T).focal || detail::rotation(omega_o * T_o).focal)
        throw FocalSingularity("two-pulse segment sits on a focal point");
    // tan(wT) tan(woTo) = wo/w written without tangents.
    const double s = std::sin(omega * T), c = std::cos(omega * T);
    const double so = std::sin(omega_o * T_o), co = std::cos(omega_o * T_o);
    const double residual = omega * s * so - omega_o * c * co;
    if (std::abs(residual) > 1e-9 * (omega + omega_o))
        throw ConstraintError("pulse pair violates the S_aa = 0 condition");
    const auto r = reduced_coefficients(omega, T, omega_o);
    const double delta = 2.0 * m * delta_x_sq / hbar;
    const double u = T0 * r.S_ab_sq - r.S_bb;
    const double den = delta * delta * r.S_ab_sq * r.S_ab_sq + u * u;
    return {delta_x_sq * r.S_ab_sq / den, -u / den};
}

inline TwoPulseSolution solve_two_pulse(const LinewidthTarget& target, double delta_x_sq,
                                        double omega, double T0, double m, double hbar) {
    if (!(target.delta_y_sq > 0.0)) throw DomainError("target delta_y_sq must be positive");
    if (!(delta_x_sq > 0.0) || !(omega > 0.0)) throw DomainError("delta_x_sq and omega must be positive");
    const double ratio = omega * omega * delta_x_sq / target.delta_y_sq;
    const double dy = 2.0 * m * target.delta_y_sq / hbar;
    const double K = ratio * (dy * dy + target.tw * target.tw);
    const double A0 = 1.0 - K;
    const double B0 = omega * T0 + omega * target.tw * delta_x_sq / target.delta_y_sq;
    const double scale = std::max({1.0, std::abs(A0), std::abs(B0)});
    if (std::abs(A0) <= 1e-14 * scale && std::abs(B0) <= 1e-14 * scale)
        throw DegenerateGeometry("A0 = B0 = 0 leaves omega T undetermined");
    if (std::abs(A0) <= 1e-14 * scale)
        throw DegenerateGeometry("A0 = 0 puts omega T at pi/2 and the second pulse on a focal point");
    const double tn = -B0 / A0;
    const double n_sq = (1.0 + A0 * tn * tn) / K;
    if (!(n_sq > 0.0) || !std::isfinite(n_sq))
        throw InfeasibleTarget("target linewidth is not reachable: n_o^2 <= 0", A0, B0, tn, n_sq);
    if (std::abs(tn) <= 1e-14)
        throw DegenerateGeometry("tan(omega T) = 0 with nonzero n_o");
    const double n_o = std::sqrt(n_sq);
    const double omega_o = n_o * omega;
    double wT = std::atan(tn);
    if (wT <= 0.0) wT += pi;
    double woTo = std::atan(n_o / tn);
    if (woTo <= 0.0) woTo += pi;

    std::string last_error;
    for (int branch = 0; branch < 2; ++branch) {
        const double T = (wT + branch * pi) / omega;
        const double T_o = woTo / omega_o;
        try {
            const auto got = forward_two_pulse(omega, T, omega_o, T_o, delta_x_sq, T0, m, hbar);
            const bool ok =
                std::abs(got.delta_y_sq - target.delta_y_sq) <= 1e-9 * target.delta_y_sq &&
                std::abs(got.tw - target.tw) <= 1e-9 * std::max(std::abs(target.tw), target.delta_y_sq * m / hbar);
            if (ok) return {omega, T, omega_o, T_o, A0, B0, n_o, got.delta_y_sq, got.tw, branch};
            last_error = "forward map misses target";
        } catch (const DomainError& e) {
            last_error = e.what();
        }
    }
    throw NoSolution("two-pulse verification failed on every branch: " + last_error);
}

enum class FlightDirection { forward, inverse };

// Free or inverse-free flight: tw moves by +-T, the rest stays put for a rest state.
inline GaussianState flight_imag_shift(const GaussianState& s, double T, FlightDirection dir) {
    const auto g = dir == FlightDirection::forward ? free(T, s.mass(), s.hbar())
                                                   : inverse_free_direct(T, s.mass(), s.hbar());
    return apply(g, s);
}

}  // namespace gwp::design
