#pragma once

#include <variant>
#include <vector>

#include "gwp/core.hpp"
#include "gwp/propagators.hpp"

namespace gwp {

struct EvolutionCoefficients {
    cplx a;
    cplx b_x, b_const;  // b = b_x * x_b + b_const
    cplx A, B, C;
    double im_A, im_B, im_C;  // closed forms, independent of A, B, C above
    double delta;             // 2 m (Delta x)^2 / hbar
    double v_a, v_b;
    double Z;
    double S_bb, S_ab, S_aa;
};

namespace detail {
inline void require_same_units(const QuadraticPropagator& g, const GaussianState& s) {
    if (g.mass() != s.mass() || g.hbar() != s.hbar())
        throw DomainError("propagator and state disagree on mass or hbar");
}
}  // namespace detail

inline EvolutionCoefficients coefficients(const QuadraticPropagator& g, const GaussianState& s) {
    detail::require_same_units(g, s);
    const auto k = g.coefficients();
    const double m = s.mass(), hbar = s.hbar();
    const double x0 = s.x_center(), p0 = s.p0(), T0 = s.tw(), dx2 = s.delta_sq();
    const cplx W0 = s.W();

    EvolutionCoefficients e;
    e.S_bb = k.S_bb;
    e.S_ab = k.S_ab;
    e.S_aa = k.S_aa;
    e.a = -I * (m / (2.0 * hbar)) * k.S_aa + 1.0 / (4.0 * W0);
    e.b_x = I * (m / hbar) * k.S_ab;
    e.b_const = I * ((k.Q_a - p0) / hbar) + x0 / (2.0 * W0);
    e.A = e.b_x * e.b_x / (4.0 * e.a) + I * (m / (2.0 * hbar)) * k.S_bb;
    e.B = 2.0 * e.b_x * e.b_const / (4.0 * e.a) + I * (k.Q_b / hbar);
    e.C = e.b_const * e.b_const / (4.0 * e.a) - x0 * x0 / (4.0 * W0);

    e.delta = 2.0 * m * dx2 / hbar;
    e.v_a = (k.Q_a - p0) / m;
    e.v_b = k.Q_b / m;
    const double Saa = k.S_aa, Sab = k.S_ab, Sbb = k.S_bb;
    const double one = 1.0 + Saa * T0;
    const double d2 = e.delta * e.delta;
    e.Z = Saa * d2 + T0 * one;
    const double den = d2 * Saa * Saa + one * one;
    e.im_A = (m / (2.0 * hbar)) * (Sbb * one + e.Z * (Sbb * Saa - Sab * Sab)) / den;
    e.im_B = (m / hbar) * ((e.v_b + Sab * x0) * one + e.Z * (e.v_b * Saa - e.v_a * Sab)) / den;
    e.im_C = (m / (2.0 * hbar)) *
             ((x0 * x0 * Saa + 2.0 * x0 * e.v_a - T0 * e.v_a * e.v_a) * one -
              d2 * Saa * e.v_a * e.v_a) /
             den;
    return e;
}

namespace detail {
// B = 0 maps (focal points and their squeezed relatives) act on W through
// the linear-fractional law for Gamma = i hbar / (2 m W).
inline GaussianState apply_point_map(const QuadraticPropagator& g, const GaussianState& s) {
    const Flow& F = g.flow();
    const double m = s.mass(), hbar = s.hbar();
    const double A = F(0, 0), B = F(0, 1), C = F(1, 0), D = F(1, 1);
    const cplx gamma = I * hbar / (2.0 * m * s.W());
    const cplx gamma_out = (C / m + D * gamma) / (A + B * m * gamma);
    const cplx W = I * hbar / (2.0 * m * gamma_out);
    const double x = A * s.x_center() + B * s.mean_momentum() + g.displacement()(0);
    const double p = C * s.x_center() + D * s.mean_momentum() + g.displacement()(1);
    Phase phase;
    const bool pure = C == 0.0 && std::abs(std::abs(A) - 1.0) < 1e-14 &&
                      g.displacement().norm() == 0.0;
    if (pure && g.theta() && s.global_phase()) phase = wrap_phase(*s.global_phase() + *g.theta());
    return {m, hbar, x, p, W.real(), W.imag() * 2.0 * m / hbar, phase};
}
}  // namespace detail

inline GaussianState apply(const QuadraticPropagator& g, const GaussianState& s) {
    detail::require_same_units(g, s);
    if (!g.view_available()) return detail::apply_point_map(g, s);

    const auto e = coefficients(g, s);
    const double m = s.mass(), hbar = s.hbar();
    const double dx2 = s.delta_sq(), T0 = s.tw();
    const double one = 1.0 + e.S_aa * T0;
    const double r = hbar / (2.0 * m);
    const double Dn = e.S_aa * e.S_aa * dx2 + r * r / dx2 * one * one;
    const double Sab2 = e.S_ab * e.S_ab;
    const double den = Sab2 * Sab2 + 16.0 * e.im_A * e.im_A * Dn * Dn;
    const double dy2 = Sab2 * Dn / den;
    const double imag_w = 4.0 * e.im_A * Dn * Dn / den;
    const double tw = imag_w * 2.0 * m / hbar;
    const double xc = -(e.S_aa * s.x_center() + e.v_a) / e.S_ab;
    const double pbar = hbar * (e.im_B + 2.0 * xc * e.im_A);

    Phase phase;
    if (s.global_phase() && g.theta()) {
        const cplx W0 = s.W();
        const cplx W1(dy2, imag_w);
        const double pref = std::arg(std::sqrt(1.0 / W0)) +
                            detail::prefactor_arg(g.flow()(0, 1)) +
                            std::arg(std::sqrt(pi / e.a)) - std::arg(std::sqrt(1.0 / W1));
        phase = detail::wrap_phase(*s.global_phase() + *g.theta() + e.im_C -
                                   e.im_A * xc * xc + pref);
    }
    return {m, hbar, xc, pbar, dy2, tw, phase};
}

struct Trajectory {
    std::vector<double> times;
    std::vector<GaussianState> states;
    std::vector<double> boundaries;  // elapsed time at the end of each segment
    const GaussianState& final_state() const { return states.back(); }
};

struct PerSegment {};
struct FixedStep {
    double dt;
};
using SnapshotRule = std::variant<PerSegment, FixedStep>;

namespace detail {
// Propagator for the physical sub-interval [t0, t1] of a segment.
inline QuadraticPropagator sub_propagator(const PulseSegment& seg, double t0, double t1, double m,
                                          double hbar) {
    const double tau = t1 - t0;
    return std::visit(
        [&](const auto& s) -> QuadraticPropagator {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, FreeSegment>) {
                return free(tau, m, hbar);
            } else if constexpr (std::is_same_v<S, InverseFreeSegment>) {
                return inverse_free_direct(tau, m, hbar);
            } else if constexpr (std::is_same_v<S, HarmonicSegment>) {
                return harmonic(s.omega, tau, m, hbar);
            } else if constexpr (std::is_same_v<S, InverseHarmonicSegment>) {
                return harmonic(s.omega, tau, m, hbar).with_theta(std::nullopt);
            } else if constexpr (std::is_same_v<S, ForcedHarmonicSegment>) {
                // A piece landing on a focal time is split in two.
                if (detail::rotation(s.omega * tau).focal) {
                    const double mid = 0.5 * (t0 + t1);
                    return compose(sub_propagator(seg, mid, t1, m, hbar),
                                   sub_propagator(seg, t0, mid, m, hbar));
                }
                return forced_harmonic(s.omega, s.force.shifted(t0), tau, m, hbar);
            } else {
                QuadraticCoefficients c{s.coeffs.b.shifted(t0), s.coeffs.c.shifted(t0),
                                        s.coeffs.d.shifted(t0), s.coeffs.f.shifted(t0)};
                return from_quadratic_hamiltonian(c, tau, m, hbar);
            }
        },
        seg);
}
}  // namespace detail

inline Trajectory evolve_schedule(const std::vector<PulseSegment>& segments, const GaussianState& s,
                                  SnapshotRule rule = PerSegment{}) {
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.states.push_back(s);
    double elapsed = 0.0;
    GaussianState cur = s;
    const double m = s.mass(), hbar = s.hbar();
    for (const auto& seg : segments) {
        const double dur = physical_duration(seg);
        if (!(dur >= 0.0)) throw DomainError("segment with negative duration");
        if (std::holds_alternative<PerSegment>(rule) || dur == 0.0) {
            cur = apply(build(seg, m, hbar), cur);
        } else {
            const double dt = std::get<FixedStep>(rule).dt;
            if (!(dt > 0.0)) throw DomainError("snapshot step must be positive");
            // Snapshots fall on the global grid k*dt; the segment end is always kept.
            double local = 0.0;
            while (true) {
                const double next_global = (std::floor((elapsed + local) / dt + 1e-9) + 1.0) * dt;
                double next = std::min(next_global - elapsed, dur);
                if (dur - next < 1e-12 * std::max(1.0, dur)) next = dur;
                cur = apply(detail::sub_propagator(seg, local, next, m, hbar), cur);
                local = next;
                if (local >= dur) break;
                tr.times.push_back(elapsed + local);
                tr.states.push_back(cur);
            }
        }
        elapsed += dur;
        tr.times.push_back(elapsed);
        tr.states.push_back(cur);
        tr.boundaries.push_back(elapsed);
    }
    return tr;
}

inline QuadraticPropagator compose_schedule(const std::vector<PulseSegment>& segments, double m,
                                            double hbar) {
    QuadraticPropagator acc = QuadraticPropagator::identity(m, hbar);
    for (const auto& seg : segments) acc = compose(build(seg, m, hbar), acc);
    return acc;
}

}  // namespace gwp
