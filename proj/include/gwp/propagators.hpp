#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "gwp/core.hpp"
#include "gwp/quadrature.hpp"
#include "gwp/time_function.hpp"

namespace gwp {

using Flow = Eigen::Matrix2d;
using PhasePoint = Eigen::Vector2d;

// Kernel view
//   G = sqrt(m/(2 pi i hbar f_ab)) exp{i m/(2 hbar) [S_bb xb^2 + 2 S_ab xa xb + S_aa xa^2]}
//       * exp{i (xa Q_a + xb Q_b)/hbar} * exp(i theta),   f_ab = -1/S_ab.
struct KernelCoefficients {
    double S_bb, S_ab, S_aa;
    double Q_a, Q_b;
    double f_ab;
    Phase theta;
};

// Unitary propagator of a quadratic Hamiltonian held as the classical map
// (x_b, p_b) = flow (x_a, p_a) + displacement, plus a global phase.
//
// theta convention: away from focal points it is the Theta of the kernel view
// with the square-root prefactor on its principal branch, so the Maslov jumps
// live in theta. At focal points the operator is a point map times e^{i theta}.
class QuadraticPropagator {
public:
    QuadraticPropagator(double mass, double hbar, const Flow& flow, const PhasePoint& displacement,
                        Phase theta, double duration)
        : mass_(mass), hbar_(hbar), flow_(flow), disp_(displacement), theta_(theta),
          duration_(duration) {
        if (!(mass > 0.0) || !(hbar > 0.0)) throw DomainError("mass and hbar must be positive");
        if (!flow.allFinite() || !displacement.allFinite())
            throw NumericError("non-finite propagator");
    }

    static QuadraticPropagator identity(double m, double hbar) {
        return {m, hbar, Flow::Identity(), PhasePoint::Zero(), 0.0, 0.0};
    }

    double mass() const { return mass_; }
    double hbar() const { return hbar_; }
    const Flow& flow() const { return flow_; }
    const PhasePoint& displacement() const { return disp_; }
    const Phase& theta() const { return theta_; }
    double duration() const { return duration_; }

    // Relative size of the x_a -> p_a lever arm; zero at focal points.
    double focal_measure() const {
        const double scale = std::abs(duration_) > 0.0 ? std::abs(duration_) : 1.0;
        return std::abs(mass_ * flow_(0, 1)) / scale;
    }
    bool view_available() const { return flow_(0, 1) != 0.0 && focal_measure() > 1e-11; }

    KernelCoefficients coefficients() const {
        if (!view_available())
            throw FocalSingularity("kernel coefficients unavailable at a focal point");
        const double A = flow_(0, 0), B = flow_(0, 1), D = flow_(1, 1);
        const double mB = mass_ * B;
        KernelCoefficients k;
        k.S_ab = -1.0 / mB;
        k.S_aa = A / mB;
        k.S_bb = D / mB;
        k.Q_a = disp_(0) / B;
        k.Q_b = disp_(1) - D * disp_(0) / B;
        k.f_ab = mB;
        k.theta = theta_;
        return k;
    }

    static QuadraticPropagator from_coefficients(double m, double hbar, const KernelCoefficients& k,
                                                 double duration) {
        if (k.S_ab == 0.0) throw DomainError("S_ab = 0 has no flow");
        const double B = -1.0 / (m * k.S_ab);
        const double A = -k.S_aa / k.S_ab;
        const double D = -k.S_bb / k.S_ab;
        const double C = m * (k.S_ab * k.S_ab - k.S_aa * k.S_bb) / k.S_ab;
        Flow F;
        F << A, B, C, D;
        const double dx = B * k.Q_a;
        return {m, hbar, F, PhasePoint(dx, k.Q_b + D * k.Q_a), k.theta, duration};
    }

    QuadraticPropagator with_theta(Phase th) const {
        return {mass_, hbar_, flow_, disp_, th, duration_};
    }

private:
    double mass_, hbar_;
    Flow flow_;
    PhasePoint disp_;
    Phase theta_;
    double duration_;
};

namespace detail {
inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

// arg of the principal sqrt(1/(2 pi i hbar B)).
inline double prefactor_arg(double B) { return std::arg(std::sqrt(1.0 / (I * B))); }

// Snap sin/cos of a harmonic angle to exact values at focal points.
struct Rotation {
    double c, s;
    long half_turns;  // floor(angle / pi)
    bool focal;
};
inline Rotation rotation(double angle) {
    Rotation r{std::cos(angle), std::sin(angle), static_cast<long>(std::floor(angle / pi)), false};
    const double k = std::round(angle / pi);
    if (std::abs(angle - k * pi) <= 1e-12 * std::max(1.0, std::abs(angle))) {
        const long kk = static_cast<long>(k);
        r.s = 0.0;
        r.c = (kk % 2 == 0) ? 1.0 : -1.0;
        r.half_turns = kk;
        r.focal = true;
    }
    return r;
}

inline double wrap_phase(double p) { return std::remainder(p, 2.0 * pi); }
}  // namespace detail

inline QuadraticPropagator free(double T, double m, double hbar) {
    detail::require_positive(T, "free flight time");
    Flow F;
    F << 1.0, T / m, 0.0, 1.0;
    return {m, hbar, F, PhasePoint::Zero(), 0.0, T};
}

inline QuadraticPropagator inverse_free_direct(double T, double m, double hbar) {
    detail::require_positive(T, "inverse free flight time");
    Flow F;
    F << 1.0, -T / m, 0.0, 1.0;
    return {m, hbar, F, PhasePoint::Zero(), 0.0, T};
}

inline QuadraticPropagator harmonic(double omega, double T, double m, double hbar) {
    detail::require_positive(omega, "omega");
    detail::require_positive(T, "harmonic duration");
    const auto r = detail::rotation(omega * T);
    Flow F;
    F << r.c, r.s / (m * omega), -m * omega * r.s, r.c;
    double theta;
    if (r.focal) {
        // U = e^{-i k pi/2} P^k at omega T = k pi.
        theta = detail::wrap_phase(-0.5 * pi * static_cast<double>(r.half_turns));
    } else {
        const long n = r.half_turns;
        theta = detail::wrap_phase(-0.5 * pi * static_cast<double>(n + (n % 2)));
    }
    return {m, hbar, F, PhasePoint::Zero(), theta, T};
}

inline long minimal_period_count(double omega, double T_prime) {
    return std::max(1L, static_cast<long>(std::floor(omega * T_prime / (2.0 * pi))) + 1);
}

// harmonic(omega, 2 k pi/omega - T'), the physical stand-in for harmonic(omega, T')^-1.
inline QuadraticPropagator harmonic_inverse(double omega, double T_prime, long k, double m,
                                            double hbar) {
    detail::require_positive(omega, "omega");
    if (k < 1) throw DomainError("period count k must be positive");
    const double period = 2.0 * pi * static_cast<double>(k) / omega;
    if (!(T_prime > 0.0) || T_prime > period * (1.0 + 1e-15))
        throw DomainError("harmonic_inverse needs 0 < T' <= 2 k pi / omega");
    const double t1 = period - T_prime;
    if (t1 <= 1e-15 * period) {
        Flow F = Flow::Identity();
        return {m, hbar, F, PhasePoint::Zero(), std::nullopt, 0.0};
    }
    return harmonic(omega, t1, m, hbar).with_theta(std::nullopt);
}

inline QuadraticPropagator harmonic_inverse(double omega, double T_prime, double m, double hbar) {
    return harmonic_inverse(omega, T_prime, minimal_period_count(omega, T_prime), m, hbar);
}

namespace detail {
// Composition helper used by compose and the forced constructor.
inline Phase composed_theta(const QuadraticPropagator& g2, const QuadraticPropagator& g1,
                            const Flow& flow, const PhasePoint& disp, double duration) {
    if (!g1.theta() || !g2.theta()) return std::nullopt;
    QuadraticPropagator out(g1.mass(), g1.hbar(), flow, disp, 0.0, duration);
    const bool r1 = g1.view_available(), r2 = g2.view_available(), r = out.view_available();
    auto is_pure_point_map = [](const QuadraticPropagator& g) {
        const Flow& F = g.flow();
        return F(0, 1) == 0.0 && F(1, 0) == 0.0 && std::abs(std::abs(F(0, 0)) - 1.0) < 1e-14 &&
               g.displacement().norm() == 0.0;
    };
    const double th = *g1.theta() + *g2.theta();
    if (!r1 && !r2) {
        if (is_pure_point_map(g1) && is_pure_point_map(g2)) return wrap_phase(th);
        return std::nullopt;
    }
    if (!r1 || !r2) {
        // One factor is +-identity: the kernel only reflects a coordinate.
        const auto& focal = r1 ? g2 : g1;
        const auto& reg = r1 ? g1 : g2;
        if (!is_pure_point_map(focal) || !r) return std::nullopt;
        return wrap_phase(th + prefactor_arg(reg.flow()(0, 1)) - prefactor_arg(flow(0, 1)));
    }
    if (!r) return std::nullopt;
    const auto k1 = g1.coefficients();
    const auto k2 = g2.coefficients();
    const double m = g1.mass(), hbar = g1.hbar();
    const double sigma = k1.S_bb + k2.S_aa;
    const cplx a = -I * (m / (2.0 * hbar)) * sigma;
    const double q = k1.Q_b + k2.Q_a;
    const double pref = prefactor_arg(g1.flow()(0, 1)) + prefactor_arg(g2.flow()(0, 1)) +
                        std::arg(std::sqrt(pi / a));
    return wrap_phase(th - q * q / (2.0 * hbar * m * sigma) + pref - prefactor_arg(flow(0, 1)));
}
}  // namespace detail

// G2 after G1.
inline QuadraticPropagator compose(const QuadraticPropagator& g2, const QuadraticPropagator& g1) {
    if (g1.mass() != g2.mass() || g1.hbar() != g2.hbar())
        throw DomainError("compose: mass or hbar mismatch");
    const Flow F = g2.flow() * g1.flow();
    const PhasePoint d = g2.flow() * g1.displacement() + g2.displacement();
    const double T = g1.duration() + g2.duration();
    return {g1.mass(), g1.hbar(), F, d, detail::composed_theta(g2, g1, F, d, T), T};
}

// Operator-order product: compose_all({G3, G2, G1}) = G3 G2 G1.
inline QuadraticPropagator compose_all(const std::vector<QuadraticPropagator>& gs) {
    if (gs.empty()) throw DomainError("compose_all: empty list");
    QuadraticPropagator acc = gs.back();
    for (std::size_t k = gs.size() - 1; k-- > 0;) acc = compose(gs[k], acc);
    return acc;
}

// H = p^2/2m + m omega^2 x^2/2 + f(t) x on [0, T].
inline QuadraticPropagator forced_harmonic(double omega, const ForceSpec& force, double T, double m,
                                           double hbar) {
    detail::require_positive(omega, "omega");
    detail::require_positive(T, "forced duration");
    auto base = harmonic(omega, T, m, hbar);
    if (!base.view_available())
        throw FocalSingularity("forced_harmonic: omega T is a multiple of pi; split the segment");
    const double s = std::sin(omega * T);
    const auto& f = force;
    const double Ia = integrate_or_throw(
        [&](double t) { return f(t) * std::sin(omega * (T - t)); }, 0.0, T, f.tolerance, "Q_a");
    const double Ib = integrate_or_throw([&](double t) { return f(t) * std::sin(omega * t); }, 0.0,
                                         T, f.tolerance, "Q_b");
    const double Qa = -Ia / s, Qb = -Ib / s;
    const double inner_tol = f.phase_tolerance / std::max(1.0, T);
    auto outer = [&](double t) {
        const double inner = integrate_or_throw(
            [&](double u) { return f(u) * std::sin(omega * u); }, 0.0, t, inner_tol, "theta inner");
        return f(t) * std::sin(omega * (T - t)) * inner;
    };
    const double dbl = integrate_or_throw(outer, 0.0, T, f.phase_tolerance, "theta");
    const double theta_f = -dbl / (m * omega * hbar * s);

    const Flow& F = base.flow();
    const double dx = F(0, 1) * Qa;
    const PhasePoint d(dx, Qb + F(1, 1) * Qa);
    Phase th = base.theta() ? Phase(*base.theta() + theta_f) : std::nullopt;
    return {m, hbar, F, d, th, T};
}

// Coefficient functions of H = p^2/2m + b(px+xp)/2 + c x^2/2 + d p + f x.
struct QuadraticCoefficients {
    TimeFunction b, c, d, f;
};

struct FlowIntegration {
    double tolerance = 1e-10;
    int initial_steps = 64;
    int max_steps = 1 << 20;
};

// Integrates the linear equations of motion with classical RK4 and step
// doubling until both the Richardson estimate and det drift are below tolerance.
inline QuadraticPropagator from_quadratic_hamiltonian(const QuadraticCoefficients& h, double T,
                                                      double m, double hbar,
                                                      FlowIntegration opts = {}) {
    detail::require_positive(T, "segment duration");
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    // State: flow columns (x,p) for unit x, unit p, then displacement.
    auto rhs = [&](double t, const Vec6& y) {
        Eigen::Matrix2d K;
        const double bt = h.b(t);
        K << bt, 1.0 / m, -h.c(t), -bt;
        Vec6 out;
        out.segment<2>(0) = K * y.segment<2>(0);
        out.segment<2>(2) = K * y.segment<2>(2);
        out.segment<2>(4) = K * y.segment<2>(4) + Eigen::Vector2d(h.d(t), -h.f(t));
        return out;
    };
    auto run = [&](int n) {
        Vec6 y;
        y << 1, 0, 0, 1, 0, 0;
        const double dt = T / n;
        for (int k = 0; k < n; ++k) {
            const double t = k * dt;
            Vec6 k1 = rhs(t, y);
            Vec6 k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
            Vec6 k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
            Vec6 k4 = rhs(t + dt, y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return y;
    };
    auto scale_of = [](const Vec6& y) { return std::max(1.0, y.cwiseAbs().maxCoeff()); };
    int n = opts.initial_steps;
    Vec6 coarse = run(n);
    while (true) {
        Vec6 fine = run(2 * n);
        const double richardson = (fine - coarse).cwiseAbs().maxCoeff() / 15.0 / scale_of(fine);
        const double det = fine(0) * fine(3) - fine(2) * fine(1);
        if (richardson < opts.tolerance && std::abs(det - 1.0) < opts.tolerance) {
            Vec6 y = fine + (fine - coarse) / 15.0;
            Flow F;
            F << y(0), y(2), y(1), y(3);
            return {m, hbar, F, PhasePoint(y(4), y(5)), std::nullopt, T};
        }
        n *= 2;
        if (n > opts.max_steps)
            throw NumericError("from_quadratic_hamiltonian: flow integration did not reach tolerance");
        coarse = fine;
    }
}

enum class SandwichBranch { upper, lower };

struct SandwichSolution {
    double T1, T2;
    SandwichBranch branch;
};

// Solves U_f(T)^+ = U_o1(T1) U_f(T) U_o2(T2) for the two harmonic durations.
inline SandwichSolution inverse_free_sandwich(double T, double w1, double w2,
                                              SandwichBranch branch = SandwichBranch::upper) {
    detail::require_positive(T, "T");
    detail::require_positive(w1, "omega1");
    detail::require_positive(w2, "omega2");
    const double sg = branch == SandwichBranch::upper ? 1.0 : -1.0;
    const double g = T * T * w1 * w1 * w2 * w2;
    const double dw = w2 * w2 - w1 * w1;
    const double s1n = 2.0 * T * w1 * w2 * w2, c1n = g - dw;
    const double s2n = 2.0 * T * w1 * w1 * w2, c2n = g + dw;
    const double R1 = std::hypot(c1n, s1n), R2 = std::hypot(c2n, s2n);
    auto positive_angle = [](double y, double x) {
        double a = std::atan2(y, x);
        if (a <= 0.0) a += 2.0 * pi;
        return a;
    };
    const double a1 = positive_angle(-sg * s1n / R1, -sg * c1n / R1);
    const double a2 = positive_angle(sg * s2n / R2, sg * c2n / R2);
    return {a1 / w1, a2 / w2, branch};
}

// Eq. 61 style closed form for harmonic(omega_o, T_o) after harmonic(omega, T).
struct TwoHarmonicCoefficients {
    double eta, S_bb, S_ab, S_aa;
};

inline TwoHarmonicCoefficients two_harmonic_coefficients(double w, double T, double wo, double To) {
    const double s = std::sin(w * T), c = std::cos(w * T);
    const double so = std::sin(wo * To), co = std::cos(wo * To);
    TwoHarmonicCoefficients r;
    r.eta = wo * co * s + w * so * c;
    r.S_bb = (wo / r.eta) * (-wo * s * so + w * co * c);
    r.S_ab = -w * wo / r.eta;
    r.S_aa = (w / r.eta) * (-w * s * so + wo * c * co);
    return r;
}

// Segment descriptions for schedules.
struct FreeSegment {
    double T;
};
struct InverseFreeSegment {
    double T;
};
struct HarmonicSegment {
    double omega, T;
};
struct InverseHarmonicSegment {
    double omega, T_prime;
    long k = 0;  // 0 picks the minimal period count
};
struct ForcedHarmonicSegment {
    double omega;
    ForceSpec force;
    double T;
};
struct GeneralQuadraticSegment {
    QuadraticCoefficients coeffs;
    double T;
};

using PulseSegment = std::variant<FreeSegment, InverseFreeSegment, HarmonicSegment,
                                  InverseHarmonicSegment, ForcedHarmonicSegment,
                                  GeneralQuadraticSegment>;

// Elapsed laboratory time of a segment.
inline double physical_duration(const PulseSegment& seg) {
    return std::visit(
        [](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, InverseHarmonicSegment>) {
                const long k = s.k > 0 ? s.k : minimal_period_count(s.omega, s.T_prime);
                return 2.0 * pi * static_cast<double>(k) / s.omega - s.T_prime;
            } else {
                return s.T;
            }
        },
        seg);
}

inline QuadraticPropagator build(const PulseSegment& seg, double m, double hbar) {
    return std::visit(
        [&](const auto& s) -> QuadraticPropagator {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, FreeSegment>) {
                return free(s.T, m, hbar);
            } else if constexpr (std::is_same_v<S, InverseFreeSegment>) {
                return inverse_free_direct(s.T, m, hbar);
            } else if constexpr (std::is_same_v<S, HarmonicSegment>) {
                return harmonic(s.omega, s.T, m, hbar);
            } else if constexpr (std::is_same_v<S, InverseHarmonicSegment>) {
                return s.k > 0 ? harmonic_inverse(s.omega, s.T_prime, s.k, m, hbar)
                               : harmonic_inverse(s.omega, s.T_prime, m, hbar);
            } else if constexpr (std::is_same_v<S, ForcedHarmonicSegment>) {
                return forced_harmonic(s.omega, s.force, s.T, m, hbar);
            } else {
                return from_quadratic_hamiltonian(s.coeffs, s.T, m, hbar);
            }
        },
        seg);
}

}  // namespace gwp
