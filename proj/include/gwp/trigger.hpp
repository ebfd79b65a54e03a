#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gwp/evolve.hpp"
#include "gwp/oracle/fit.hpp"
#include "gwp/oracle/fock.hpp"
#include "gwp/quadrature.hpp"

namespace gwp::trigger {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using oracle::FockBasis;
using oracle::FockState;

// Internal basis order is (g0, g1, e).
enum class Level : std::size_t { g0 = 0, g1 = 1, e = 2 };
inline constexpr std::size_t level_count = 3;
inline std::size_t index(Level l) { return static_cast<std::size_t>(l); }

struct InternalLevels {
    double E0, E1, E2;

    InternalLevels(double e0, double e1, double e2) : E0(e0), E1(e1), E2(e2) {
        if (!(e2 > e0)) throw DomainError("excited level must lie above g0");
    }
    double omega_a(double hbar) const { return (E2 - E0) / hbar; }
    double alpha0() const { return 0.5 * (E2 + E0); }

    static MatrixXcd unit(std::size_t r, std::size_t c) {
        MatrixXcd m = MatrixXcd::Zero(3, 3);
        m(r, c) = 1.0;
        return m;
    }
    static MatrixXcd Iplus() { return unit(2, 0); }
    static MatrixXcd Iminus() { return unit(0, 2); }
    static MatrixXcd I0() { return unit(0, 0); }
    static MatrixXcd I1() { return unit(2, 2); }
    static MatrixXcd Iz() { return 0.5 * (I1() - I0()); }
    static MatrixXcd Pg1() { return unit(1, 1); }
};

struct RamanPair {
    TimeFunction rabi0, rabi1;
    double k0 = 0, k1 = 0, omega0 = 0, omega1 = 0, phi0 = 0, phi1 = 0;

    double delta_k() const { return k0 - k1; }
    double delta_omega() const { return omega0 - omega1; }
    double delta_phi() const { return phi0 - phi1; }
    double eta(double m, double hbar, double omega) const {
        return std::sqrt(hbar * hbar * delta_k() * delta_k() / (2.0 * m * hbar * omega));
    }
    // amplitude_scale: sqrt(<n>) style size of the motional excursion.
    bool lamb_dicke(double m, double hbar, double omega, double amplitude_scale = 1.0) const {
        return eta(m, hbar, omega) * amplitude_scale < 0.1;
    }
};

// Equal Rabi frequencies with phi0 = alpha + gamma and
// phi1(t) = (omega0 - omega1) t - alpha + gamma.
struct MatchedDrive {
    double alpha = 0, gamma = 0, rabi = 0, k_sum = 0, k_diff = 0;

    MatchedDrive with_gamma(double g) const {
        MatchedDrive d = *this;
        d.gamma = g;
        return d;
    }
    double phi0() const { return alpha + gamma; }
    double phi1(double delta_omega, double t) const { return delta_omega * t - alpha + gamma; }

    static MatchedDrive from_lasers(double rabi, double k0, double k1, double phi0, double phi1_at_zero) {
        return {0.5 * (phi0 - phi1_at_zero), 0.5 * (phi0 + phi1_at_zero), rabi, k0 + k1, k0 - k1};
    }
};

// ---- operators on (g0, g1, e) x Fock -------------------------------------

inline MatrixXcd on_motion(const MatrixXcd& motional) { return oracle::kron(MatrixXcd::Identity(3, 3), motional); }

// exp(i K x) cos(dk x / 2 - alpha), K = k_sum / 2.
inline MatrixXcd coupling_operator(const MatchedDrive& d, const FockBasis& b) {
    return b.function_of_x(
        [&](double x) { return std::exp(I * 0.5 * d.k_sum * x) * std::cos(0.5 * d.k_diff * x - d.alpha); });
}

inline void require_hermitian(const MatrixXcd& H, double tol = 1e-13) {
    if ((H - H.adjoint()).norm() > tol * std::max(1.0, H.norm()))
        throw NumericError("internal error: assembled Hamiltonian is not Hermitian");
}

inline MatrixXcd matched_dipole_H(const MatchedDrive& d, const FockBasis& b) {
    const MatrixXcd M = coupling_operator(d, b);
    const cplx ph = std::exp(-I * d.gamma);
    MatrixXcd H = 2.0 * b.hbar * d.rabi *
                  (ph * oracle::kron(InternalLevels::Iplus(), M) +
                   std::conj(ph) * oracle::kron(InternalLevels::Iminus(), M.adjoint()));
    require_hermitian(H);
    return H;
}

// Per-point 3x3 version for the grid oracle (trap supplied separately).
inline std::function<MatrixXcd(double, double)> matched_dipole_coupling(const MatchedDrive& d, double hbar,
                                                                       double detuning = 0.0) {
    return [d, hbar, detuning](double x, double) {
        const cplx f = std::exp(I * 0.5 * d.k_sum * x) * std::cos(0.5 * d.k_diff * x - d.alpha);
        const cplx up = 2.0 * hbar * d.rabi * std::exp(-I * d.gamma) * f;
        MatrixXcd h = hbar * detuning * InternalLevels::Iz();
        h(2, 0) += up;
        h(0, 2) += std::conj(up);
        return h;
    };
}

inline MatrixXcd rotating_frame_H(const MatchedDrive& d, double detuning, const FockBasis& b) {
    MatrixXcd H = on_motion(b.hamiltonian()) + b.hbar * detuning * oracle::kron(InternalLevels::Iz(), MatrixXcd::Identity(b.N, b.N));
    if (d.rabi != 0.0) H += matched_dipole_H(d, b);
    return H;
}

inline MatrixXcd rotating_frame_H(const InternalLevels& lv, const MatchedDrive& d, double omega0, const FockBasis& b) {
    return rotating_frame_H(d, lv.omega_a(b.hbar) - omega0, b);
}

inline MatrixXcd commutator_Q(const MatchedDrive& d, const FockBasis& b) {
    const MatrixXcd A = matched_dipole_H(d.with_gamma(0.0), b);
    const MatrixXcd B = matched_dipole_H(d.with_gamma(pi / 2), b);
    return I * (A * B - B * A);
}

// -16 hbar^2 Omega^2 I_z cos^2(dk x / 2 - alpha)
inline MatrixXcd commutator_Q_closed_form(const MatchedDrive& d, const FockBasis& b) {
    const MatrixXcd c2 = b.function_of_x([&](double x) {
        const double c = std::cos(0.5 * d.k_diff * x - d.alpha);
        return cplx(c * c);
    });
    return -16.0 * b.hbar * b.hbar * d.rabi * d.rabi * oracle::kron(InternalLevels::Iz(), c2);
}

inline double operator_norm(const MatrixXcd& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXcd> svd(A);
    return svd.singularValues()(0);
}

inline double relative_operator_error(const MatrixXcd& got, const MatrixXcd& want) {
    const double n = operator_norm(want);
    return operator_norm(got - want) / (n > 0.0 ? n : 1.0);
}

// ---- pulse programs -------------------------------------------------------

struct FreeEvolve {
    double t;
};
// Stand-in for U_o(t)^+: free evolution for 2 k pi / omega - t.
struct FreeEvolveInverse {
    double t;
    long k;
};
// Lasers on in the trap: exp(-i (H0 + H_I(alpha, gamma)) t / hbar); reversed flips the sign.
struct LaserOn {
    MatchedDrive d;
    double t;
    bool reversed = false;
};
// exp(-i H_I(alpha, gamma) t / hbar); adjoint gives its inverse.
struct Drive {
    MatchedDrive d;
    double t;
    bool adjoint = false;
};
using Primitive = std::variant<FreeEvolve, FreeEvolveInverse, LaserOn, Drive>;

struct PulseProgram {
    std::vector<Primitive> steps;  // steps[0] acts first
    int error_exponent = 0;        // error = O(dt^error_exponent)
    std::string label;

    // Reversed laser segments and abstract inverses have no laboratory realization.
    bool realizable() const {
        for (const auto& s : steps) {
            if (auto l = std::get_if<LaserOn>(&s); l && l->reversed) return false;
            if (auto d = std::get_if<Drive>(&s); d && d->adjoint) return false;
        }
        return true;
    }
};

inline FreeEvolveInverse free_inverse(double t, double omega) { return {t, minimal_period_count(omega, t)}; }

namespace detail {
inline void symmetric_first(std::vector<Primitive>& out, const MatchedDrive& d, double tau, double omega) {
    if (tau > 0.0) {
        out.push_back(free_inverse(0.5 * tau, omega));
        out.push_back(LaserOn{d, tau, false});
        out.push_back(free_inverse(0.5 * tau, omega));
    } else {
        // Exact inverse of the positive-time block.
        out.push_back(FreeEvolve{-0.5 * tau});
        out.push_back(LaserOn{d, -tau, true});
        out.push_back(FreeEvolve{-0.5 * tau});
    }
}

inline void suzuki(std::vector<Primitive>& out, const MatchedDrive& d, double tau, int n, double omega) {
    if (n == 1) return symmetric_first(out, d, tau, omega);
    const double p = 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * n - 1.0)));
    for (int j = 0; j < 2; ++j) suzuki(out, d, p * tau, n - 1, omega);
    suzuki(out, d, (1.0 - 4.0 * p) * tau, n - 1, omega);
    for (int j = 0; j < 2; ++j) suzuki(out, d, p * tau, n - 1, omega);
}
}  // namespace detail

inline double suzuki_p(int n) { return 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * n - 1.0))); }

// order 1, 2, or 2n-1 (n >= 2).
inline PulseProgram compile_UI(const MatchedDrive& d, double dt, int order, double omega) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (!(omega > 0.0)) throw DomainError("trap frequency must be positive");
    PulseProgram p;
    if (order == 1) {
        p.steps = {LaserOn{d, dt, false}, free_inverse(dt, omega)};
        p.error_exponent = 2;
        p.label = "U_I first order";
    } else if (order == 2) {
        detail::symmetric_first(p.steps, d, dt, omega);
        p.error_exponent = 3;
        p.label = "U_I symmetric S1";
    } else if (order >= 3 && order % 2 == 1) {
        const int n = (order + 1) / 2;
        detail::suzuki(p.steps, d, dt, n, omega);
        p.error_exponent = order + 2;
        p.label = "U_I Suzuki S" + std::to_string(order);
    } else {
        throw DomainError("U_I order must be 1, 2 or an odd number >= 3");
    }
    return p;
}

enum class QVariant { basic, improved, realizable };

inline QVariant parse_q_variant(const std::string& s) {
    if (s == "basic") return QVariant::basic;
    if (s == "improved") return QVariant::improved;
    if (s == "realizable") return QVariant::realizable;
    throw DomainError("unknown Q-sequence variant: " + s);
}

// Approximates exp(i Q dt^2 / hbar^2). With segments = n the sequence for dt/sqrt(n)
// is repeated n times, which is exact for the target and divides the error by about n.
inline PulseProgram compile_Q_sequence(const MatchedDrive& d, double dt, QVariant variant, int segments = 1) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (segments < 1) throw DomainError("segment count must be positive");
    dt /= std::sqrt(double(segments));
    const double g = d.gamma;
    struct F {
        double gamma_offset;
        bool adjoint;
    };
    std::vector<F> ops;  // written left to right, rightmost acts first
    double tau = dt;
    PulseProgram p;
    switch (variant) {
        case QVariant::basic:
            ops = {{0, false}, {pi / 2, false}, {0, true}, {pi / 2, true}};
            p.error_exponent = 3;
            p.label = "Q basic";
            break;
        case QVariant::improved:
            tau = dt / std::sqrt(2.0);
            ops = {{0, false},      {pi / 2, false}, {0, true},  {pi / 2, true},
                   {0, true},       {pi / 2, true},  {0, false}, {pi / 2, false}};
            p.error_exponent = 4;
            p.label = "Q improved";
            break;
        case QVariant::realizable:
            tau = dt / std::sqrt(2.0);
            ops = {{0, false},      {pi / 2, false}, {pi, false}, {3 * pi / 2, false},
                   {pi, false},     {3 * pi / 2, false}, {0, false}, {pi / 2, false}};
            p.error_exponent = 4;
            p.label = "Q realizable";
            break;
        default:
            throw DomainError("unknown Q-sequence variant");
    }
    for (int rep = 0; rep < segments; ++rep)
        for (auto it = ops.rbegin(); it != ops.rend(); ++it)
            p.steps.push_back(Drive{d.with_gamma(g + it->gamma_offset), tau, it->adjoint});
    return p;
}

inline double rotation_angle(const MatchedDrive& d, double dt) { return 16.0 * d.rabi * d.rabi * dt * dt; }

inline PulseProgram rotation_Rz(const MatchedDrive& d, double dt, QVariant variant = QVariant::realizable,
                                int segments = 1) {
    if (d.alpha != 0.0) throw DomainError("R_z needs alpha = 0");
    auto p = compile_Q_sequence(d, dt, variant, segments);
    p.label = "R_z";
    return p;
}

// ---- execution on the Fock oracle ----------------------------------------

// Caches one eigendecomposition per distinct drive; not meant to be shared across threads.
class ProgramExecutor {
public:
    explicit ProgramExecutor(const FockBasis& b) : basis_(b), energies_(3 * b.N) {
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t n = 0; n < b.N; ++n) energies_(l * b.N + n) = b.hbar * b.omega * (double(n) + 0.5);
    }

    const FockBasis& basis() const { return basis_; }

    template <class Mat>
    void apply_in_place(const PulseProgram& p, Mat& psi) {
        if (std::size_t(psi.rows()) != 3 * basis_.N) throw DomainError("state size does not match the basis");
        for (const auto& s : p.steps) step(s, psi);
    }
    VectorXcd apply(const PulseProgram& p, VectorXcd psi) {
        apply_in_place(p, psi);
        return psi;
    }
    MatrixXcd unitary(const PulseProgram& p) {
        MatrixXcd U = MatrixXcd::Identity(3 * basis_.N, 3 * basis_.N);
        apply_in_place(p, U);
        return U;
    }

    // exp(-i G t / hbar) for G = H_I(alpha, gamma) or G = H0 + H_I(alpha, gamma).
    MatrixXcd exact(const MatchedDrive& d, double t, bool with_trap) {
        const auto& sp = spectrum(d, with_trap);
        const VectorXcd ph = (-I * t / basis_.hbar * sp.lambda.cast<cplx>()).array().exp();
        return sp.V * ph.asDiagonal() * sp.V.adjoint();
    }

private:
    struct Spectrum {
        MatrixXcd V;
        Eigen::VectorXd lambda;
    };

    const Spectrum& spectrum(const MatchedDrive& d, bool with_trap) {
        const std::array<double, 6> key{d.alpha, d.gamma, d.rabi, d.k_sum, d.k_diff, with_trap ? 1.0 : 0.0};
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        MatrixXcd H = matched_dipole_H(d, basis_);
        if (with_trap) H += energies_.cast<cplx>().asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
        return cache_.emplace(key, Spectrum{es.eigenvectors(), es.eigenvalues()}).first->second;
    }

    template <class Mat>
    void free_step(double t, Mat& psi) const {
        const VectorXcd ph = (-I * t / basis_.hbar * energies_.cast<cplx>()).array().exp();
        psi = ph.asDiagonal() * psi;
    }
    template <class Mat>
    void spectral_step(const Spectrum& sp, double signed_t, Mat& psi) const {
        const VectorXcd ph = (-I * signed_t / basis_.hbar * sp.lambda.cast<cplx>()).array().exp();
        Mat tmp = sp.V.adjoint() * psi;
        tmp = ph.asDiagonal() * tmp;
        psi = sp.V * tmp;
    }
    template <class Mat>
    void step(const Primitive& s, Mat& psi) {
        std::visit(
            [&](const auto& q) {
                using Q = std::decay_t<decltype(q)>;
                if constexpr (std::is_same_v<Q, FreeEvolve>) {
                    free_step(q.t, psi);
                } else if constexpr (std::is_same_v<Q, FreeEvolveInverse>) {
                    const double t1 = 2.0 * pi * double(q.k) / basis_.omega - q.t;
                    if (!(t1 > 0.0)) throw DomainError("inverse free segment needs a larger period count");
                    free_step(t1, psi);
                } else if constexpr (std::is_same_v<Q, LaserOn>) {
                    spectral_step(spectrum(q.d, true), q.reversed ? -q.t : q.t, psi);
                } else {
                    spectral_step(spectrum(q.d, false), q.adjoint ? -q.t : q.t, psi);
                }
            },
            s);
    }

    FockBasis basis_;
    Eigen::VectorXd energies_;
    std::map<std::array<double, 6>, Spectrum> cache_;
};

// min over theta of |a - e^{i theta} b|
inline double distance_up_to_phase(const VectorXcd& a, const VectorXcd& b) {
    const cplx ov = b.dot(a);
    const cplx ph = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx(1.0);
    return (a - ph * b).norm();
}

// Product state |level> x Gaussian on the Fock basis.
inline FockState product_state(Level level, const GaussianState& s, const FockBasis& b) {
    return oracle::fock_from_gaussian(s, b, index(level), level_count);
}

struct TriggerOptions {
    double tail_limit = 1e-12;   // initial state
    double final_tail_limit = 1e-8;
    std::size_t grid_points = 1024;
};

struct BranchReport {
    double population = 0, mean_position = 0, mean_momentum = 0;
};

struct TriggerResult {
    FockState state;
    std::array<BranchReport, 3> branches;
    Level dominant;
    oracle::FitResult fit;  // Gaussian fitted to the dominant branch
    double fitted_energy;   // pbar^2/2m + m omega^2 x0^2 / 2 of the fit
    double initial_overlap; // |<initial|final>|
};

inline TriggerResult apply_trigger(const PulseProgram& p, Level initial, const GaussianState& s, const FockBasis& b,
                                   const TriggerOptions& opt = {}) {
    FockState psi0 = product_state(initial, s, b);
    if (psi0.tail() > opt.tail_limit)
        throw TruncationError("Fock basis too small for the initial state", int(2 * b.N));
    ProgramExecutor ex(b);
    FockState out = psi0;
    out.amp = ex.apply(p, psi0.amp);
    if (out.tail() > opt.final_tail_limit)
        throw TruncationError("Fock basis too small for the kicked state", int(2 * b.N));

    std::array<BranchReport, 3> branches{};
    Level dominant = Level::g0;
    const MatrixXcd X = b.position(), P = b.momentum();
    double best = -1;
    for (std::size_t l = 0; l < 3; ++l) {
        const VectorXcd v = out.amp.segment(l * b.N, b.N);
        auto& br = branches[l];
        br.population = v.squaredNorm();
        if (br.population > 0.0) {
            br.mean_position = v.dot(X * v).real() / br.population;
            br.mean_momentum = v.dot(P * v).real() / br.population;
        }
        if (br.population > best) {
            best = br.population;
            dominant = Level(l);
        }
    }
    const double l = b.length();
    const double reach = std::sqrt(2.0 * double(b.N) + 1.0) * l + 8.0 * l;
    const auto g = UniformGrid::spanning(-reach, reach, opt.grid_points);
    auto fit = oracle::fit_gaussian(oracle::fock_to_grid(out, index(dominant), b, g), g, b.mass, b.hbar);
    const auto& f = fit.state;
    const double energy = f.mean_momentum() * f.mean_momentum() / (2.0 * b.mass) +
                          0.5 * b.mass * b.omega * b.omega * f.x_center() * f.x_center();
    const double overlap = std::abs(psi0.amp.dot(out.amp)) / (psi0.norm() * out.norm());
    TriggerResult r{out, branches, dominant, fit, energy, overlap};
    return r;
}

// Kick magnitude 4 hbar Omega^2 dk dt^2 and the matching energy.
inline double kick_momentum(double rabi, double delta_k, double dt, double hbar) {
    return 4.0 * hbar * rabi * rabi * delta_k * dt * dt;
}
inline double kick_energy(double rabi, double delta_k, double dt, double m, double hbar) {
    const double p = kick_momentum(rabi, delta_k, dt, hbar);
    return p * p / (2.0 * m);
}

// ---- off-resonant effective model -----------------------------------------

struct EffectiveParams {
    cplx beta;              // as written, with the e^{i omega t} factors
    cplx beta_schrodinger;  // beta e^{-i omega t}: the coefficient of a^+ at fixed a
    double omega_a_eff, omega_eff, omega_e0, omega_e1;
    std::optional<double> force;  // sqrt(2 m hbar omega) beta_schrodinger when it is real
    double nonsecular_ratio;      // max |Omega_l| / |omega_a - omega_l|
};

inline EffectiveParams effective_params(const RamanPair& p, const InternalLevels& lv, double omega, double t, double m,
                                        double hbar, double tol = 1e-11, double real_tol = 1e-8) {
    if (!(omega > 0.0) || !(m > 0.0) || !(hbar > 0.0)) throw DomainError("omega, m, hbar must be positive");
    const double wa = lv.omega_a(hbar);
    const double d0 = wa - p.omega0, d1 = wa - p.omega1;
    const double tiny = 1e-14 * std::max(1.0, std::abs(wa));
    if (std::abs(d0) <= tiny || std::abs(d1) <= tiny) throw SingularParameter("laser detuning from omega_a is zero");
    const double dw = p.delta_omega(), dphi = p.delta_phi(), dk = p.delta_k();

    auto om_eff = [&](double s) {
        const double r = p.rabi0(s) * p.rabi1(s);
        return 2.0 * p.k0 * r / d1 - 2.0 * p.k1 * r / d0;
    };
    const double r0 = p.rabi0(t), r1 = p.rabi1(t);
    EffectiveParams e{};
    e.omega_e0 = 2.0 * r0 * r1 / d0;
    e.omega_e1 = 2.0 * r0 * r1 / d1;
    e.omega_eff = om_eff(t);
    e.omega_a_eff = wa + 4.0 * r0 * r0 / d0 + 4.0 * r1 * r1 / d1 +
                    2.0 * (e.omega_e0 + e.omega_e1) * std::cos(dw * t + dphi);
    e.nonsecular_ratio = std::max(std::abs(r0 / d0), std::abs(r1 / d1));

    double re = 0, im = 0, mag = 0;
    if (t != 0.0) {
        re = integrate_or_throw([&](double s) { return om_eff(s) * std::sin(dw * s + dphi) * std::cos(omega * s); }, 0.0, t,
                                tol, "beta integral");
        im = integrate_or_throw([&](double s) { return om_eff(s) * std::sin(dw * s + dphi) * std::sin(omega * s); }, 0.0, t,
                                tol, "beta integral");
        mag = integrate_or_throw([&](double s) { return std::abs(om_eff(s)); }, 0.0, t, tol, "beta integral");
    }
    const double a = std::sqrt(2.0 * hbar * omega / m), bcoef = dk * std::sqrt(2.0 * hbar / (m * omega));
    const cplx eiwt = std::exp(I * omega * t);
    const double boundary = bcoef * (e.omega_e0 + e.omega_e1) * std::sin(dw * t + dphi);
    e.beta = -I * a * cplx(re, im) + boundary * eiwt;
    e.beta_schrodinger = e.beta * std::conj(eiwt);
    const double scale = a * mag + std::abs(bcoef) * (std::abs(e.omega_e0) + std::abs(e.omega_e1));
    if (std::abs(e.beta_schrodinger.imag()) <= real_tol * std::max(scale, 1e-300) + tol * a)
        e.force = std::sqrt(2.0 * m * hbar * omega) * e.beta_schrodinger.real();
    return e;
}

// Forced-oscillator prediction for one internal branch: force -f/2 on g0, +f/2 on e.
inline GaussianState effective_forced_prediction(const RamanPair& p, const InternalLevels& lv, double omega, Level branch,
                                                 double T, const GaussianState& s0, double tol = 1e-11) {
    if (branch == Level::g1) throw DomainError("the effective force acts on g0 and e only");
    const double m = s0.mass(), hbar = s0.hbar();
    const double sign = branch == Level::g0 ? -0.5 : 0.5;
    auto force_at = [=](double t) {
        auto e = effective_params(p, lv, omega, t, m, hbar, tol);
        if (!e.force) throw ModelDomainError("beta(t) is not real at t = " + std::to_string(t));
        return sign * *e.force;
    };
    // Fail early on a complex beta before the propagator quadratures start.
    for (int j = 0; j <= 32; ++j) force_at(T * j / 32.0);
    ForceSpec fs{TimeFunction::custom(force_at)};
    return apply(forced_harmonic(omega, fs, T, m, hbar), s0);
}

// Mean of -dH/dx in the adiabatically dressed g0 state, first order in Omega/Delta, near x = 0:
// hbar Omega_eff(t) sin(dw t + dphi). The e branch feels the opposite force.
inline double dressed_force_g0(const RamanPair& p, const InternalLevels& lv, double t, double hbar) {
    const double wa = lv.omega_a(hbar);
    const double d0 = wa - p.omega0, d1 = wa - p.omega1;
    const double tiny = 1e-14 * std::max(1.0, std::abs(wa));
    if (std::abs(d0) <= tiny || std::abs(d1) <= tiny) throw SingularParameter("laser detuning from omega_a is zero");
    const double r = p.rabi0(t) * p.rabi1(t);
    const double om_eff = 2.0 * p.k0 * r / d1 - 2.0 * p.k1 * r / d0;
    return hbar * om_eff * std::sin(p.delta_omega() * t + p.delta_phi());
}

inline GaussianState dressed_force_prediction(const RamanPair& p, const InternalLevels& lv, double omega, Level branch,
                                              double T, const GaussianState& s0) {
    if (branch == Level::g1) throw DomainError("the dressed force acts on g0 and e only");
    const double hbar = s0.hbar();
    const double sign = branch == Level::g0 ? -1.0 : 1.0;  // H gains +f x = -F x
    ForceSpec fs{TimeFunction::custom([=](double t) { return sign * dressed_force_g0(p, lv, t, hbar); })};
    return apply(forced_harmonic(omega, fs, T, s0.mass(), hbar), s0);
}

// Full two-beam model in the frame rotating at omega0 on the internal states:
// H0 + hbar (omega_a - omega0) I_z + hbar Omega0 (e^{-i phi0} I+ e^{i k0 x} + h.c.)
//   + hbar Omega1 (e^{i (dw t - phi1)} I+ e^{i k1 x} + h.c.)
inline std::function<MatrixXcd(double)> raman_frame_H(const RamanPair& p, const InternalLevels& lv, const FockBasis& b) {
    const MatrixXcd e0 = oracle::kron(InternalLevels::Iplus(), b.exp_ikx(p.k0));
    const MatrixXcd e1 = oracle::kron(InternalLevels::Iplus(), b.exp_ikx(p.k1));
    const MatrixXcd base = on_motion(b.hamiltonian()) +
                           b.hbar * (lv.omega_a(b.hbar) - p.omega0) *
                               oracle::kron(InternalLevels::Iz(), MatrixXcd::Identity(b.N, b.N));
    const double hbar = b.hbar;
    return [=](double t) {
        const cplx c0 = hbar * p.rabi0(t) * std::exp(-I * p.phi0);
        const cplx c1 = hbar * p.rabi1(t) * std::exp(I * (p.delta_omega() * t - p.phi1));
        MatrixXcd up = c0 * e0 + c1 * e1;
        MatrixXcd H = base + up + up.adjoint();
        return H;
    };
}

}  // namespace gwp::trigger
