#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gwp/errors.hpp"

namespace gwp {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = std::numbers::pi;

// Phase in radians, or nothing when the branch could not be followed.
using Phase = std::optional<double>;

// Gaussian packet with center x0, mean momentum pbar and complex linewidth
// W = delta_sq + i*hbar*tw/(2m). The wavefunction is
//   e^{i phi} (delta_sq/2pi)^{1/4} W^{-1/2} exp(-(x-x0)^2/(4W)) exp(i pbar x/hbar).
// pbar is the physical mean momentum, i.e. p0 = -pbar in the exp(-i p0 x) form.
class GaussianState {
public:
    GaussianState(double mass, double hbar, double x_center, double mean_momentum,
                  double delta_sq, double tw, Phase global_phase = 0.0)
        : mass_(mass), hbar_(hbar), x_center_(x_center), mean_momentum_(mean_momentum),
          delta_sq_(delta_sq), tw_(tw), phase_(global_phase) {
        if (!(mass > 0.0)) throw DomainError("mass must be positive");
        if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
        if (!(delta_sq > 0.0)) throw DomainError("delta_sq must be positive");
        if (!std::isfinite(x_center) || !std::isfinite(mean_momentum) || !std::isfinite(delta_sq) ||
            !std::isfinite(tw))
            throw NumericError("non-finite Gaussian parameter");
        if (phase_ && !std::isfinite(*phase_)) phase_.reset();
    }

    double mass() const { return mass_; }
    double hbar() const { return hbar_; }
    double x_center() const { return x_center_; }
    double mean_momentum() const { return mean_momentum_; }
    double p0() const { return -mean_momentum_; }
    double delta_sq() const { return delta_sq_; }
    double tw() const { return tw_; }
    const Phase& global_phase() const { return phase_; }
    bool phase_tracked() const { return phase_.has_value(); }

    double imag_linewidth() const { return hbar_ * tw_ / (2.0 * mass_); }
    cplx W() const { return {delta_sq_, imag_linewidth()}; }

    double spreading() const {
        double r = hbar_ * tw_ / (2.0 * mass_ * std::sqrt(delta_sq_));
        return std::sqrt(2.0 * (delta_sq_ + r * r));
    }
    // Standard deviation of |psi|^2.
    double position_sigma() const { return std::abs(W()) / std::sqrt(delta_sq_); }
    double momentum_sigma() const { return hbar_ / (2.0 * std::sqrt(delta_sq_)); }

    GaussianState with_phase(Phase p) const {
        return {mass_, hbar_, x_center_, mean_momentum_, delta_sq_, tw_, p};
    }

private:
    double mass_, hbar_, x_center_, mean_momentum_, delta_sq_, tw_;
    Phase phase_;
};

inline GaussianState make_gaussian(double m, double hbar, double x0, double pbar, double delta_sq,
                                   double tw, Phase phase = 0.0) {
    return {m, hbar, x0, pbar, delta_sq, tw, phase};
}

struct ComplexLinewidth {
    double real_part;  // (Delta x)^2
    double imag_part;  // hbar T / (2m)

    static ComplexLinewidth of(const GaussianState& s) {
        return {s.delta_sq(), s.imag_linewidth()};
    }
    static ComplexLinewidth from_tw(double delta_sq, double tw, double m, double hbar) {
        if (!(delta_sq > 0.0)) throw DomainError("real linewidth must be positive");
        return {delta_sq, hbar * tw / (2.0 * m)};
    }
    double tw(double m, double hbar) const { return imag_part * 2.0 * m / hbar; }
    cplx value() const { return {real_part, imag_part}; }
};

struct UniformGrid {
    double x_min = 0.0;
    double dx = 0.0;
    std::size_t n = 0;

    static UniformGrid spanning(double x_min, double x_max, std::size_t n) {
        if (n < 2 || !(x_max > x_min)) throw DomainError("grid needs n >= 2 and x_max > x_min");
        return {x_min, (x_max - x_min) / static_cast<double>(n), n};
    }
    double x(std::size_t j) const { return x_min + dx * static_cast<double>(j); }
    double x_max() const { return x_min + dx * static_cast<double>(n); }
};

struct SampledWavefunction {
    std::vector<cplx> values;
    std::optional<std::string> warning;
};

namespace detail {
// Coefficients of psi(x) = exp(-alpha x^2 + beta x + gamma).
struct GaussianExponent {
    cplx alpha, beta, gamma;
};

inline GaussianExponent exponent_of(const GaussianState& s) {
    const cplx W = s.W();
    const double x0 = s.x_center();
    const double phi = s.global_phase().value_or(0.0);
    const cplx lognorm = 0.25 * std::log(s.delta_sq() / (2.0 * pi)) + std::log(std::sqrt(1.0 / W));
    return {1.0 / (4.0 * W), x0 / (2.0 * W) + I * (s.mean_momentum() / s.hbar()),
            -x0 * x0 / (4.0 * W) + I * phi + lognorm};
}
}  // namespace detail

inline cplx wavefunction_at(const GaussianState& s, double x) {
    // Centered form keeps the exponent small far from the origin.
    const cplx W = s.W();
    const double d = x - s.x_center();
    const double phi = s.global_phase().value_or(0.0);
    const cplx pref = std::pow(s.delta_sq() / (2.0 * pi), 0.25) * std::sqrt(1.0 / W);
    return pref * std::exp(-d * d / (4.0 * W) + I * (s.mean_momentum() * x / s.hbar() + phi));
}

inline SampledWavefunction sample_wavefunction(const GaussianState& s, const UniformGrid& g) {
    if (g.n == 0) throw DomainError("empty grid");
    SampledWavefunction out;
    out.values.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j) out.values[j] = wavefunction_at(s, g.x(j));
    const double eps = s.spreading();
    if (g.x_min > s.x_center() - 6.0 * eps || g.x_max() < s.x_center() + 6.0 * eps)
        out.warning = "grid covers less than 6 spreadings around the packet center";
    return out;
}

// sqrt(pi/a) exp(b^2/(4a)), principal branch. Re(a) = 0 is the Fresnel limit.
inline cplx gaussian_integral(cplx a, cplx b) {
    if (a == cplx(0.0, 0.0)) throw DomainError("gaussian_integral: a = 0");
    if (a.real() < 0.0) throw DomainError("gaussian_integral: Re(a) < 0 diverges");
    return std::sqrt(pi / a) * std::exp(b * b / (4.0 * a));
}

// <a|b>
inline cplx overlap(const GaussianState& a, const GaussianState& b) {
    if (a.mass() != b.mass() || a.hbar() != b.hbar())
        throw DomainError("overlap: mass or hbar mismatch");
    auto ea = detail::exponent_of(a);
    auto eb = detail::exponent_of(b);
    const cplx alpha = std::conj(ea.alpha) + eb.alpha;
    const cplx beta = std::conj(ea.beta) + eb.beta;
    // Fold the constant into the exponent so large offsets cannot overflow.
    return std::sqrt(pi / alpha) *
           std::exp(beta * beta / (4.0 * alpha) + std::conj(ea.gamma) + eb.gamma);
}

}  // namespace gwp
