#pragma once

#include <optional>
#include <string>

#include "gwp/oracle/grid.hpp"

namespace gwp::oracle {

inline cplx inner(const Amplitudes& a, const Amplitudes& b, double dx) {
    if (a.size() != b.size()) throw DomainError("amplitude arrays differ in size");
    cplx s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
    return s * dx;
}

inline double l2_norm(const Amplitudes& a, double dx) { return std::sqrt(std::abs(inner(a, a, dx))); }

// |<a|b>| / (|a| |b|)
inline double fidelity(const Amplitudes& a, const Amplitudes& b, double dx) {
    return std::abs(inner(a, b, dx)) / (l2_norm(a, dx) * l2_norm(b, dx));
}

// min over theta of || a - e^{i theta} b ||
inline double l2_distance_up_to_phase(const Amplitudes& a, const Amplitudes& b, double dx) {
    const cplx ov = inner(b, a, dx);
    const cplx ph = ov == cplx(0.0) ? cplx(1.0) : ov / std::abs(ov);
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - ph * b[j]);
    return std::sqrt(s * dx);
}

struct FitResult {
    GaussianState state;
    double residual;
    std::optional<std::string> warning;
};

// Moments fix x0, pbar, delta_sq and tw; the phase comes from the overlap.
inline FitResult fit_gaussian(const Amplitudes& psi, const UniformGrid& g, double mass, double hbar,
                              double residual_warning = 1e-3) {
    const double n = l2_norm(psi, g.dx);
    if (!(n > 0.0)) throw NumericError("cannot fit an empty amplitude array");
    const auto mo = moments(psi, g, hbar);
    if (!(mo.var_p > 0.0)) throw NumericError("momentum variance is not positive");
    const double dsq = hbar * hbar / (4.0 * mo.var_p);
    const double tw = 4.0 * mass * dsq * mo.cov_xp / (hbar * hbar);
    GaussianState s(mass, hbar, mo.mean_x, mo.mean_p, dsq, tw, 0.0);
    const auto ref = sample_wavefunction(s, g).values;
    const cplx ov = inner(ref, psi, g.dx);
    s = s.with_phase(std::arg(ov));
    Amplitudes unit(psi);
    for (auto& z : unit) z /= n;
    const double residual = l2_distance_up_to_phase(unit, ref, g.dx);
    FitResult out{s, residual, std::nullopt};
    if (residual > residual_warning) out.warning = "state is not Gaussian: fit residual " + std::to_string(residual);
    return out;
}

struct ComparisonReport {
    double l2_error;
    double fidelity;
    FitResult fitted;
    double d_x_center, d_mean_momentum, d_delta_sq, d_tw;
};

inline ComparisonReport compare(const GaussianState& analytic, const Amplitudes& numeric, const UniformGrid& g,
                                double mass, double hbar) {
    if (std::abs(analytic.mass() - mass) > 1e-14 * mass || std::abs(analytic.hbar() - hbar) > 1e-14 * hbar)
        throw DomainError("analytic state and grid use different units");
    if (numeric.size() != g.n) throw DomainError("amplitude array does not match the grid");
    const auto ref = sample_wavefunction(analytic, g);
    if (ref.warning) throw DomainError("grid does not cover the analytic state: " + *ref.warning);
    const double n = l2_norm(numeric, g.dx);
    Amplitudes unit(numeric);
    for (auto& z : unit) z /= n;
    auto fit = fit_gaussian(numeric, g, mass, hbar);
    return {l2_distance_up_to_phase(unit, ref.values, g.dx),
            fidelity(ref.values, unit, g.dx),
            fit,
            fit.state.x_center() - analytic.x_center(),
            fit.state.mean_momentum() - analytic.mean_momentum(),
            fit.state.delta_sq() - analytic.delta_sq(),
            fit.state.tw() - analytic.tw()};
}

inline ComparisonReport compare(const GaussianState& analytic, const GridState& numeric, std::size_t level = 0) {
    return compare(analytic, numeric.levels.at(level), numeric.grid, numeric.mass, numeric.hbar);
}

}  // namespace gwp::oracle
