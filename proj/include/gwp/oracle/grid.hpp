#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <functional>
#include <vector>

#include "gwp/core.hpp"

namespace gwp::oracle {

using Amplitudes = std::vector<cplx>;

// Wavefunction on a periodic uniform grid, one amplitude array per internal level.
struct GridState {
    UniformGrid grid;
    double mass = 1.0, hbar = 1.0;
    std::vector<Amplitudes> levels;

    std::size_t size() const { return grid.n; }
    std::size_t n_levels() const { return levels.size(); }

    double population(std::size_t level) const {
        double s = 0;
        for (auto z : levels.at(level)) s += std::norm(z);
        return s * grid.dx;
    }
    double norm() const {
        double s = 0;
        for (std::size_t l = 0; l < levels.size(); ++l) s += population(l);
        return std::sqrt(s);
    }
};

inline bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

inline void check_grid(const UniformGrid& g) {
    if (g.n < 256 || !is_power_of_two(g.n)) throw DomainError("grid size must be a power of two >= 256");
    if (!(g.dx > 0.0)) throw DomainError("grid spacing must be positive");
}

// Domain of +-8 spreadings around [lo, hi] with at least 16 points per min_sigma.
inline UniformGrid default_grid(double lo, double hi, double max_sigma, double min_sigma,
                                double pad_sigmas = 8.0) {
    if (!(max_sigma > 0.0) || !(min_sigma > 0.0) || hi < lo) throw DomainError("invalid grid request");
    const double x_min = lo - pad_sigmas * max_sigma, x_max = hi + pad_sigmas * max_sigma;
    std::size_t n = 256;
    while ((x_max - x_min) / double(n) > min_sigma / 16.0) n *= 2;
    return UniformGrid::spanning(x_min, x_max, n);
}

inline GridState grid_from_gaussian(const GaussianState& s, const UniformGrid& g,
                                    std::size_t level = 0, std::size_t n_levels = 1) {
    check_grid(g);
    if (level >= n_levels) throw DomainError("level index out of range");
    GridState out{g, s.mass(), s.hbar(), std::vector<Amplitudes>(n_levels, Amplitudes(g.n, 0.0))};
    out.levels[level] = sample_wavefunction(s, g).values;
    return out;
}

// Angular wavenumbers in FFT order.
inline std::vector<double> wavenumbers(const UniformGrid& g) {
    std::vector<double> k(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        const double idx = j < g.n / 2 ? double(j) : double(j) - double(g.n);
        k[j] = 2.0 * pi * idx / (double(g.n) * g.dx);
    }
    return k;
}

struct Moments {
    double mean_x, var_x, mean_p, var_p, cov_xp;
};

// Position and momentum moments of a single amplitude array (normalized internally).
inline Moments moments(const Amplitudes& psi, const UniformGrid& g, double hbar) {
    Eigen::FFT<double> fft;
    Amplitudes phi;
    fft.fwd(phi, psi);
    const auto k = wavenumbers(g);
    double n = 0, mx = 0, mx2 = 0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double r = std::norm(psi[j]);
        n += r;
        mx += r * g.x(j);
        mx2 += r * g.x(j) * g.x(j);
    }
    if (!(n > 0.0)) throw NumericError("empty amplitude array");
    mx /= n;
    double np = 0, mp = 0, mp2 = 0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double r = std::norm(phi[j]);
        np += r;
        mp += r * hbar * k[j];
        mp2 += r * hbar * hbar * k[j] * k[j];
    }
    mp /= np;
    // <x p> through p psi = -i hbar psi'.
    Amplitudes dphi(g.n);
    for (std::size_t j = 0; j < g.n; ++j) dphi[j] = I * k[j] * phi[j];
    Amplitudes dpsi;
    fft.inv(dpsi, dphi);
    cplx xp = 0;
    for (std::size_t j = 0; j < g.n; ++j) xp += std::conj(psi[j]) * g.x(j) * (-I * hbar) * dpsi[j];
    return {mx, mx2 / n - mx * mx, mp, mp2 / np - mp * mp, xp.real() / n - mx * mp};
}

// H = s p^2/2m + b(xp+px)/2 + c x^2/2 + d p + f x  (+ coupling(x, t) across levels).
// s = -1 gives the inverted kinetic term. Empty coefficient functions count as zero.
struct GridHamiltonian {
    double kinetic_sign = 1.0;
    std::function<double(double)> b, c, d, f;
    std::function<Eigen::MatrixXcd(double x, double t)> coupling;
};

struct GridOptions {
    double step_norm_drift = 1e-12;
    double total_norm_drift = 1e-10;
    double escape_sigmas = 4.0;
};

namespace detail {

inline double eval(const std::function<double(double)>& fn, double t) { return fn ? fn(t) : 0.0; }

// Position-space edge check: mean +- escape_sigmas deviations must stay inside.
inline void check_escape(const GridState& s, const GridOptions& opt) {
    double n = 0, mx = 0, mx2 = 0;
    for (const auto& lv : s.levels)
        for (std::size_t j = 0; j < s.grid.n; ++j) {
            const double r = std::norm(lv[j]);
            n += r;
            mx += r * s.grid.x(j);
            mx2 += r * s.grid.x(j) * s.grid.x(j);
        }
    mx /= n;
    const double sd = std::sqrt(std::max(mx2 / n - mx * mx, 0.0));
    if (mx - opt.escape_sigmas * sd < s.grid.x_min || mx + opt.escape_sigmas * sd > s.grid.x_max())
        throw DomainEscape("wave packet reached the grid boundary");
}

inline void check_momentum_escape(const std::vector<Amplitudes>& phis, const std::vector<double>& k,
                                  const GridOptions& opt) {
    double n = 0, m1 = 0, m2 = 0, kmax = 0;
    for (double kk : k) kmax = std::max(kmax, std::abs(kk));
    for (const auto& ph : phis)
        for (std::size_t j = 0; j < k.size(); ++j) {
            const double r = std::norm(ph[j]);
            n += r;
            m1 += r * k[j];
            m2 += r * k[j] * k[j];
        }
    m1 /= n;
    const double sd = std::sqrt(std::max(m2 / n - m1 * m1, 0.0));
    if (std::abs(m1) + opt.escape_sigmas * sd > kmax)
        throw DomainEscape("momentum distribution reached the grid cutoff");
}

struct Stepper {
    Eigen::FFT<double> fft;
    std::vector<double> k;
    Amplitudes buf;

    // exp(-i tau (s p^2/2m + d p)/hbar) applied in momentum space; also returns spectra.
    void kinetic(GridState& st, double tau, double s, double d, std::vector<Amplitudes>* spectra) {
        const std::size_t n = st.grid.n;
        for (std::size_t l = 0; l < st.levels.size(); ++l) {
            fft.fwd(buf, st.levels[l]);
            for (std::size_t j = 0; j < n; ++j) {
                const double p = st.hbar * k[j];
                buf[j] *= std::exp(-I * tau * (s * p * p / (2.0 * st.mass) + d * p) / st.hbar);
            }
            if (spectra) (*spectra)[l] = buf;
            fft.inv(st.levels[l], buf);
        }
    }

    // Multiplication by exp(i c x^2 / 2hbar) moves p -> p + c x.
    static void x_shear(GridState& st, double c) {
        for (auto& lv : st.levels)
            for (std::size_t j = 0; j < st.grid.n; ++j) {
                const double x = st.grid.x(j);
                lv[j] *= std::exp(I * c * x * x / (2.0 * st.hbar));
            }
    }

    // Dilation x -> lambda x generated by b(xp+px)/2, split as four shears.
    void dilation(GridState& st, double lambda) {
        const double eps = lambda - 1.0;
        if (eps == 0.0) return;
        const double L = st.grid.x_max() - st.grid.x_min;
        const double pmax = st.hbar * pi / st.grid.dx;
        const double b1 = std::sqrt(std::abs(eps)) * L / pmax;
        const double b2 = -b1 / lambda;
        const double c2 = eps / b2, c1 = (1.0 / lambda - 1.0) / b2;
        // Matrix product P(b1) X(c1) P(b2) X(c2); the rightmost acts first.
        x_shear(st, c2);
        kinetic(st, b2 * st.mass, 1.0, 0.0, nullptr);
        x_shear(st, c1);
        kinetic(st, b1 * st.mass, 1.0, 0.0, nullptr);
    }

    void potential(GridState& st, double tau, double c, double f,
                   const std::function<Eigen::MatrixXcd(double, double)>& coupling, double t) {
        const std::size_t L = st.levels.size();
        for (std::size_t j = 0; j < st.grid.n; ++j) {
            const double x = st.grid.x(j);
            const double v = 0.5 * c * x * x + f * x;
            if (!coupling) {
                const cplx ph = std::exp(-I * tau * v / st.hbar);
                for (auto& lv : st.levels) lv[j] *= ph;
                continue;
            }
            Eigen::MatrixXcd h = coupling(x, t);
            if (std::size_t(h.rows()) != L || std::size_t(h.cols()) != L)
                throw DomainError("coupling matrix size does not match the level count");
            h += v * Eigen::MatrixXcd::Identity(L, L);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
            const Eigen::VectorXcd ph =
                (-I * tau / st.hbar * es.eigenvalues().cast<cplx>()).array().exp();
            Eigen::VectorXcd amp(L);
            for (std::size_t l = 0; l < L; ++l) amp(l) = st.levels[l][j];
            amp = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * amp;
            for (std::size_t l = 0; l < L; ++l) st.levels[l][j] = amp(l);
        }
    }
};

}  // namespace detail

// Strang steps K/2 D/2 V D/2 K/2 with coefficients sampled at the step midpoint.
inline GridState grid_evolve(const GridHamiltonian& H, GridState psi, double dt, std::size_t steps,
                             double t0 = 0.0, const GridOptions& opt = {}) {
    check_grid(psi.grid);
    if (psi.levels.empty()) throw DomainError("grid state has no levels");
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    detail::Stepper st;
    st.k = wavenumbers(psi.grid);
    const double n0 = psi.norm();
    std::vector<Amplitudes> spectra(psi.levels.size());
    detail::check_escape(psi, opt);
    for (std::size_t s = 0; s < steps; ++s) {
        const double tm = t0 + (double(s) + 0.5) * dt;
        const double b = detail::eval(H.b, tm), c = detail::eval(H.c, tm);
        const double d = detail::eval(H.d, tm), f = detail::eval(H.f, tm);
        const double before = psi.norm();
        st.kinetic(psi, 0.5 * dt, H.kinetic_sign, d, nullptr);
        if (b != 0.0) st.dilation(psi, std::exp(0.5 * b * dt));
        st.potential(psi, dt, c, f, H.coupling, tm);
        if (b != 0.0) st.dilation(psi, std::exp(0.5 * b * dt));
        st.kinetic(psi, 0.5 * dt, H.kinetic_sign, d, &spectra);
        const double after = psi.norm();
        if (std::abs(after - before) > opt.step_norm_drift) throw StepSizeError("norm drift per step exceeded");
        detail::check_escape(psi, opt);
        if (s % 16 == 15 || s + 1 == steps) detail::check_momentum_escape(spectra, st.k, opt);
    }
    if (std::abs(psi.norm() - n0) > opt.total_norm_drift) throw StepSizeError("total norm drift exceeded");
    return psi;
}

// Convenience: evolve over duration T with the smallest step count giving dt <= max_dt.
inline GridState grid_evolve_for(const GridHamiltonian& H, GridState psi, double T, double max_dt,
                                 double t0 = 0.0, const GridOptions& opt = {}) {
    if (T == 0.0) return psi;
    if (!(T > 0.0) || !(max_dt > 0.0)) throw DomainError("duration and step must be positive");
    const auto steps = std::size_t(std::ceil(T / max_dt));
    return grid_evolve(H, std::move(psi), T / double(steps), steps, t0, opt);
}

}  // namespace gwp::oracle
