#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gwp/core.hpp"

namespace gwp::oracle {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Truncated number basis of a trap with frequency omega.
struct FockBasis {
    std::size_t N;
    double mass, hbar, omega;

    FockBasis(std::size_t n, double m, double h, double w) : N(n), mass(m), hbar(h), omega(w) {
        if (n < 2) throw DomainError("Fock truncation must be at least 2");
        if (!(m > 0.0) || !(h > 0.0) || !(w > 0.0)) throw DomainError("mass, hbar, omega must be positive");
    }

    double length() const { return std::sqrt(hbar / (mass * omega)); }

    MatrixXcd annihilation() const {
        MatrixXcd a = MatrixXcd::Zero(N, N);
        for (std::size_t n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(double(n));
        return a;
    }
    MatrixXcd position() const {
        const MatrixXcd a = annihilation();
        return std::sqrt(hbar / (2.0 * mass * omega)) * (a + a.adjoint());
    }
    MatrixXcd momentum() const {
        const MatrixXcd a = annihilation();
        return I * std::sqrt(mass * hbar * omega / 2.0) * (a.adjoint() - a);
    }
    MatrixXcd number() const {
        MatrixXcd n = MatrixXcd::Zero(N, N);
        for (std::size_t j = 0; j < N; ++j) n(j, j) = double(j);
        return n;
    }
    // hbar omega (n + 1/2)
    MatrixXcd hamiltonian() const {
        return hbar * omega * (number() + 0.5 * MatrixXcd::Identity(N, N));
    }
    // exp(i k x) by diagonalizing the truncated position operator.
    MatrixXcd exp_ikx(double k) const {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(position());
        const VectorXcd ph = (I * k * es.eigenvalues().cast<cplx>()).array().exp();
        return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    }
    // f(x) for a real function, same route.
    MatrixXcd function_of_x(const std::function<cplx(double)>& fn) const {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(position());
        VectorXcd v(N);
        for (std::size_t j = 0; j < N; ++j) v(j) = fn(es.eigenvalues()(j));
        return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
    }

    // Normalized Hermite functions phi_0..phi_{N-1} at x.
    std::vector<double> eigenfunctions(double x) const {
        std::vector<double> phi(N);
        const double l = length(), xi = x / l;
        phi[0] = std::pow(pi, -0.25) / std::sqrt(l) * std::exp(-0.5 * xi * xi);
        if (N > 1) phi[1] = std::sqrt(2.0) * xi * phi[0];
        for (std::size_t n = 1; n + 1 < N; ++n)
            phi[n + 1] = std::sqrt(2.0 / double(n + 1)) * xi * phi[n] - std::sqrt(double(n) / double(n + 1)) * phi[n - 1];
        return phi;
    }
};

// Product-basis amplitudes, index = level * N + n.
struct FockState {
    std::size_t N = 0, n_levels = 1;
    VectorXcd amp;

    cplx& at(std::size_t level, std::size_t n) { return amp(level * N + n); }
    cplx at(std::size_t level, std::size_t n) const { return amp(level * N + n); }
    double norm() const { return amp.norm(); }
    double population(std::size_t level) const { return amp.segment(level * N, N).squaredNorm(); }
    // Largest population over the top `count` number states of any level.
    double tail(std::size_t count = 3) const {
        double t = 0;
        for (std::size_t l = 0; l < n_levels; ++l)
            for (std::size_t n = N - std::min(count, N); n < N; ++n) t += std::norm(at(l, n));
        return t;
    }
};

// Kronecker product internal (L x L) with motional (N x N).
inline MatrixXcd kron(const MatrixXcd& internal, const MatrixXcd& motional) {
    const auto L = internal.rows(), N = motional.rows();
    MatrixXcd out = MatrixXcd::Zero(L * N, L * N);
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < L; ++j)
            if (internal(i, j) != cplx(0.0)) out.block(i * N, j * N, N, N) = internal(i, j) * motional;
    return out;
}

// exp(-i H tau / hbar) for Hermitian H.
inline MatrixXcd hermitian_propagator(const MatrixXcd& H, double tau, double hbar) {
    const double herm = (H - H.adjoint()).norm();
    if (herm > 1e-10 * std::max(1.0, H.norm())) throw NumericError("Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (H + H.adjoint()));
    const VectorXcd ph = (-I * tau / hbar * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline double unitarity_defect(const MatrixXcd& U) {
    return (U.adjoint() * U - MatrixXcd::Identity(U.rows(), U.cols())).norm();
}

struct FockOptions {
    double tail_limit = 1e-8;
    double step_norm_drift = 1e-12;
};

inline void check_tail(const FockState& s, const FockOptions& opt) {
    if (s.tail() > opt.tail_limit)
        throw TruncationError("Fock truncation tail population too large", int(2 * s.N));
}

namespace detail {
// Groups of internal levels that H couples, found by union-find over the N x N blocks.
inline std::vector<std::vector<Eigen::Index>> coupled_groups(const MatrixXcd& h, std::size_t L, std::size_t N) {
    std::vector<std::size_t> root(L);
    for (std::size_t l = 0; l < L; ++l) root[l] = l;
    auto find = [&](std::size_t a) {
        while (root[a] != a) a = root[a] = root[root[a]];
        return a;
    };
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = i + 1; j < L; ++j)
            if (h.block(i * N, j * N, N, N).cwiseAbs().maxCoeff() > 0.0) root[find(i)] = find(j);
    std::vector<std::vector<Eigen::Index>> groups;
    std::vector<long> slot(L, -1);
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t r = find(l);
        if (slot[r] < 0) {
            slot[r] = long(groups.size());
            groups.emplace_back();
        }
        for (std::size_t n = 0; n < N; ++n) groups[slot[r]].push_back(Eigen::Index(l * N + n));
    }
    return groups;
}
}  // namespace detail

// Piecewise-constant propagation: H is sampled at each segment midpoint and
// applied through the eigenbasis of each decoupled level group.
inline FockState fock_evolve(const std::function<MatrixXcd(double)>& H, FockState psi, double hbar,
                             double T, std::size_t segments, double t0 = 0.0, const FockOptions& opt = {}) {
    if (segments == 0) throw DomainError("segment count must be positive");
    if (!(T >= 0.0)) throw DomainError("duration must be non-negative");
    const double tau = T / double(segments);
    for (std::size_t s = 0; s < segments; ++s) {
        const MatrixXcd h = H(t0 + (double(s) + 0.5) * tau);
        if (std::size_t(h.rows()) != std::size_t(psi.amp.size())) throw DomainError("Hamiltonian size mismatch");
        if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm())) throw NumericError("Hamiltonian is not Hermitian");
        const double before = psi.amp.norm();
        for (const auto& idx : detail::coupled_groups(h, psi.n_levels, psi.N)) {
            const MatrixXcd sub = h(idx, idx);
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (sub + sub.adjoint()));
            if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
            const VectorXcd ph = (-I * tau / hbar * es.eigenvalues().cast<cplx>()).array().exp();
            const VectorXcd c = es.eigenvectors().adjoint() * psi.amp(idx);
            psi.amp(idx) = es.eigenvectors() * ph.cwiseProduct(c);
        }
        if (std::abs(psi.amp.norm() - before) > opt.step_norm_drift * std::max(1.0, before))
            throw StepSizeError("norm drift in a Fock propagation step");
    }
    check_tail(psi, opt);
    return psi;
}

// Quadrature projection of a Gaussian onto the number basis.
inline FockState fock_from_gaussian(const GaussianState& s, const FockBasis& basis, std::size_t level = 0,
                                    std::size_t n_levels = 1) {
    if (level >= n_levels) throw DomainError("level index out of range");
    if (std::abs(s.mass() - basis.mass) > 1e-14 * basis.mass || std::abs(s.hbar() - basis.hbar) > 1e-14 * basis.hbar)
        throw DomainError("state and basis units differ");
    const double l = basis.length();
    const double reach = std::sqrt(2.0 * double(basis.N) + 1.0) * l + 12.0 * l;
    const double lo = std::min(-reach, s.x_center() - 12.0 * s.position_sigma());
    const double hi = std::max(reach, s.x_center() + 12.0 * s.position_sigma());
    const double step = std::min(l, s.position_sigma()) / 24.0;
    const auto n = std::size_t(std::ceil((hi - lo) / step));
    const auto g = UniformGrid::spanning(lo, hi, n);
    FockState out{basis.N, n_levels, VectorXcd::Zero(basis.N * n_levels)};
    const auto psi = sample_wavefunction(s, g).values;
    for (std::size_t j = 0; j < g.n; ++j) {
        const auto phi = basis.eigenfunctions(g.x(j));
        for (std::size_t k = 0; k < basis.N; ++k) out.at(level, k) += phi[k] * psi[j] * g.dx;
    }
    return out;
}

inline std::vector<cplx> fock_to_grid(const FockState& s, std::size_t level, const FockBasis& basis,
                                      const UniformGrid& g) {
    std::vector<cplx> out(g.n, 0.0);
    for (std::size_t j = 0; j < g.n; ++j) {
        const auto phi = basis.eigenfunctions(g.x(j));
        cplx v = 0;
        for (std::size_t k = 0; k < basis.N; ++k) v += phi[k] * s.at(level, k);
        out[j] = v;
    }
    return out;
}

}  // namespace gwp::oracle
