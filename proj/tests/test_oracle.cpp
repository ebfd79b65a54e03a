#include <gtest/gtest.h>

#include <random>

#include "gwp/evolve.hpp"
#include "gwp/oracle.hpp"

using namespace gwp;
using namespace gwp::oracle;

namespace {
GridHamiltonian harmonic_H(double m, double w) {
    GridHamiltonian H;
    H.c = [=](double) { return m * w * w; };
    return H;
}
}  // namespace

TEST(Fit, RoundTripOfKnownGaussian) {
    auto s = make_gaussian(1.3, 0.7, 0.4, -1.1, 0.6, 0.9, 0.3);
    auto g = UniformGrid::spanning(-25, 25, 4096);
    auto fit = fit_gaussian(sample_wavefunction(s, g).values, g, 1.3, 0.7);
    EXPECT_NEAR(fit.state.x_center(), 0.4, 1e-9);
    EXPECT_NEAR(fit.state.mean_momentum(), -1.1, 1e-9);
    EXPECT_NEAR(fit.state.delta_sq(), 0.6, 1e-9);
    EXPECT_NEAR(fit.state.tw(), 0.9, 1e-9);
    EXPECT_NEAR(std::remainder(*fit.state.global_phase() - 0.3, 2 * pi), 0.0, 1e-9);
    EXPECT_LT(fit.residual, 1e-10);
    EXPECT_FALSE(fit.warning);
}

TEST(Fit, TwoSeparatedPacketsAreFlagged) {
    auto g = UniformGrid::spanning(-30, 30, 4096);
    auto a = sample_wavefunction(make_gaussian(1, 1, -6, 0, 0.5, 0), g).values;
    auto b = sample_wavefunction(make_gaussian(1, 1, 6, 0, 0.5, 0), g).values;
    for (std::size_t j = 0; j < g.n; ++j) a[j] = (a[j] + b[j]) / std::sqrt(2.0);
    auto fit = fit_gaussian(a, g, 1, 1);
    EXPECT_TRUE(fit.warning);
    EXPECT_GT(fit.residual, 1e-1);
}

TEST(Compare, IdenticalAndMismatched) {
    auto s = make_gaussian(1, 1, 0.2, 0.5, 0.5, -0.4, 1.0);
    auto g = UniformGrid::spanning(-20, 20, 2048);
    auto gs = grid_from_gaussian(s, g);
    auto rep = compare(s, gs);
    EXPECT_NEAR(rep.fidelity, 1.0, 1e-12);
    EXPECT_LT(rep.l2_error, 1e-12);
    EXPECT_THROW(compare(make_gaussian(2, 1, 0, 0, 0.5, 0), gs), DomainError);
    EXPECT_THROW(compare(make_gaussian(1, 1, 30, 0, 0.5, 0), gs), DomainError);
}

TEST(Grid, RejectsBadGrids) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0);
    EXPECT_THROW(grid_from_gaussian(s, UniformGrid::spanning(-10, 10, 100)), DomainError);
    EXPECT_THROW(grid_from_gaussian(s, UniformGrid::spanning(-10, 10, 128)), DomainError);
    auto g = default_grid(0, 0, 1.0, 0.5);
    EXPECT_TRUE(is_power_of_two(g.n));
    EXPECT_LE(g.dx, 0.5 / 16);
    EXPECT_LE(g.x_min, -8.0);
}

TEST(Grid, GroundStateIsStationary) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0);
    auto g = UniformGrid::spanning(-12, 12, 512);
    auto psi0 = grid_from_gaussian(s, g);
    auto psi = grid_evolve(harmonic_H(1, 1), psi0, 0.01, 1000);
    EXPECT_GT(fidelity(psi0.levels[0], psi.levels[0], g.dx), 1 - 1e-8);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
}

TEST(Grid, FreeFlightMatchesLinewidthShift) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0);
    auto g = UniformGrid::spanning(-20, 20, 1024);
    auto psi = grid_evolve(GridHamiltonian{}, grid_from_gaussian(s, g), 0.01, 100);
    auto fit = fit_gaussian(psi.levels[0], g, 1, 1);
    EXPECT_NEAR(fit.state.delta_sq(), 0.5, 1e-6);
    EXPECT_NEAR(fit.state.tw(), 1.0, 1e-6);
}

TEST(Grid, InvertedKineticTermRunsBackwards) {
    auto s = make_gaussian(1, 1, 0.3, 0.8, 0.5, 0.7);
    auto g = UniformGrid::spanning(-20, 20, 1024);
    GridHamiltonian H;
    H.kinetic_sign = -1.0;
    auto psi = grid_evolve(H, grid_from_gaussian(s, g), 0.01, 100);
    auto fit = fit_gaussian(psi.levels[0], g, 1, 1);
    EXPECT_NEAR(fit.state.tw(), -0.3, 1e-6);
    EXPECT_NEAR(fit.state.x_center(), 0.3 - 0.8, 1e-6);
}

TEST(Grid, DilationTerm) {
    // b(xp+px)/2 for time t scales x by e^{bt}.
    auto s = make_gaussian(1, 1, 0.5, 0.2, 0.5, 0);
    auto g = UniformGrid::spanning(-20, 20, 2048);
    GridHamiltonian H;
    H.kinetic_sign = 0.0;
    H.b = [](double) { return 0.4; };
    auto psi = grid_evolve(H, grid_from_gaussian(s, g), 0.01, 100);
    const double lam = std::exp(0.4);
    auto rep = compare(make_gaussian(1, 1, 0.5 * lam, 0.2 / lam, 0.5 * lam * lam, 0), psi);
    EXPECT_GT(rep.fidelity, 1 - 1e-10);
}

TEST(Grid, TwoLevelRabiOscillation) {
    // Constant coupling hbar*Omega*sigma_x: population in level 1 is sin^2(Omega t).
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0);
    auto g = UniformGrid::spanning(-12, 12, 256);
    GridHamiltonian H = harmonic_H(1, 1);
    const double Om = 0.7;
    H.coupling = [=](double, double) {
        Eigen::MatrixXcd h(2, 2);
        h << 0, Om, Om, 0;
        return h;
    };
    auto psi = grid_evolve(H, grid_from_gaussian(s, g, 0, 2), 0.01, 100);
    EXPECT_NEAR(psi.population(1), std::pow(std::sin(Om * 1.0), 2), 1e-10);
}

TEST(Grid, DomainEscapeDetected) {
    auto s = make_gaussian(1, 1, 0, 5, 0.5, 0);
    auto g = UniformGrid::spanning(-10, 10, 512);
    EXPECT_THROW(grid_evolve(GridHamiltonian{}, grid_from_gaussian(s, g), 0.01, 300), DomainEscape);
}

TEST(Grid, QuarterPeriodResizeAgainstAnalytic) {
    const double w = 2, wc = 1;
    auto s = make_gaussian(1, 1, 0, 0, 0.5 / w, 0);
    auto g = UniformGrid::spanning(-16, 16, 1024);
    auto psi = grid_evolve_for(harmonic_H(1, wc), grid_from_gaussian(s, g), pi / 2, 0.002);
    auto out = apply(harmonic(wc, pi / 2, 1, 1), s);
    auto rep = compare(out, psi);
    EXPECT_GT(rep.fidelity, 1 - 1e-8);
    EXPECT_NEAR(rep.fitted.state.delta_sq(), 1.0, 1e-6);
    // The tracked analytic phase agrees with the grid phase.
    const cplx ov = inner(sample_wavefunction(out, g).values, psi.levels[0], g.dx);
    EXPECT_NEAR(std::arg(ov), 0.0, 1e-5);
}

TEST(Grid, RandomScheduleAgainstAnalytic) {
    const double m = 1, hbar = 1;
    auto s = make_gaussian(m, hbar, 0.3, -0.4, 0.6, 0.2);
    std::vector<PulseSegment> segs = {
        FreeSegment{0.7},
        HarmonicSegment{1.3, 0.9},
        ForcedHarmonicSegment{0.8, ForceSpec::sinusoid(0.5, 1.1, 0.3), 1.2},
        InverseFreeSegment{0.5},
        GeneralQuadraticSegment{{TimeFunction::constant(0.2), TimeFunction::constant(0.5),
                                 TimeFunction::constant(0.1), TimeFunction::constant(-0.3)},
                                0.8},
    };
    auto g = UniformGrid::spanning(-20, 20, 2048);
    auto psi = grid_from_gaussian(s, g);
    for (const auto& seg : segs) {
        GridHamiltonian H;
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, InverseFreeSegment>) H.kinetic_sign = -1.0;
                if constexpr (std::is_same_v<T, HarmonicSegment>) H.c = [w = x.omega](double) { return w * w; };
                if constexpr (std::is_same_v<T, ForcedHarmonicSegment>) {
                    H.c = [w = x.omega](double) { return w * w; };
                    H.f = [f = x.force](double t) { return f(t); };
                }
                if constexpr (std::is_same_v<T, GeneralQuadraticSegment>) {
                    H.b = [q = x.coeffs](double t) { return q.b(t); };
                    H.c = [q = x.coeffs](double t) { return q.c(t); };
                    H.d = [q = x.coeffs](double t) { return q.d(t); };
                    H.f = [q = x.coeffs](double t) { return q.f(t); };
                }
            },
            seg);
        psi = grid_evolve_for(H, psi, physical_duration(seg), 0.002);
    }
    auto analytic = evolve_schedule(segs, s, PerSegment{}).final_state();
    auto rep = compare(analytic, psi);
    EXPECT_GT(rep.fidelity, 1 - 1e-6);
    EXPECT_LT(std::abs(rep.d_tw), 1e-5);
}

TEST(Grid, ConvergenceUnderRefinement) {
    auto s = make_gaussian(1, 1, 0.5, 0.3, 0.5, 0.2);
    auto H = harmonic_H(1, 1.4);
    H.f = [](double t) { return 0.3 * std::cos(t); };
    auto run = [&](std::size_t n, double dt) {
        auto g = UniformGrid::spanning(-16, 16, n);
        return grid_evolve_for(H, grid_from_gaussian(s, g), 1.5, dt);
    };
    auto coarse = run(512, 0.002), fine = run(1024, 0.001);
    auto ref = apply(forced_harmonic(1.4, ForceSpec{TimeFunction::sinusoid(0.3, 1.0, 0.0)}, 1.5, 1, 1), s);
    const double fc = compare(ref, coarse).fidelity, ff = compare(ref, fine).fidelity;
    EXPECT_LT(std::abs(fc - ff), 1e-8);
    EXPECT_GT(ff, 1 - 1e-8);
}

TEST(Fock, CoherentStateRotatesAtOmega) {
    const double w = 1.3;
    FockBasis basis(60, 1, 1, w);
    auto s = make_gaussian(1, 1, 1.2, 0.5, 0.5 / w, 0);
    auto psi0 = fock_from_gaussian(s, basis);
    EXPECT_NEAR(psi0.norm(), 1.0, 1e-10);
    const Eigen::MatrixXcd a = basis.annihilation();
    const cplx alpha0 = psi0.amp.dot(a * psi0.amp);
    const double T = 0.77;
    auto psi = fock_evolve([&](double) { return basis.hamiltonian(); }, psi0, 1, T, 1);
    const cplx alpha = psi.amp.dot(a * psi.amp);
    EXPECT_LT(std::abs(alpha - alpha0 * std::exp(-I * w * T)), 1e-10);
    // Ehrenfest x-amplitude: <x> = sqrt(2 hbar/(m w)) Re(alpha)
    EXPECT_NEAR(std::sqrt(2.0 / w) * alpha0.real(), 1.2, 1e-9);
}

TEST(Fock, TruncationConvergenceAndError) {
    const double w = 1;
    auto s = make_gaussian(1, 1, 1.5, 0, 0.5, 0);
    FockBasis b1(50, 1, 1, w), b2(70, 1, 1, w);
    auto H = [&](const FockBasis& b) { return [&b](double) { return Eigen::MatrixXcd(b.hamiltonian() + 0.3 * b.position() * b.position()); }; };
    auto p1 = fock_evolve(H(b1), fock_from_gaussian(s, b1), 1, 2.0, 1);
    auto p2 = fock_evolve(H(b2), fock_from_gaussian(s, b2), 1, 2.0, 1);
    const double f = std::abs(p2.amp.head(50).dot(p1.amp));
    EXPECT_GT(f, 1 - 1e-9);
    FockBasis small(8, 1, 1, w);
    try {
        fock_evolve([&](double) { return small.hamiltonian(); }, fock_from_gaussian(s, small), 1, 1.0, 1);
        ADD_FAILURE() << "expected truncation error";
    } catch (const TruncationError& e) {
        EXPECT_GT(e.suggested_size, 8);
    }
}

TEST(Fock, GridRoundTripAndExpIkx) {
    FockBasis basis(80, 1, 1, 1);
    auto s = make_gaussian(1, 1, -0.7, 1.1, 0.5, 0.3, 0.4);
    auto f = fock_from_gaussian(s, basis);
    auto g = UniformGrid::spanning(-15, 15, 1024);
    auto back = fock_to_grid(f, 0, basis, g);
    auto ref = sample_wavefunction(s, g).values;
    EXPECT_LT(l2_distance_up_to_phase(back, ref, g.dx), 1e-9);
    EXPECT_NEAR(std::arg(inner(ref, back, g.dx)), 0.0, 1e-9);
    // exp(ikx) shifts the mean momentum by hbar k.
    const Eigen::MatrixXcd U = basis.exp_ikx(0.6);
    EXPECT_LT(unitarity_defect(U), 1e-12);
    FockState kicked{f.N, 1, U * f.amp};
    const cplx pm = kicked.amp.dot(basis.momentum() * kicked.amp);
    EXPECT_NEAR(pm.real(), 1.1 + 0.6, 1e-8);
}

TEST(Fock, KronAndHermiticityGuard) {
    FockBasis b(6, 1, 1, 1);
    Eigen::MatrixXcd sz(2, 2);
    sz << 1, 0, 0, -1;
    auto H = kron(sz, b.number());
    EXPECT_EQ(H.rows(), 12);
    EXPECT_EQ(H(7, 7), cplx(-1.0));
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
    bad(0, 1) = 1.0;
    EXPECT_THROW(hermitian_propagator(bad, 1.0, 1.0), NumericError);
}
