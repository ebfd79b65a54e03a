#include <gtest/gtest.h>

#include <random>

#include "gwp/core.hpp"
#include "gwp/quadrature.hpp"
#include "test_util.hpp"

using namespace gwp;

TEST(GaussianState, GroundStateOfUnitOscillator) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0, 0.0);
    EXPECT_DOUBLE_EQ(s.delta_sq(), 0.5);
    EXPECT_DOUBLE_EQ(s.spreading(), 1.0);
    EXPECT_DOUBLE_EQ(s.p0(), -0.0);
}

TEST(GaussianState, RejectsNonPositiveParameters) {
    EXPECT_THROW(make_gaussian(1, 1, 0, 0, -1, 0), DomainError);
    EXPECT_THROW(make_gaussian(0, 1, 0, 0, 1, 0), DomainError);
    EXPECT_THROW(make_gaussian(1, -1, 0, 0, 1, 0), DomainError);
}

TEST(GaussianState, SpreadingExample) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 2, 0.0);
    EXPECT_NEAR(s.spreading(), std::sqrt(5.0), 1e-15);
    const double w2 = std::norm(s.W());
    EXPECT_NEAR(w2, 0.5 * s.delta_sq() * s.spreading() * s.spreading(), 1e-14);
}

TEST(GaussianState, LinewidthIdentityRandom) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 10000; ++k) {
        const double m = std::exp(2 * u(rng)), hbar = std::exp(2 * u(rng));
        auto s = make_gaussian(m, hbar, 5 * u(rng), 5 * u(rng), std::exp(3 * u(rng)), 10 * u(rng));
        const double e = s.spreading();
        const double lhs = std::norm(s.W()), rhs = 0.5 * s.delta_sq() * e * e;
        ASSERT_LT(std::abs(lhs - rhs) / lhs, 1e-12);
    }
}

TEST(ComplexLinewidth, RoundTrip) {
    auto s = make_gaussian(2, 0.5, 0, 0, 0.3, -1.7);
    auto w = ComplexLinewidth::of(s);
    EXPECT_DOUBLE_EQ(w.real_part, 0.3);
    EXPECT_DOUBLE_EQ(w.tw(2, 0.5), -1.7);
    EXPECT_EQ(w.value(), s.W());
}

TEST(Sampling, NormOnStandardGrid) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0);
    auto g = UniformGrid::spanning(-10, 10, 2048);
    auto psi = sample_wavefunction(s, g);
    EXPECT_FALSE(psi.warning);
    EXPECT_NEAR(test::norm(psi.values, g.dx), 1.0, 1e-10);
}

TEST(Sampling, MomentumExpectationViaFFT) {
    auto s = make_gaussian(1, 1, 0.3, 2.0, 0.5, 0.4);
    auto g = UniformGrid::spanning(-20, 20, 4096);
    auto psi = sample_wavefunction(s, g).values;
    EXPECT_NEAR(test::fft_mean_momentum(psi, g.dx, 1.0), 2.0, 1e-6);
}

TEST(Sampling, ChirpBroadensDensity) {
    auto a = make_gaussian(1, 1, 0, 0, 0.5, 0);
    auto b = make_gaussian(1, 1, 0, 0, 0.5, 3);
    // Standard deviation ratio equals the spreading ratio.
    auto g = UniformGrid::spanning(-40, 40, 8192);
    auto pa = sample_wavefunction(a, g).values, pb = sample_wavefunction(b, g).values;
    double va = 0, vb = 0;
    for (std::size_t j = 0; j < g.n; ++j) {
        va += g.x(j) * g.x(j) * std::norm(pa[j]) * g.dx;
        vb += g.x(j) * g.x(j) * std::norm(pb[j]) * g.dx;
    }
    EXPECT_NEAR(std::sqrt(vb / va), b.spreading() / a.spreading(), 1e-10);
}

TEST(Sampling, WarnsOnNarrowGridAndRejectsEmpty) {
    auto s = make_gaussian(1, 1, 0, 0, 0.5, 0);
    EXPECT_TRUE(sample_wavefunction(s, UniformGrid::spanning(-2, 2, 64)).warning);
    EXPECT_THROW(sample_wavefunction(s, UniformGrid{}), DomainError);
}

TEST(Overlap, SelfAndDisplaced) {
    auto s = make_gaussian(1, 1, 0.4, -0.7, 0.8, 1.3, 0.2);
    EXPECT_NEAR(std::abs(overlap(s, s)), 1.0, 1e-12);
    auto a = make_gaussian(1, 1, 0, 0, 0.5, 0);
    // |<a|b>| = exp(-d^2 / (8 Delta^2)) for equal widths.
    auto b = make_gaussian(1, 1, 10 * std::sqrt(0.5), 0, 0.5, 0);
    EXPECT_NEAR(std::abs(overlap(a, b)) / std::exp(-12.5), 1.0, 1e-12);
    auto g = UniformGrid::spanning(-20, 30, 1 << 14);
    const cplx num = test::inner(sample_wavefunction(a, g).values, sample_wavefunction(b, g).values, g.dx);
    EXPECT_NEAR(std::abs(num) / std::exp(-12.5), 1.0, 1e-8);
    auto c = make_gaussian(1, 1, 20 * std::sqrt(0.5), 0, 0.5, 0);
    EXPECT_LT(std::abs(overlap(a, c)), 1e-10);
}

TEST(Overlap, MatchesQuadratureAndIsConjugateSymmetric) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    auto g = UniformGrid::spanning(-30, 30, 1 << 14);
    for (int k = 0; k < 20; ++k) {
        auto a = make_gaussian(1, 1, u(rng), u(rng), 0.5 + 0.4 * u(rng), u(rng), u(rng));
        auto b = make_gaussian(1, 1, u(rng), u(rng), 0.5 + 0.4 * u(rng), u(rng), u(rng));
        const cplx num = test::inner(sample_wavefunction(a, g).values,
                                     sample_wavefunction(b, g).values, g.dx);
        const cplx ab = overlap(a, b);
        EXPECT_LT(std::abs(ab - num), 1e-8);
        EXPECT_LT(std::abs(ab - std::conj(overlap(b, a))), 1e-12);
        EXPECT_LE(std::abs(ab), 1.0 + 1e-12);
    }
}

TEST(Overlap, RejectsUnitMismatch) {
    EXPECT_THROW(overlap(make_gaussian(1, 1, 0, 0, 1, 0), make_gaussian(2, 1, 0, 0, 1, 0)),
                 DomainError);
}

TEST(GaussianIntegral, Examples) {
    EXPECT_NEAR(std::abs(gaussian_integral(1.0, 0.0) - std::sqrt(pi)), 0, 1e-15);
    EXPECT_NEAR(gaussian_integral(1.0, 2.0).real(), 4.81802, 1e-5);
    const cplx fres = gaussian_integral(I, 0.0);
    EXPECT_LT(std::abs(fres - std::sqrt(pi) * std::exp(-I * pi / 4.0)), 1e-15);
    EXPECT_THROW(gaussian_integral(0.0, 1.0), DomainError);
}

TEST(GaussianIntegral, FresnelAgainstDampedQuadrature) {
    // Damping eps shrinks the tail; the limit follows by Richardson in eps.
    auto damped = [](double eps) {
        const cplx a(eps, 1.0);
        auto re = [&](double x) { return std::exp(-a * x * x).real(); };
        auto im = [&](double x) { return std::exp(-a * x * x).imag(); };
        const double L = std::sqrt(40.0 / eps);
        return cplx(adaptive_simpson(re, -L, L, 1e-11, 4096).value,
                    adaptive_simpson(im, -L, L, 1e-11, 4096).value);
    };
    const cplx e1 = damped(0.02), e2 = damped(0.01);
    const cplx limit = 2.0 * e2 - e1;
    EXPECT_LT(std::abs(limit - gaussian_integral(I, 0.0)), 1e-3);
    EXPECT_LT(std::abs(e2 - gaussian_integral(cplx(0.01, 1.0), 0.0)), 1e-8);
}

TEST(GaussianIntegral, RandomAgainstQuadrature) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ra(0.1, 10), rb(-2, 2);
    for (int k = 0; k < 100; ++k) {
        const cplx a(ra(rng), rb(rng)), b(rb(rng), rb(rng));
        auto re = [&](double x) { return std::exp(-a * x * x + b * x).real(); };
        auto im = [&](double x) { return std::exp(-a * x * x + b * x).imag(); };
        const double L = 12.0 / std::sqrt(a.real()) + std::abs(b) / a.real();
        const cplx num(adaptive_simpson(re, -L, L, 1e-12, 256).value,
                       adaptive_simpson(im, -L, L, 1e-12, 256).value);
        const cplx ref = gaussian_integral(a, b);
        ASSERT_LT(std::abs(num - ref), 1e-8 * std::max(1.0, std::abs(ref)));
    }
}
