#include <gtest/gtest.h>

#include <random>

#include "gwp/design.hpp"
#include "test_util.hpp"

using namespace gwp;
using namespace gwp::design;

namespace {
// Rest state carrying T0 (free flight for T0 > 0, inverse flight otherwise),
// then the omega segment, then the omega_o segment.
GaussianState pipeline(double dx2, double T0, double w, double T, double wo, double To) {
    auto s0 = make_gaussian(1, 1, 0, 0, dx2, T0);
    auto g = compose_all({harmonic(wo, To, 1, 1), harmonic(w, T, 1, 1)});
    return apply(g, s0);
}
}  // namespace

TEST(QuarterResize, Examples) {
    auto r = quarter_period_resize(2, 1, 1, 1);
    EXPECT_NEAR(r.T_c, pi / 2, 1e-15);
    EXPECT_NEAR(r.new_delta_sq, 1.0, 1e-15);
    EXPECT_NEAR(quarter_period_resize(3, 3, 1, 1).new_delta_sq, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(quarter_period_resize(1, 10, 1, 1).new_delta_sq, 0.005, 1e-16);
    EXPECT_NEAR(quarter_period_resize(1, 2, 1, 1, 3).T_c, (6 * pi + pi / 2) / 2, 1e-14);
    EXPECT_THROW(quarter_period_resize(0, 1, 1, 1), DomainError);
    EXPECT_THROW(quarter_period_resize(1, -1, 1, 1), DomainError);
}

TEST(QuarterResize, AgreesWithEvolve) {
    for (double wc : {0.3, 1.0, 2.0, 10.0}) {
        const double w = 1.7, m = 1.3, hbar = 0.8;
        auto r = quarter_period_resize(w, wc, m, hbar);
        auto ground = make_gaussian(m, hbar, 0, 0, hbar / (2 * m * w), 0);
        auto out = apply(harmonic(wc, r.T_c, m, hbar), ground);
        EXPECT_NEAR(out.delta_sq() / r.new_delta_sq, 1.0, 1e-12);
        EXPECT_NEAR(out.tw(), 0.0, 1e-12);
        EXPECT_NEAR(out.x_center(), 0.0, 1e-12);
        EXPECT_NEAR(out.mean_momentum(), 0.0, 1e-12);
    }
}

TEST(ForwardTwoPulse, WorkedExample) {
    const double To = std::atan(2.0) / 2.0;
    auto got = forward_two_pulse(1, pi / 4, 2, To, 0.5, 0.2, 1, 1);
    EXPECT_NEAR(got.delta_y_sq, 1.25 / 10.25, 1e-14);
    EXPECT_NEAR(got.tw, -2.0 / 10.25, 1e-14);
    EXPECT_NEAR(got.delta_y_sq, 0.12195, 1e-5);
    EXPECT_NEAR(got.tw, -0.19512, 1e-5);
}

TEST(ForwardTwoPulse, MatchesEvolvePipeline) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 100; ++k) {
        const double w = 0.3 + 2 * u(rng), wT = 0.1 + 2.9 * u(rng), n = 0.2 + 4 * u(rng);
        if (std::abs(wT - pi / 2) < 0.05) continue;
        double woTo = std::atan(n / std::tan(wT));
        if (woTo <= 0) woTo += pi;
        const double dx2 = 0.1 + u(rng), T0 = 2 * u(rng) - 1;
        auto f = forward_two_pulse(w, wT / w, n * w, woTo / (n * w), dx2, T0, 1, 1);
        auto s = pipeline(dx2, T0, w, wT / w, n * w, woTo / (n * w));
        ASSERT_LT(std::abs(s.delta_sq() - f.delta_y_sq), 1e-10 * std::max(1.0, f.delta_y_sq));
        ASSERT_LT(std::abs(s.tw() - f.tw), 1e-10 * std::max(1.0, std::abs(f.tw)));
        ASSERT_LT(std::abs(s.x_center()) + std::abs(s.mean_momentum()), 1e-12);
    }
}

TEST(ForwardTwoPulse, ResizeFreeFlightPipeline) {
    // omega ground state, quarter-period resize, free flight, then the pulse pair.
    const double w0 = 1.0, wc = 1.0, T0 = 0.2;
    auto r = quarter_period_resize(w0, wc, 1, 1);
    auto ground = make_gaussian(1, 1, 0, 0, 0.5 / w0, 0);
    const double To = std::atan(2.0) / 2.0;
    auto g = compose_all({harmonic(2, To, 1, 1), harmonic(1, pi / 4, 1, 1), free(T0, 1, 1),
                          harmonic(wc, r.T_c, 1, 1)});
    auto out = apply(g, ground);
    auto f = forward_two_pulse(1, pi / 4, 2, To, r.new_delta_sq, T0, 1, 1);
    EXPECT_NEAR(out.delta_sq(), f.delta_y_sq, 1e-10);
    EXPECT_NEAR(out.tw(), f.tw, 1e-10);
}

TEST(ForwardTwoPulse, ZeroNumeratorGivesZeroTw) {
    // T0 S_ab^2 = S_bb exactly.
    const double w = 1, wT = pi / 4, wo = 2, To = std::atan(2.0) / 2.0;
    auto r = reduced_coefficients(w, wT / w, wo);
    auto got = forward_two_pulse(w, wT, wo, To, 0.5, r.S_bb / r.S_ab_sq, 1, 1);
    EXPECT_NEAR(got.tw, 0.0, 1e-15);
}

TEST(ForwardTwoPulse, Errors) {
    const double To = std::atan(2.0) / 2.0;
    EXPECT_THROW(forward_two_pulse(1, pi / 4, 2, To + 0.1, 0.5, 0.2, 1, 1), ConstraintError);
    EXPECT_THROW(forward_two_pulse(1, pi, 2, To, 0.5, 0.2, 1, 1), FocalSingularity);
    EXPECT_THROW(forward_two_pulse(1, pi / 4, 2, pi / 2, 0.5, 0.2, 1, 1), FocalSingularity);
}

TEST(SolveTwoPulse, RoundTripWorkedExample) {
    const LinewidthTarget target{1.25 / 10.25, -2.0 / 10.25};
    auto sol = solve_two_pulse(target, 0.5, 1, 0.2, 1, 1);
    EXPECT_NEAR(sol.omega * sol.T, pi / 4, 1e-9);
    EXPECT_NEAR(sol.n_o, 2.0, 1e-9);
    EXPECT_NEAR(sol.omega_o * sol.T_o, std::atan(2.0), 1e-9);
    EXPECT_EQ(sol.branch, 0);
    EXPECT_LT(test::rel(sol.achieved_delta_y_sq, target.delta_y_sq), 1e-9);
    EXPECT_LT(test::rel(sol.achieved_tw, target.tw), 1e-9);
    EXPECT_NEAR(std::tan(sol.omega * sol.T) * std::tan(sol.omega_o * sol.T_o), sol.n_o, 1e-12);
}

TEST(SolveTwoPulse, RandomGenerateAndInvert) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    int solved = 0;
    while (solved < 100) {
        const double w = 0.3 + 2 * u(rng), wT = 0.1 + 2.9 * u(rng), n = 0.2 + 4 * u(rng);
        if (std::abs(wT - pi / 2) < 0.05) continue;
        double woTo = std::atan(n / std::tan(wT));
        if (woTo <= 0) woTo += pi;
        const double dx2 = 0.1 + u(rng), T0 = 2 * u(rng) - 1, m = 0.5 + u(rng), hbar = 0.5 + u(rng);
        auto f = forward_two_pulse(w, wT / w, n * w, woTo / (n * w), dx2, T0, m, hbar);
        auto sol = solve_two_pulse({f.delta_y_sq, f.tw}, dx2, w, T0, m, hbar);
        ASSERT_LT(test::rel(sol.achieved_delta_y_sq, f.delta_y_sq), 1e-9);
        ASSERT_LT(std::abs(sol.achieved_tw - f.tw), 1e-9 * std::max(std::abs(f.tw), f.delta_y_sq * m / hbar));
        ASSERT_NEAR(sol.n_o, n, 1e-7 * n);
        ASSERT_NEAR(std::tan(sol.omega * sol.T) * std::tan(sol.omega_o * sol.T_o), sol.n_o, 1e-12 * std::max(1.0, sol.n_o));
        // Independent confirmation through evolve.
        auto s = make_gaussian(m, hbar, 0, 0, dx2, T0);
        auto g = compose_all({harmonic(sol.omega_o, sol.T_o, m, hbar), harmonic(w, sol.T, m, hbar)});
        auto out = apply(g, s);
        ASSERT_LT(test::rel(out.delta_sq(), f.delta_y_sq), 1e-9);
        ASSERT_LT(std::abs(out.x_center()) + std::abs(out.mean_momentum()), 1e-12);
        ++solved;
    }
}

TEST(SolveTwoPulse, InfeasibleTargetReportsDiagnostics) {
    bool thrown = false;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 1000 && !thrown; ++k) {
        try {
            solve_two_pulse({std::exp(u(rng)), u(rng)}, 0.5, 1, u(rng), 1, 1);
        } catch (const InfeasibleTarget& e) {
            thrown = true;
            EXPECT_LE(e.n_o_sq, 0.0);
            EXPECT_NEAR(e.tan_omega_T, -e.B0 / e.A0, 1e-12 * std::max(1.0, std::abs(e.tan_omega_T)));
        }
    }
    EXPECT_TRUE(thrown);
}

TEST(SolveTwoPulse, SelfTargetIsDegenerate) {
    EXPECT_THROW(solve_two_pulse({0.8, 0.0}, 0.8, 1, 0.0, 1, 1), DegenerateGeometry);
    // Ground-state width makes A0 = B0 = 0.
    EXPECT_THROW(solve_two_pulse({0.5, 0.0}, 0.5, 1, 0.0, 1, 1), DegenerateGeometry);
    EXPECT_THROW(solve_two_pulse({-1.0, 0.0}, 0.5, 1, 0.0, 1, 1), DomainError);
}

TEST(FlightShift, Examples) {
    auto s = make_gaussian(1, 1, 0, 0, 1, 0);
    auto f = flight_imag_shift(s, 2, FlightDirection::forward);
    EXPECT_LT(std::abs(f.W() - cplx(1, 1)), 1e-14);
    auto back = flight_imag_shift(f, 2, FlightDirection::inverse);
    EXPECT_NEAR(back.delta_sq(), 1.0, 1e-12);
    EXPECT_NEAR(back.tw(), 0.0, 1e-12);
    auto inv = flight_imag_shift(s, 1.5, FlightDirection::inverse);
    EXPECT_NEAR(inv.tw(), -1.5, 1e-14);
    EXPECT_LT(inv.W().imag(), 0.0);
    EXPECT_NEAR(inv.x_center(), 0.0, 1e-12);
    EXPECT_NEAR(inv.mean_momentum(), 0.0, 1e-12);
}

TEST(FlightShift, MovingStateDrifts) {
    auto s = make_gaussian(2, 1, 0.5, 1.0, 0.7, 0.3);
    auto f = flight_imag_shift(s, 1.2, FlightDirection::forward);
    EXPECT_NEAR(f.tw(), 1.5, 1e-13);
    EXPECT_NEAR(f.delta_sq(), 0.7, 1e-13);
    EXPECT_NEAR(f.x_center(), 0.5 + 1.2 * 1.0 / 2, 1e-13);
    EXPECT_NEAR(f.mean_momentum(), 1.0, 1e-13);
}
