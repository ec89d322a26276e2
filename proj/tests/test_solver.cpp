#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "radheat/solver.hpp"

using namespace radheat;

namespace {

BallProblem euclidean_problem(double R = 8.0, double dr = 0.05, double dt = 0.01) {
    return {ModelManifold(WarpingFamily::euclidean(), 3), Density::unit(), R, 1.0, {}, 1.0, dr, dt};
}

BallProblem polynomial_problem(double theta, double R) {
    return {ModelManifold(WarpingFamily::polynomial(2.0), 3), Density::power(1, theta), R, 1.0, {}, 1.0, 0.05, 0.01};
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(BallProblem, Validation) {
    auto p = euclidean_problem();
    p.dr = 0.03;
    EXPECT_THROW(p.validate(), DomainError);
    p = euclidean_problem();
    p.dt = 0.3;
    EXPECT_THROW(p.validate(), DomainError);
    p = euclidean_problem();
    p.gamma = -1.0;
    EXPECT_THROW(p.validate(), DomainError);
    p = euclidean_problem(0.05, 0.05);
    EXPECT_THROW(p.validate(), GridTooSmall);
}

TEST(Step, ConstantStateIsStationary) {
    auto p = euclidean_problem();
    p.gamma = 0.7;
    const std::vector<double> u(161, 0.7);
    for (std::size_t k : {0u, 10u}) {
        const auto next = step(p, u, k);
        for (double x : next) EXPECT_NEAR(x, 0.7, 1e-14);
    }
}

TEST(Step, ZeroStaysZero) {
    auto p = euclidean_problem();
    p.gamma = 0.0;
    const auto next = step(p, std::vector<double>(161, 0.0), 7);
    for (double x : next) EXPECT_EQ(x, 0.0);
}

TEST(Step, OneStepMatchesFourQuarterSteps) {
    // Bump compatible with the boundary value, Crank-Nicolson phase.
    auto coarse = euclidean_problem(8.0, 0.05, 0.01);
    coarse.gamma = 0.0;
    coarse.startup_steps = 0;
    coarse.u0 = [](double r) { return std::exp(-r * r); };
    auto fine = coarse;
    fine.dt = coarse.dt / 4.0;
    const auto u0 = BallSolver(coarse).initial_state();
    const auto one = step(coarse, u0, 0);
    std::vector<double> four = u0;
    BallSolver s(fine);
    for (std::size_t k = 0; k < 4; ++k) s.advance(four, k);
    const double diff = max_diff(one, four);
    EXPECT_LT(diff, 10.0 * coarse.dt * coarse.dt);
    EXPECT_GT(max_diff(one, u0), 100.0 * diff);
}

TEST(SolveBall, ConstantInitialData) {
    auto p = euclidean_problem(4.0);
    p.u0 = [](double) { return 1.0; };
    const auto tr = solve_ball(p);
    for (double x : tr.final_values()) EXPECT_NEAR(x, 1.0, 1e-13);
    for (double v : tr.time_average) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(SolveBall, ZeroData) {
    auto p = euclidean_problem(4.0);
    p.gamma = 0.0;
    const auto tr = solve_ball(p);
    for (double x : tr.final_values()) EXPECT_EQ(x, 0.0);
    for (double v : tr.time_average) EXPECT_EQ(v, 0.0);
}

TEST(SolveBall, EuclideanSmoke) {
    const auto tr = solve_ball(euclidean_problem(8.0, 0.05, 0.01), std::vector<double>{0.25, 0.5});
    ASSERT_EQ(tr.times.size(), 4u);
    EXPECT_DOUBLE_EQ(tr.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
    for (std::size_t i = 1; i < tr.time_average.size(); ++i) EXPECT_GE(tr.time_average[i], tr.time_average[i - 1]);
    EXPECT_DOUBLE_EQ(tr.time_average.back(), 1.0);
    EXPECT_GE(tr.u_min, -1e-8);
    EXPECT_LE(tr.u_max, 1.0 + 1e-8);
}

TEST(SolveBall, FineGridReference) {
    // The corner where u0 = 0 meets the boundary value 1 dominates the error.
    const auto coarse = solve_ball(euclidean_problem(8.0, 0.1, 0.01));
    const auto medium = solve_ball(euclidean_problem(8.0, 0.05, 0.005));
    const auto fine = solve_ball(euclidean_problem(8.0, 0.025, 0.0025));
    double e_coarse = 0.0, e_medium = 0.0;
    for (std::size_t i = 0; i < coarse.time_average.size(); ++i) {
        e_coarse = std::max(e_coarse, std::abs(coarse.time_average[i] - fine.time_average[4 * i]));
        e_medium = std::max(e_medium, std::abs(medium.time_average[2 * i] - fine.time_average[4 * i]));
    }
    EXPECT_LT(e_coarse, 5e-3);
    EXPECT_GT(e_coarse, 3.0 * e_medium);
}

TEST(SolveBall, SnapshotOutsideHorizon) {
    EXPECT_THROW(solve_ball(euclidean_problem(4.0), std::vector<double>{2.0}), DomainError);
}

TEST(SolveBall, MaxPrincipleViolationIsReported) {
    // Crank-Nicolson with a huge step rings on discontinuous data.
    auto p = euclidean_problem(4.0, 0.05, 0.5);
    p.T = 5.0;
    p.startup_steps = 0;
    p.u0 = [](double r) { return r < 1.0 ? 1.0 : 0.0; };
    EXPECT_THROW(solve_ball(p), MaxPrincipleViolated);
}

TEST(SolverProperty, MaxPrinciple) {
    for (double theta : {0.0, 1.0, 3.0}) {
        const auto tr = solve_ball(polynomial_problem(theta, 8.0));
        EXPECT_GE(tr.u_min, -1e-8) << "theta " << theta;
        EXPECT_LE(tr.u_max, 1.0 + 1e-8) << "theta " << theta;
    }
}

TEST(SolverProperty, BoundaryTimeAverage) {
    for (double gamma : {0.5, 1.0, 3.0}) {
        auto p = polynomial_problem(3.0, 4.0);
        p.gamma = gamma;
        EXPECT_NEAR(solve_ball(p).time_average.back(), gamma * p.T, 1e-12 * gamma * p.T);
    }
}

TEST(SolverProperty, SecondOrderSelfConvergence) {
    const double order = self_convergence_order(euclidean_problem(8.0, 0.1, 0.01));
    EXPECT_GE(order, 1.7);
    EXPECT_LE(order, 2.3);
}

TEST(Exhaustion, ProbeRadius) {
    const ModelManifold m(WarpingFamily::polynomial(2.0), 3);
    const auto w = build_supersolution(m, Density::power(1, 3));
    EXPECT_DOUBLE_EQ(automatic_probe_radius(nullptr, 1.0, 8.0), 4.0);
    const double r = automatic_probe_radius(&w, 1.0, 8.0);
    EXPECT_LT(r, 8.0);
    if (r != 4.0) {
        EXPECT_LE(2.0 * w.h(r), 0.5);
    }
}

TEST(Exhaustion, RejectsBadSchedules) {
    const ModelManifold m(WarpingFamily::euclidean(), 3);
    const std::vector<double> bad{8.0, 4.0};
    EXPECT_THROW(exhaustion_run(m, Density::unit(), 1, 1, bad, 1.0, 0.1, 0.01), DomainError);
    const std::vector<double> ok{4.0, 8.0};
    EXPECT_THROW(exhaustion_run(m, Density::unit(), 1, 1, ok, 5.0, 0.1, 0.01), DomainError);
    EXPECT_THROW(exhaustion_run(m, Density::unit(), 1, 1, std::vector<double>{}, 1.0, 0.1, 0.01), DomainError);
}

TEST(Exhaustion, CoarseDichotomy) {
    const ModelManifold m(WarpingFamily::polynomial(2.0), 3);
    const std::vector<double> R{8.0, 16.0, 32.0, 64.0};
    const auto w = build_supersolution(m, Density::power(1, 3));
    ExhaustionOptions opt;
    opt.witness = &w;
    const auto non = exhaustion_run(m, Density::power(1, 3), 1, 1, R, auto_probe, 0.05, 0.01, opt);
    EXPECT_EQ(non.verdict, ExhaustionVerdict::NonUniqueConsistent);
    EXPECT_TRUE(non.monotone_ok);
    EXPECT_TRUE(non.comparison_ok);
    ASSERT_TRUE(non.bound_check.has_value());
    EXPECT_TRUE(non.bound_check->passed);

    const auto uni = exhaustion_run(m, Density::power(1, 1), 1, 1, R, auto_probe, 0.05, 0.01);
    EXPECT_EQ(uni.verdict, ExhaustionVerdict::UniqueConsistent);
    EXPECT_TRUE(uni.monotone_ok);
    EXPECT_TRUE(uni.comparison_ok);
    EXPECT_FALSE(uni.bound_check.has_value());
    for (std::size_t j = 0; j < R.size(); ++j) EXPECT_DOUBLE_EQ(uni.levels[j].R, R[j]);
}

TEST(Exhaustion, ParallelMatchesSerial) {
    const ModelManifold m(WarpingFamily::polynomial(2.0), 3);
    const std::vector<double> R{4.0, 8.0, 16.0};
    ExhaustionOptions par;
    par.parallel = true;
    const auto a = exhaustion_run(m, Density::power(1, 3), 1, 1, R, 2.0, 0.1, 0.01);
    const auto b = exhaustion_run(m, Density::power(1, 3), 1, 1, R, 2.0, 0.1, 0.01, par);
    ASSERT_EQ(a.levels.size(), b.levels.size());
    for (std::size_t j = 0; j < R.size(); ++j) {
        EXPECT_EQ(a.levels[j].v_probe, b.levels[j].v_probe);
        EXPECT_EQ(a.levels[j].u_probe_T, b.levels[j].u_probe_T);
    }
    EXPECT_EQ(a.verdict, b.verdict);
}

TEST(ExhaustionProperty, VerdictStableUnderRefinement) {
    const ModelManifold m(WarpingFamily::polynomial(2.0), 3);
    const std::vector<double> R{8.0, 16.0, 32.0, 64.0};
    for (double theta : {1.0, 3.0}) {
        const auto coarse = exhaustion_run(m, Density::power(1, theta), 1, 1, R, 4.0, 0.1, 0.02);
        const auto fine = exhaustion_run(m, Density::power(1, theta), 1, 1, R, 4.0, 0.05, 0.01);
        EXPECT_EQ(coarse.verdict, fine.verdict) << "theta " << theta;
        EXPECT_NE(fine.verdict, ExhaustionVerdict::Undecided) << "theta " << theta;
    }
}
