#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "radheat/criteria.hpp"
#include "radheat/solver.hpp"

using namespace radheat;

namespace {

ConformalChange conformal(WarpingFamily w, double theta, double c = 1.0, ConformalOptions opt = {}) {
    return ConformalChange(ModelManifold(std::move(w), 3), Density::power(c, theta), opt);
}

WeightPsi log_power(double q) {
    return WeightPsi::custom([q](double r) { return std::pow(std::log(r), q); },
                             [q](double r) { return q * std::pow(std::log(r), q - 1.0) / r; }, "log^q", 1.0);
}

FieldTrajectory constant_field(double R, double dr, double T, double value) {
    FieldTrajectory u;
    const auto n = static_cast<std::size_t>(std::llround(R / dr)) + 1;
    for (std::size_t i = 0; i < n; ++i) u.radii.push_back(dr * i);
    u.times = {0.0, T};
    u.values.assign(2, std::vector<double>(n, value));
    return u;
}

}  // namespace

TEST(Weight, Admissible) {
    const auto radii = logspace(1e-3, 1e4, 500);
    EXPECT_TRUE(weight_is_admissible(WeightPsi::power(0.5), radii));
    EXPECT_TRUE(weight_is_admissible(WeightPsi::log_square(2.0), radii));
    const auto bump = WeightPsi::custom([](double r) { return 2.0 + std::sin(r); }, [](double r) { return std::cos(r); },
                                        "bump");
    EXPECT_FALSE(weight_is_admissible(bump, radii));
    EXPECT_THROW(WeightPsi::log_square(1.0), DomainError);
    EXPECT_THROW(WeightPsi::power(0.0), DomainError);
}

TEST(Weight, LogSquareValue) {
    const auto psi = WeightPsi::log_square(2.0);
    const double r = 7.0;
    EXPECT_NEAR(psi(r), std::pow(std::log(std::pow(r, std::sqrt(2.0))), 2), 1e-12);
    EXPECT_NEAR(psi.d1(r), (psi(r + 1e-6) - psi(r - 1e-6)) / 2e-6, 1e-7);
}

TEST(CriterionPower, MatchedWeightDiverges) {
    EXPECT_EQ(criterion_power(WeightPsi::power(1.0), 1.0, 1.0).kind, Verdict::Divergent);
}

TEST(CriterionPower, HeavierWeightConverges) {
    EXPECT_EQ(criterion_power(WeightPsi::power(1.5), 1.0, 1.0).kind, Verdict::Convergent);
}

TEST(CriterionPower, FlatDensity) {
    EXPECT_EQ(criterion_power(WeightPsi::power(2.0), 0.0, 1.0).kind, Verdict::Divergent);
    EXPECT_THROW(criterion_power(WeightPsi::power(2.0), 2.0, 1.0), DomainError);
}

TEST(CriterionLog, Examples) {
    EXPECT_EQ(criterion_log(WeightPsi::log_square(2.0), 2.0).kind, Verdict::Divergent);
    EXPECT_EQ(criterion_log(log_power(3.0), 2.0).kind, Verdict::Convergent);
    EXPECT_EQ(criterion_log(log_power(1.0), 2.0).kind, Verdict::Divergent);
    EXPECT_THROW(criterion_log(WeightPsi::log_square(2.0), 1.0), DomainError);
}

TEST(CriteriaProperty, ScalingDoesNotFlipVerdicts) {
    for (double theta : {0.0, 0.5, 1.0, 1.5}) {
        for (double extra : {0.0, 0.5}) {
            const auto psi = WeightPsi::power(2.0 - theta + extra);
            EXPECT_EQ(criterion_power(psi, theta, 1.0).kind, criterion_power(psi.scaled(1.0 + 1e-9), theta, 1.0).kind);
        }
    }
    for (const auto& psi : {WeightPsi::log_square(2.0), log_power(3.0), log_power(1.0)})
        EXPECT_EQ(criterion_log(psi, 2.0).kind, criterion_log(psi.scaled(1.0 + 1e-9), 2.0).kind);
}

TEST(SwitchRadius, FoundAndNonnegative) {
    const Density d = Density::power(1, 1.5);
    const auto psi = WeightPsi::power(0.5);
    // psi + log rho is positive at r = 1, dips below zero on (3, 20.6) and
    // stays positive afterwards; start the scan inside the dip.
    EXPECT_EQ(find_switch_radius(psi, d, 1.0), 1.0);
    EXPECT_LT(switch_function(psi, d, 4.0), 0.0);
    const double R2 = find_switch_radius(psi, d, 4.0);
    EXPECT_GE(switch_function(psi, d, R2), 0.0);
    EXPECT_LT(switch_function(psi, d, R2 - 1e-8), 0.0);
    EXPECT_NEAR(R2, 20.626102, 1e-5);
}

TEST(SwitchRadius, NotFound) {
    const auto tiny = WeightPsi::custom([](double) { return 1e-3; }, [](double) { return 0.0; }, "const");
    EXPECT_THROW(find_switch_radius(tiny, Density::power(1, 2), 1.0), R2NotFound);
}

TEST(CriterionGeneral, PowerShape) {
    const auto rep = criterion_general(WeightPsi::power(1.0), conformal(WarpingFamily::euclidean(), 1.0), 1.0);
    EXPECT_EQ(rep.integral.kind, Verdict::Divergent);
    EXPECT_EQ(rep.integral.kind, criterion_power(WeightPsi::power(1.0), 1.0, 1.0).kind);
    EXPECT_TRUE(rep.monotone_ok);
}

TEST(CriterionGeneral, UnitDensity) {
    const auto rep = criterion_general(WeightPsi::power(2.0), conformal(WarpingFamily::euclidean(), 0.0), 1.0);
    EXPECT_EQ(rep.integral.kind, Verdict::Divergent);
    EXPECT_TRUE(rep.monotone_ok);
}

TEST(CriterionGeneral, SlowWeightBreaksMonotonicity) {
    const auto psi = WeightPsi::custom([](double r) { return std::log1p(r); }, [](double r) { return 1.0 / (1.0 + r); },
                                       "log(1+r)");
    const auto rep = criterion_general(psi, conformal(WarpingFamily::euclidean(), 1.0), 1.0);
    EXPECT_FALSE(rep.monotone_ok);
    EXPECT_LT(psi.d1(100.0) + Density::power(1, 1).dlog(100.0), 0.0);
}

TEST(CriterionGeneral, SwitchRadiusNotReached) {
    const auto c = conformal(WarpingFamily::euclidean(), 1.5);
    try {
        criterion_general(WeightPsi::power(0.5), c, 1.0);
        FAIL() << "expected SwitchRadiusNotReached";
    } catch (const SwitchRadiusNotReached& e) {
        EXPECT_NEAR(e.needed_radius, 20.626102, 1e-5);
    }
}

TEST(Phi, IdentityChange) {
    const auto phi = build_phi(WeightPsi::power(2.0), conformal(WarpingFamily::euclidean(), 0.0), 1.0);
    EXPECT_DOUBLE_EQ(phi.R2(), 1.0);
    for (double t : {1.5, 3.0, 100.0}) EXPECT_NEAR(phi(t), t * t, 1e-9 * t * t);
    EXPECT_DOUBLE_EQ(phi(0.2), phi.floor_value());
}

TEST(Phi, LogSquareComposition) {
    const auto phi = build_phi(WeightPsi::log_square(4.0), conformal(WarpingFamily::hyperbolic(), 2.0), 2.0);
    const double r = std::sinh(3.0);
    EXPECT_NEAR(phi(3.0), 4.0 * std::pow(std::log(r), 2) - std::log1p(r * r), 1e-9);
}

TEST(Phi, ConstantBelowSwitch) {
    const auto phi = build_phi(WeightPsi::power(0.5), conformal(WarpingFamily::euclidean(), 1.5), 4.0);
    EXPECT_NEAR(phi.R2(), 20.626102, 1e-5);
    EXPECT_NEAR(phi.tilde_R2(), phi.conformal().tilde_radius(phi.R2()), 1e-12);
    for (double t : linspace(0.0, phi.tilde_R2(), 20)) EXPECT_EQ(phi(t), phi.floor_value());
    EXPECT_GE(phi.floor_value(), 0.0);
}

TEST(Phi, DipAfterSwitchIsRejected) {
    EXPECT_THROW(build_phi(WeightPsi::power(0.5), conformal(WarpingFamily::euclidean(), 1.5), 1.0), PhiConstructionError);
}

TEST(PhiProperty, NonnegativeNondecreasing) {
    struct Case {
        WeightPsi psi;
        double theta;
        double R0;
    };
    const std::vector<Case> cases{{WeightPsi::power(2.0), 0.0, 1.0},
                                  {WeightPsi::power(1.0), 1.0, 1.0},
                                  {WeightPsi::power(1.5), 0.5, 0.5},
                                  {WeightPsi::power(0.5), 1.5, 4.0},
                                  {WeightPsi::log_square(2.0), 2.0, 2.0}};
    for (const auto& c : cases) {
        const auto phi = build_phi(c.psi, conformal(WarpingFamily::euclidean(), c.theta), c.R0);
        EXPECT_GE(phi(0.0), 0.0);
        double prev = phi(0.0);
        for (double t : linspace(0.0, phi.max_tilde(), 1000)) {
            const double v = phi(t);
            EXPECT_GE(v, prev - 1e-9 * std::max(1.0, prev)) << c.psi.name() << " r~ = " << t;
            prev = v;
        }
    }
}

TEST(PhiCondition, ClosedFormWeights) {
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(check_phi_condition([](double t) { return t * t; }, 1.0, inf).kind, Verdict::Divergent);
    EXPECT_EQ(check_phi_condition([](double t) { return std::pow(t, 2.5); }, 1.0, inf).kind, Verdict::Convergent);
}

TEST(PhiCondition, EndToEndThetaOne) {
    const auto phi = build_phi(WeightPsi::power(1.0), conformal(WarpingFamily::euclidean(), 1.0), 1.0);
    EXPECT_EQ(check_phi_condition(phi, 1.0).kind, Verdict::Divergent);
}

TEST(CriteriaProperty, GeneralCriterionImpliesPhiCondition) {
    // theta = 1.5 needs a longer table: r~ only grows like r^(1/4).
    ConformalOptions wide;
    wide.R_max = 1e12;
    for (double theta : {0.0, 0.5, 1.0, 1.5}) {
        const auto c = conformal(WarpingFamily::euclidean(), theta, 1.0, theta > 1.0 ? wide : ConformalOptions{});
        const auto psi = WeightPsi::power(2.0 - theta);
        const double R0 = std::ceil(find_switch_radius(psi, c.density(), 4.0));
        const auto general = criterion_general(psi, c, R0);
        ASSERT_EQ(general.integral.kind, Verdict::Divergent) << "theta = " << theta;
        ASSERT_TRUE(general.monotone_ok);
        EXPECT_EQ(check_phi_condition(build_phi(psi, c, R0), 1.0).kind, Verdict::Divergent) << "theta = " << theta;
    }
}

TEST(Classify, Examples) {
    EXPECT_EQ(classify(WarpingKind::ExponentialGrowth, 1.0, 0.5).verdict, Uniqueness::Unique);
    EXPECT_EQ(classify(WarpingKind::ExponentialGrowth, 1.0, 1.5).verdict, Uniqueness::NonUnique);
    EXPECT_EQ(classify(WarpingKind::PolynomialGrowth, 2.0, 2.0).verdict, Uniqueness::Unique);
    EXPECT_EQ(classify(WarpingKind::PolynomialGrowth, 2.0, 2.5).verdict, Uniqueness::NonUnique);
    EXPECT_EQ(classify(WarpingKind::ExponentialGrowth, 1.0, 1.0).verdict, Uniqueness::Indeterminate);
    EXPECT_FALSE(classify(WarpingKind::ExponentialGrowth, 1.0, 1.0).reason.empty());
}

TEST(Classify, RejectsOtherFamilies) {
    EXPECT_THROW(classify(WarpingKind::Hyperbolic, 1.0, 1.0), DomainError);
    EXPECT_THROW(classify(WarpingKind::ExponentialGrowth, 2.5, 1.0), DomainError);
    EXPECT_THROW(classify(WarpingKind::PolynomialGrowth, 2.0, -1.0), DomainError);
}

TEST(ClassifyProperty, UniqueImpliesDivergentCriterion) {
    std::vector<std::pair<WarpingKind, std::pair<double, double>>> lattice;
    for (double beta : {0.5, 1.0, 2.0})
        for (double theta : {0.0, 0.25, 0.5, 1.0, 1.25, 1.5, 2.0, 2.5})
            lattice.push_back({WarpingKind::ExponentialGrowth, {beta, theta}});
    for (double theta : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) lattice.push_back({WarpingKind::PolynomialGrowth, {2.0, theta}});
    for (const auto& [kind, bt] : lattice) {
        const auto [beta, theta] = bt;
        if (classify(kind, beta, theta).verdict != Uniqueness::Unique) continue;
        const auto v = theta < 2.0 ? criterion_power(WeightPsi::power(2.0 - theta), theta, 1.0)
                                   : criterion_log(WeightPsi::log_square(2.0), 2.0);
        EXPECT_EQ(v.kind, Verdict::Divergent) << to_string(kind) << " beta " << beta << " theta " << theta;
    }
}

TEST(WeightedNorm, ZeroField) {
    const ModelManifold m(WarpingFamily::euclidean(), 2);
    EXPECT_EQ(weighted_norm(constant_field(8, 0.01, 1, 0.0), WeightPsi::power(2.0), 1.0, m, 8.0), 0.0);
}

TEST(WeightedNorm, GaussianDisk) {
    const ModelManifold m(WarpingFamily::euclidean(), 2);
    const double v = weighted_norm(constant_field(8, 0.001, 1, 1.0), WeightPsi::power(2.0), 1.0, m, 8.0);
    EXPECT_NEAR(v, std::numbers::pi * (1.0 - std::exp(-64.0)), 1e-6);
    EXPECT_THROW(weighted_norm(constant_field(8, 0.01, 1, 1.0), WeightPsi::power(2.0), 0.5, m, 8.0), DomainError);
}

TEST(WeightedNorm, ExponentialGrowthBoundary) {
    const ModelManifold m(WarpingFamily::exponential(1.0), 3);
    const auto u = constant_field(32, 0.01, 1, 1.0);
    auto partials = [&](double theta) {
        std::vector<double> out;
        for (double R : {8.0, 16.0, 32.0}) out.push_back(weighted_norm(u, WeightPsi::power(2.0 - theta), 1.0, m, R));
        return out;
    };
    const auto stable = partials(0.5);
    EXPECT_LT(std::abs(stable[2] - stable[1]), 0.01 * stable[1]);
    const auto growing = partials(1.5);
    EXPECT_GT(growing[1], 10.0 * growing[0]);
    EXPECT_GT(growing[2], 10.0 * growing[1]);
}

TEST(WeightedNormProperty, MonotoneInTruncationAndExponent) {
    const ModelManifold m(WarpingFamily::hyperbolic(), 3);
    auto u = constant_field(10, 0.05, 1, 0.0);
    for (std::size_t n = 0; n < u.times.size(); ++n)
        for (std::size_t i = 0; i < u.radii.size(); ++i) u.values[n][i] = 0.9 * std::cos(0.7 * u.radii[i] + n);
    const auto psi = WeightPsi::power(1.5);
    double prev = 0.0;
    for (double R : {1.0, 2.0, 4.0, 8.0, 10.0}) {
        const double v = weighted_norm(u, psi, 1.0, m, R);
        EXPECT_GE(v, prev);
        prev = v;
    }
    double prev_p = std::numeric_limits<double>::infinity();
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
        const double v = weighted_norm(u, psi, p, m, 10.0);
        EXPECT_LE(v, prev_p);
        prev_p = v;
    }
}

TEST(WeightedNorm, SolverTrajectory) {
    BallProblem p{ModelManifold(WarpingFamily::euclidean(), 3), Density::unit(), 4.0, 1.0, {}, 0.5, 0.05, 0.01};
    const auto tr = solve_ball(p, linspace(0.0, 0.5, 11));
    const double v = weighted_norm(tr, WeightPsi::power(2.0), 1.0, p.manifold, 4.0);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, weighted_norm(constant_field(4.0, 0.05, 0.5, 1.0), WeightPsi::power(2.0), 1.0, p.manifold, 4.0));
}

TEST(Cutoff, InsideBallIsZero) {
    const auto c = conformal(WarpingFamily::hyperbolic(), 2.0);
    const CutoffParams p;
    for (double t : {0.41, 0.45, 0.5})
        for (double tr : {0.0, 0.5, 1.0}) EXPECT_EQ(cutoff_expression(c, p, tr, t), 0.0);
}

TEST(Cutoff, HyperbolicThetaTwoHolds) {
    const auto c = conformal(WarpingFamily::hyperbolic(), 2.0);
    CutoffParams p;
    p.alpha = p.alpha_threshold();
    EXPECT_NEAR(p.alpha, 10.0, 1e-12);
    const auto rep = verify_cutoff_inequality(c, p, linspace(0.0, 3.0, 301), linspace(0.4, 0.5, 51));
    EXPECT_TRUE(rep.asserted);
    EXPECT_TRUE(rep.holds);
    EXPECT_LE(rep.worst_value, 1e-9);
}

TEST(Cutoff, SmallAlphaViolates) {
    const auto c = conformal(WarpingFamily::hyperbolic(), 2.0);
    CutoffParams p;
    p.alpha = 1.0;
    const auto rep = verify_cutoff_inequality(c, p, linspace(0.0, 3.0, 301), linspace(0.4, 0.5, 51));
    EXPECT_FALSE(rep.asserted);
    EXPECT_FALSE(rep.holds);
    EXPECT_GT(rep.worst_value, 1e-9);
    EXPECT_GT(rep.worst_point.first, p.R);
    EXPECT_GT(rep.worst_point.second, p.tau - p.delta);
    EXPECT_LE(rep.worst_point.second, p.tau);
}

TEST(Cutoff, RejectsLargeDelta) {
    const auto c = conformal(WarpingFamily::hyperbolic(), 2.0);
    CutoffParams p;
    p.delta = 0.25;
    EXPECT_THROW(verify_cutoff_inequality(c, p, linspace(0, 3, 4), linspace(0.3, 0.5, 4)), ParamViolation);
    p.tau = 0.05;
    p.delta = 0.1;
    EXPECT_THROW(verify_cutoff_inequality(c, p, linspace(0, 3, 4), linspace(0.0, 0.05, 4)), ParamViolation);
}

TEST(CutoffProperty, HoldsAboveAlphaThreshold) {
    for (const auto& w : {WarpingFamily::euclidean(), WarpingFamily::hyperbolic()}) {
        for (double theta : {0.0, 1.0, 2.0}) {
            const auto c = conformal(w, theta);
            for (double lambda : {2.0, 6.0, 10.0}) {
                for (double delta : {0.05, 0.1, 0.2}) {
                    CutoffParams p;
                    p.lambda = lambda;
                    p.delta = delta;
                    p.alpha = p.alpha_threshold();
                    const auto rep = verify_cutoff_inequality(c, p, linspace(0.0, 3.0 * p.R, 301),
                                                              linspace(p.tau - p.delta, p.tau, 51));
                    EXPECT_TRUE(rep.holds) << to_string(w.kind) << " theta " << theta << " lambda " << lambda
                                           << " delta " << delta << " worst " << rep.worst_value;
                }
            }
        }
    }
}
