#pragma once

// Batch commands behind the radheat tool. Each command writes its table to
// `table` and a human-readable summary to `report`, and returns the process
// exit code.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "radheat/config.hpp"
#include "radheat/conformal.hpp"
#include "radheat/criteria.hpp"
#include "radheat/geometry.hpp"
#include "radheat/solver.hpp"
#include "radheat/witness.hpp"

namespace radheat {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_no_result = 3, exit_violation = 4 };

namespace detail {

inline std::string fmt(double x) { return format_number(x); }

/// Growth family and beta used by the dichotomy table.
inline std::pair<WarpingKind, double> dichotomy_family(const RunConfig& cfg) {
    if (cfg.family == "exponential") return {WarpingKind::ExponentialGrowth, cfg.beta};
    if (cfg.family == "hyperbolic") return {WarpingKind::ExponentialGrowth, 1.0};
    if (cfg.family == "euclidean") return {WarpingKind::PolynomialGrowth, static_cast<double>(cfg.dimension - 1)};
    return {WarpingKind::PolynomialGrowth, cfg.beta};
}

inline std::string_view weight_choice(const RunConfig& cfg) {
    if (cfg.weight_family != "auto") return cfg.weight_family;
    return cfg.theta == 2.0 ? "logsquare" : "power";
}

}  // namespace detail

inline int cmd_classify(const RunConfig& cfg, std::ostream& report) {
    const auto [kind, beta] = detail::dichotomy_family(cfg);
    const Classification cl = classify(kind, beta, cfg.theta);
    report << "family: " << cfg.family << " (dichotomy table: " << to_string(kind) << ", beta = " << detail::fmt(beta)
           << ")\n";
    report << "theta: " << detail::fmt(cfg.theta) << "\n";
    report << "verdict: " << to_string(cl.verdict) << "\n";
    report << "reason: " << cl.reason << "\n";

    const ProbeOptions opt = cfg.probe_options();
    if (cfg.theta < 2.0) {
        const auto v = criterion_power(WeightPsi::power(2.0 - cfg.theta), cfg.theta, 1.0, opt);
        report << "criterion int r^(1-theta) / r^(2-theta): " << to_string(v.kind) << "\n";
    } else if (cfg.theta == 2.0) {
        const auto v = criterion_log(WeightPsi::log_square(cfg.weight_gamma), 2.0, opt);
        report << "criterion int log r / (r gamma log^2 r): " << to_string(v.kind) << "\n";
    } else {
        report << "criterion: not applicable for theta > 2\n";
    }
    const ConformalChange conf(cfg.manifold(), cfg.density());
    report << "completeness of rho g: " << to_string(check_completeness(conf, opt).kind) << "\n";
    return exit_ok;
}

inline int cmd_criterion(const RunConfig& cfg, std::ostream& table, std::ostream& report) {
    const ProbeOptions opt = cfg.probe_options();
    DivergenceVerdict v;
    const std::string_view w = detail::weight_choice(cfg);
    std::string label;
    if (w == "logsquare") {
        v = criterion_log(WeightPsi::log_square(cfg.weight_gamma), 2.0, opt);
        label = "log r / (r psi), psi = gamma log^2 r, gamma = " + detail::fmt(cfg.weight_gamma);
    } else if (cfg.theta < 2.0) {
        v = criterion_power(WeightPsi::power(2.0 - cfg.theta), cfg.theta, 1.0, opt);
        label = "r^(1-theta) / psi, psi = r^(2-theta)";
    } else {
        const ConformalChange conf(cfg.manifold(), cfg.density());
        const WeightPsi psi = WeightPsi::power(1.0);
        const double R0 = find_switch_radius(psi, conf.density(), 1.0) + 1.0;
        const auto g = criterion_general(psi, conf, R0, opt);
        v = g.integral;
        label = "r~ sqrt(rho) / (psi + log rho), psi = r, R0 = " + detail::fmt(R0);
        report << "monotone psi' + rho'/rho >= 0: " << (g.monotone_ok ? "yes" : "no") << "\n";
    }
    table << "stage,R,partial\n";
    for (const auto& [R, s] : v.partials) table << "doubling," << detail::fmt(R) << "," << detail::fmt(s) << "\n";
    for (const auto& [R, s] : v.condensed_partials) table << "log," << detail::fmt(R) << "," << detail::fmt(s) << "\n";
    report << "integrand: " << label << "\n";
    report << "verdict: " << to_string(v.kind) << "\n";
    report << "accumulated: " << detail::fmt(v.accumulated) << "\n";
    if (v.convergent()) report << "tail estimate: " << detail::fmt(v.tail_estimate) << "\n";
    return exit_ok;
}

inline SupersolutionOptions supersolution_options(const RunConfig& cfg) {
    SupersolutionOptions o;
    o.R_max = cfg.witness_r_max;
    o.rel_tol = cfg.quadrature_tol;
    o.probe = cfg.probe_options();
    return o;
}

inline int cmd_supersolution(const RunConfig& cfg, std::ostream& table, std::ostream& report) {
    const ModelManifold m = cfg.manifold();
    const Density d = cfg.density();
    const Supersolution s(m, d, supersolution_options(cfg));
    if (!s.finite()) {
        report << "no finite supersolution — uniqueness regime expected\n";
        return exit_no_result;
    }
    const std::vector<double> grid = logspace(0.05, cfg.witness_r_max, static_cast<std::size_t>(cfg.witness_samples));
    table << "r,h,h1,h2,residual\n";
    for (double r : grid) {
        const double h1 = s.h1(r), h2 = s.h2(r);
        const double residual = h2 + drift_coefficient(m, r) * h1 + d.value(r);
        table << detail::fmt(r) << "," << detail::fmt(s.h(r)) << "," << detail::fmt(h1) << "," << detail::fmt(h2) << ","
              << detail::fmt(residual) << "\n";
    }
    const SupersolutionReport rep = verify_supersolution(s, grid, 1e-6);
    report << "finite: true\n";
    report << "residual <= 1e-6: " << (rep.ok ? "yes" : "no") << " (worst " << detail::fmt(rep.worst_residual)
           << " at r = " << detail::fmt(rep.worst_r) << ")\n";
    report << "h(1) = " << detail::fmt(s.h(1.0)) << ", h(" << detail::fmt(cfg.witness_r_max)
           << ") = " << detail::fmt(s.h(cfg.witness_r_max)) << ", decayed below 0.01 h(1): "
           << (rep.limit_ok ? "yes" : "no") << "\n";
    return rep.ok ? exit_ok : exit_violation;
}

inline int cmd_exhaust(const RunConfig& cfg, std::ostream& table, std::ostream& report) {
    const ModelManifold m = cfg.manifold();
    const Density d = cfg.density();
    const Supersolution witness(m, d, supersolution_options(cfg));
    ExhaustionOptions opt;
    opt.thresholds = cfg.thresholds;
    opt.parallel = cfg.parallel;
    if (witness.finite()) opt.witness = &witness;
    const std::vector<double> Rs = cfg.R_schedule();
    ExhaustionReport rep;
    try {
        rep = exhaustion_run(m, d, cfg.gamma, cfg.T, Rs, cfg.probe_r ? *cfg.probe_r : auto_probe, cfg.dr,
                             cfg.time_step(), opt);
    } catch (const MaxPrincipleViolated& e) {
        report << e.what() << "\n";
        return exit_violation;
    }
    table << "level,R,probe_r,u_probe_T,v_probe,v_over_gammaT,monotone_ok,runtime_ms\n";
    for (std::size_t j = 0; j < rep.levels.size(); ++j) {
        const ExhaustionLevel& l = rep.levels[j];
        const bool mono = j == 0 || l.v_probe <= rep.levels[j - 1].v_probe + 1e-6;
        table << j << "," << detail::fmt(l.R) << "," << detail::fmt(l.probe_r) << "," << detail::fmt(l.u_probe_T) << ","
              << detail::fmt(l.v_probe) << "," << detail::fmt(rep.gamma_T > 0 ? l.v_probe / rep.gamma_T : 0.0) << ","
              << (mono ? "true" : "false") << "," << detail::fmt(std::round(l.runtime_ms)) << "\n";
        if (l.peclet_warning)
            report << "warning: |m(r)| dr > 1 on the ball R = " << detail::fmt(l.R) << "\n";
    }
    report << "verdict: " << to_string(rep.verdict) << "\n";
    report << "monotone_ok: " << (rep.monotone_ok ? "true" : "false")
           << ", comparison_ok: " << (rep.comparison_ok ? "true" : "false") << "\n";
    if (rep.bound_check)
        report << "bound check: " << detail::fmt(rep.bound_check->lower) << " <= v <= "
               << detail::fmt(rep.bound_check->upper) << " with h(probe_r) = " << detail::fmt(rep.bound_check->h)
               << ": " << (rep.bound_check->passed ? "passed" : "failed") << "\n";
    return rep.monotone_ok && rep.comparison_ok ? exit_ok : exit_violation;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& table, std::ostream& report) {
    const BallProblem p{cfg.manifold(), cfg.density(), cfg.R_min, cfg.gamma, {}, cfg.T, cfg.dr, cfg.time_step()};
    FieldTrajectory tr;
    try {
        tr = solve_ball(p, cfg.snapshots);
    } catch (const MaxPrincipleViolated& e) {
        report << e.what() << "\n";
        return exit_violation;
    }
    table << "t,r,u\n";
    for (std::size_t n = 0; n < tr.times.size(); ++n)
        for (std::size_t i = 0; i < tr.radii.size(); ++i)
            table << detail::fmt(tr.times[n]) << "," << detail::fmt(tr.radii[i]) << "," << detail::fmt(tr.values[n][i])
                  << "\n";
    report << "R = " << detail::fmt(p.R) << ", nodes = " << tr.radii.size() << ", steps = " << p.steps() << "\n";
    report << "u range: [" << detail::fmt(tr.u_min) << ", " << detail::fmt(tr.u_max) << "]\n";
    report << "v(R) = " << detail::fmt(tr.time_average.back()) << "\n";
    if (tr.peclet_warning) report << "warning: |m(r)| dr > 1 for some r >= 1\n";
    return exit_ok;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& report) {
    const ModelManifold m = cfg.manifold();
    const Density d = cfg.density();
    bool all = true;
    auto line = [&](const char* suite, bool ok, const std::string& detail, bool informational = false) {
        report << suite << ": " << (informational ? "INFO " : "") << (ok ? "PASS" : "FAIL");
        if (!detail.empty()) report << " (" << detail << ")";
        report << "\n";
        if (!ok && !informational) all = false;
    };

    // Profile derivatives against centered differences.
    {
        double worst = 0.0;
        for (double r : logspace(0.05, 20.0, 200)) {
            const double e = 1e-5 * std::max(1.0, r);
            const double fd1 = (m.f(r + e) - m.f(r - e)) / (2.0 * e);
            const double fd2 = (m.f1(r + e) - m.f1(r - e)) / (2.0 * e);
            worst = std::max(worst, std::abs(fd1 - m.f1(r)) / std::max(1.0, std::abs(m.f1(r))));
            worst = std::max(worst, std::abs(fd2 - m.f2(r)) / std::max(1.0, std::abs(m.f2(r))));
        }
        line("profile derivatives", worst < 1e-5, "worst relative error " + detail::fmt(worst));
    }
    {
        const bool pole = std::abs(m.f(0.0)) <= 1e-12 && std::abs(m.f1(0.0) - 1.0) <= 1e-9;
        line("pole at r = 0", pole, "f(0) = " + detail::fmt(m.f(0.0)) + ", f'(0) = " + detail::fmt(m.f1(0.0)));
    }
    {
        const auto rep = check_laplacian_comparison(m, WarpingFamily::euclidean().pure_profile(m.dimension()),
                                                    logspace(1e-2, 50.0, 400));
        line("laplacian comparison", rep.implication_ok(),
             std::string("hypothesis ") + (rep.hypothesis_holds ? "holds" : "fails") + ", conclusion " +
                 (rep.conclusion_holds ? "holds" : "fails"));
    }
    const ConformalChange conf(m, d);
    {
        double worst = 0.0;
        for (double r : logspace(1e-3, 1e4, 200))
            worst = std::max(worst, std::abs(conf.radius_from_tilde(conf.tilde_radius(r)) - r) / std::max(1.0, r));
        line("conformal round trip", worst <= 1e-8, "worst relative error " + detail::fmt(worst));
    }
    const std::vector<double> radii = logspace(1e-2, 1e3, 500);
    {
        const auto rep = check_delta_r_condition(m, d, radii);
        line("delta r condition", rep.holds, "worst margin " + detail::fmt(rep.worst_margin), true);
    }
    const AssumptionHReport H = check_assumption_H(conf, radii);
    line("assumption H", H.all(),
         std::string("pole_ok=") + (H.pole_ok ? "true" : "false") + " delta_ok=" + (H.delta_ok ? "true" : "false") +
             " omega_growth_ok=" + (H.omega_growth_ok ? "true" : "false"),
         true);
    if (H.all()) {
        CutoffParams p;
        p.R = 1.0;
        p.tau = 0.5;
        p.delta = 0.1;
        p.lambda = 6.0;
        p.alpha = p.alpha_threshold();
        std::vector<double> times;
        for (int i = 1; i <= 50; ++i) times.push_back(p.tau - p.delta + p.delta * i / 50.0);
        const auto rep = verify_cutoff_inequality(conf, p, linspace(0.0, 3.0 * p.R, 301), times);
        line("cutoff inequality", rep.holds, "worst value " + detail::fmt(rep.worst_value));
    } else {
        line("cutoff inequality", true, "skipped: assumption H does not hold", true);
    }
    report << (all ? "all suites passed" : "some suites failed") << "\n";
    return all ? exit_ok : exit_violation;
}

}  // namespace radheat
