#pragma once

// rho(r) u_t = u_rr + m(r) u_r on the ball B_R with u = gamma on the sphere
// r = R, by a theta-scheme on the uniform grid r_i = i dr: backward Euler for
// the first startup steps, Crank-Nicolson afterwards. The exhaustion run
// repeats the solve on growing balls and tracks the time average
// v_R(r) = int_0^T u_R(r, t) dt at a fixed probe radius.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radheat/error.hpp"
#include "radheat/geometry.hpp"
#include "radheat/numerics.hpp"
#include "radheat/trajectory.hpp"
#include "radheat/witness.hpp"

namespace radheat {

struct BallProblem {
    ModelManifold manifold;
    Density density;
    double R = 8.0;
    double gamma = 1.0;
    /// Initial profile on [0, R); empty means u0 == 0.
    RadialProfile::Fn u0;
    double T = 1.0;
    double dr = 0.01;
    double dt = 1e-3;
    int startup_steps = 4;

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

    void validate() const {
        if (!(R > 0.0 && dr > 0.0 && dt > 0.0 && T > 0.0)) throw DomainError("ball problem needs positive R, dr, dt, T");
        if (!(gamma >= 0.0)) throw DomainError("ball problem needs gamma >= 0");
        if (startup_steps < 0) throw DomainError("startup_steps must be >= 0");
        RadialGrid::covering(R, dr);
        const double n = T / dt;
        if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) throw DomainError("dt does not divide T");
        if (RadialGrid::covering(R, dr).nodes < 3) throw GridTooSmall("ball grid needs at least 3 nodes");
    }
};

/// Assembled theta-scheme for one ball problem. The unknowns are the nodes
/// r_0 .. r_{n-2}; the last node carries the Dirichlet value.
class BallSolver {
public:
    explicit BallSolver(const BallProblem& p) : p_(p) {
        p_.validate();
        grid_ = RadialGrid::covering(p_.R, p_.dr);
        const std::size_t n = grid_.nodes - 1;
        const double inv2 = 1.0 / (p_.dr * p_.dr);
        rho_.resize(n);
        lo_.resize(n);
        mid_.resize(n);
        hi_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = grid_.r(i);
            rho_[i] = p_.density.value(r);
            if (i == 0) {
                const double N = p_.manifold.dimension();
                lo_[i] = 0.0;
                mid_[i] = -2.0 * N * inv2;
                hi_[i] = 2.0 * N * inv2;
                continue;
            }
            const double m = drift_coefficient(p_.manifold, r);
            if (r >= 1.0 && std::abs(m) * p_.dr > 1.0) peclet_warning_ = true;
            lo_[i] = inv2 - m / (2.0 * p_.dr);
            mid_[i] = -2.0 * inv2;
            hi_[i] = inv2 + m / (2.0 * p_.dr);
        }
    }

    const BallProblem& problem() const { return p_; }
    const RadialGrid& grid() const { return grid_; }
    bool peclet_warning() const { return peclet_warning_; }

    /// Node values of u0 with the boundary node set to gamma.
    std::vector<double> initial_state() const {
        std::vector<double> u(grid_.nodes, 0.0);
        if (p_.u0)
            for (std::size_t i = 0; i + 1 < grid_.nodes; ++i) u[i] = p_.u0(grid_.r(i));
        u.back() = p_.gamma;
        return u;
    }

    /// Advance one time step in place; step_index counts from 0.
    void advance(std::vector<double>& u, std::size_t step_index) {
        const std::size_t n = grid_.nodes - 1;
        if (u.size() != grid_.nodes) throw DomainError("state size does not match the grid");
        const double w = step_index < static_cast<std::size_t>(p_.startup_steps) ? 1.0 : 0.5;
        const double inv_dt = 1.0 / p_.dt;
        diag_.resize(n);
        sub_.resize(n - 1);
        sup_.resize(n - 1);
        rhs_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i > 0 ? u[i - 1] : 0.0;
            const double Lu = lo_[i] * left + mid_[i] * u[i] + hi_[i] * u[i + 1];
            diag_[i] = rho_[i] * inv_dt - w * mid_[i];
            rhs_[i] = rho_[i] * inv_dt * u[i] + (1.0 - w) * Lu;
            if (i > 0) sub_[i - 1] = -w * lo_[i];
            if (i + 1 < n) sup_[i] = -w * hi_[i];
        }
        rhs_[n - 1] += w * hi_[n - 1] * p_.gamma;
        try {
            solve_tridiagonal_inplace(sub_, diag_, sup_, rhs_, scratch_);
        } catch (const ZeroPivot& e) {
            throw SolveFailure(e.what());
        }
        std::copy(rhs_.begin(), rhs_.end(), u.begin());
        u.back() = p_.gamma;
    }

private:
    BallProblem p_;
    RadialGrid grid_;
    bool peclet_warning_ = false;
    std::vector<double> rho_, lo_, mid_, hi_;
    std::vector<double> diag_, sub_, sup_, rhs_, scratch_;
};

/// One theta-scheme step of the ball problem from state at step step_index.
inline std::vector<double> step(const BallProblem& p, std::span<const double> state, std::size_t step_index) {
    BallSolver s(p);
    std::vector<double> u(state.begin(), state.end());
    s.advance(u, step_index);
    return u;
}

/// Full evolution on [0, T]. Snapshots are stored at t = 0, at T and at the
/// steps nearest to the requested times. The bound
/// min(u0, 0) - 1e-8 <= u <= max(sup u0, gamma) + 1e-8 is checked after
/// every step.
inline FieldTrajectory solve_ball(const BallProblem& p, std::span<const double> snapshot_times = {}) {
    BallSolver solver(p);
    const std::size_t steps = p.steps();
    std::vector<std::size_t> marks{0, steps};
    for (double t : snapshot_times) {
        if (!(t >= 0.0 && t <= p.T)) throw DomainError("snapshot time outside [0, T]");
        marks.push_back(static_cast<std::size_t>(std::llround(t / p.dt)));
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    std::vector<double> u = solver.initial_state();
    const auto [mn, mx] = std::minmax_element(u.begin(), u.end() - 1);
    const double lower = std::min(*mn, 0.0) - 1e-8;
    const double upper = std::max(*mx, p.gamma) + 1e-8;

    FieldTrajectory out;
    out.peclet_warning = solver.peclet_warning();
    for (std::size_t i = 0; i < solver.grid().nodes; ++i) out.radii.push_back(solver.grid().r(i));
    out.time_average.assign(u.size(), 0.0);
    out.u_min = std::min(*mn, p.gamma);
    out.u_max = std::max(*mx, p.gamma);

    std::size_t next_mark = 0;
    auto record = [&](std::size_t n) {
        if (next_mark < marks.size() && marks[next_mark] == n) {
            out.times.push_back(static_cast<double>(n) * p.dt);
            out.values.push_back(u);
            ++next_mark;
        }
    };
    record(0);
    std::vector<double> prev;
    for (std::size_t n = 0; n < steps; ++n) {
        prev = u;
        solver.advance(u, n);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double x = u[i];
            if (!(x >= lower && x <= upper))
                throw MaxPrincipleViolated("u = " + std::to_string(x) + " at r = " + std::to_string(out.radii[i]) +
                                           ", t = " + std::to_string(static_cast<double>(n + 1) * p.dt));
            out.time_average[i] += 0.5 * p.dt * (prev[i] + x);
            out.u_min = std::min(out.u_min, x);
            out.u_max = std::max(out.u_max, x);
        }
        record(n + 1);
    }
    return out;
}

/// Richardson estimate log2(|u_h - u_{h/2}| / |u_{h/2} - u_{h/4}|) of the
/// joint space-time order, from max norms of u(., T) at the coarse nodes.
inline double self_convergence_order(const BallProblem& p) {
    std::vector<std::vector<double>> finals;
    for (int level = 0; level < 3; ++level) {
        BallProblem q = p;
        const double s = std::ldexp(1.0, -level);
        q.dr = p.dr * s;
        q.dt = p.dt * s;
        finals.push_back(solve_ball(q).final_values());
    }
    double e01 = 0.0, e12 = 0.0;
    const std::size_t n = finals[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        e01 = std::max(e01, std::abs(finals[0][i] - finals[1][2 * i]));
        e12 = std::max(e12, std::abs(finals[1][2 * i] - finals[2][4 * i]));
    }
    return std::log2(e01 / e12);
}

// ---------------------------------------------------------------------------
// Exhaustion by balls

enum class ExhaustionVerdict { UniqueConsistent, NonUniqueConsistent, Undecided };

inline const char* to_string(ExhaustionVerdict v) {
    switch (v) {
        case ExhaustionVerdict::UniqueConsistent: return "UniqueConsistent";
        case ExhaustionVerdict::NonUniqueConsistent: return "NonUniqueConsistent";
        case ExhaustionVerdict::Undecided: return "Undecided";
    }
    return "?";
}

/// Verdict cutoffs; every quantity is measured in units of gamma T.
struct ExhaustionThresholds {
    double nonunique_rel_change = 0.05;
    double nonunique_min = 0.4;
    double unique_max = 0.1;
    double unique_ratio = 0.7;
};

struct ExhaustionOptions {
    ExhaustionThresholds thresholds = {};
    /// Supersolution for the automatic probe radius and the bound check.
    const Supersolution* witness = nullptr;
    bool parallel = false;
};

struct ExhaustionLevel {
    double R = 0.0;
    double probe_r = 0.0;
    double u_probe_T = 0.0;
    double v_probe = 0.0;
    double runtime_ms = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    bool peclet_warning = false;
};

struct BoundCheck {
    double h = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool passed = false;
};

struct ExhaustionReport {
    std::vector<ExhaustionLevel> levels;
    double gamma_T = 0.0;
    /// v_probe nonincreasing in R within 1e-6.
    bool monotone_ok = true;
    /// u_{R_{j+1}}(., T) <= u_{R_j}(., T) + 1e-6 at shared nodes.
    bool comparison_ok = true;
    double worst_comparison_excess = -std::numeric_limits<double>::infinity();
    ExhaustionVerdict verdict = ExhaustionVerdict::Undecided;
    std::optional<BoundCheck> bound_check;
};

/// NaN requests the automatic probe radius.
inline constexpr double auto_probe = std::numeric_limits<double>::quiet_NaN();

/// Smallest tabulated r < R_first with 2 gamma h(r) <= gamma T / 2, else R_first / 2.
inline double automatic_probe_radius(const Supersolution* witness, double T, double R_first) {
    if (witness != nullptr && witness->finite())
        for (const auto& [r, h] : witness->table())
            if (r > 0.0 && r < R_first && 2.0 * h <= 0.5 * T) return r;
    return 0.5 * R_first;
}

inline ExhaustionReport exhaustion_run(const ModelManifold& m, const Density& d, double gamma, double T,
                                       std::span<const double> R_schedule, double probe_r, double dr, double dt,
                                       const ExhaustionOptions& opt = {}) {
    if (R_schedule.empty()) throw DomainError("exhaustion needs at least one radius");
    for (std::size_t j = 1; j < R_schedule.size(); ++j)
        if (!(R_schedule[j] > R_schedule[j - 1])) throw DomainError("R schedule must be increasing");
    if (std::isnan(probe_r)) probe_r = automatic_probe_radius(opt.witness, T, R_schedule.front());
    const auto probe_index = static_cast<std::size_t>(std::llround(probe_r / dr));
    probe_r = dr * static_cast<double>(probe_index);
    if (!(probe_r < R_schedule.front())) throw DomainError("probe radius must lie inside the smallest ball");

    struct Run {
        ExhaustionLevel level;
        std::vector<double> final_values;
    };
    auto run_level = [&](double R) {
        const auto start = std::chrono::steady_clock::now();
        BallProblem p{m, d, R, gamma, {}, T, dr, dt};
        FieldTrajectory tr = solve_ball(p);
        Run out;
        out.level.R = R;
        out.level.probe_r = probe_r;
        out.level.u_probe_T = tr.final_values()[probe_index];
        out.level.v_probe = tr.time_average[probe_index];
        out.level.u_min = tr.u_min;
        out.level.u_max = tr.u_max;
        out.level.peclet_warning = tr.peclet_warning;
        out.final_values = tr.final_values();
        out.level.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return out;
    };

    std::vector<Run> runs;
    if (opt.parallel) {
        std::vector<std::future<Run>> jobs;
        for (double R : R_schedule) jobs.push_back(std::async(std::launch::async, run_level, R));
        for (auto& j : jobs) runs.push_back(j.get());
    } else {
        for (double R : R_schedule) runs.push_back(run_level(R));
    }

    ExhaustionReport rep;
    rep.gamma_T = gamma * T;
    for (std::size_t j = 0; j < runs.size(); ++j) {
        rep.levels.push_back(runs[j].level);
        if (j == 0) continue;
        if (runs[j].level.v_probe > runs[j - 1].level.v_probe + 1e-6) rep.monotone_ok = false;
        const auto& small = runs[j - 1].final_values;
        const auto& large = runs[j].final_values;
        for (std::size_t i = 0; i < small.size(); ++i) {
            const double excess = large[i] - small[i];
            rep.worst_comparison_excess = std::max(rep.worst_comparison_excess, excess);
            if (excess > 1e-6) rep.comparison_ok = false;
        }
    }

    const ExhaustionThresholds& th = opt.thresholds;
    const double gT = rep.gamma_T;
    const double v_last = rep.levels.back().v_probe;
    if (rep.levels.size() >= 2 && gT > 0.0) {
        const double v_prev = rep.levels[rep.levels.size() - 2].v_probe;
        bool ratios_ok = true;
        for (std::size_t j = 1; j < rep.levels.size(); ++j) {
            const double a = rep.levels[j - 1].v_probe, b = rep.levels[j].v_probe;
            const double ratio = a > 0.0 ? b / a : (b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (ratio > th.unique_ratio) ratios_ok = false;
        }
        if (std::abs(v_last - v_prev) < th.nonunique_rel_change * gT && v_last >= th.nonunique_min * gT)
            rep.verdict = ExhaustionVerdict::NonUniqueConsistent;
        else if (v_last <= th.unique_max * gT && ratios_ok)
            rep.verdict = ExhaustionVerdict::UniqueConsistent;
    }

    if (opt.witness != nullptr && opt.witness->finite()) {
        BoundCheck b;
        b.h = opt.witness->h(probe_r);
        const double M = 2.0 * gamma;
        b.lower = gT - M * b.h;
        b.upper = gT + M * b.h;
        b.passed = v_last >= b.lower && v_last <= b.upper;
        rep.bound_check = b;
    }
    return rep;
}

}  // namespace radheat
