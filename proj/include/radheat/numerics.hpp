#pragma once

// Shared numerical kernels: adaptive Gauss-Kronrod quadrature, a finite
// decision procedure for improper integrals on [R0, inf), bracketed inversion
// of monotone functions and a Thomas tridiagonal solver. Everything here is a
// pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radheat/error.hpp"

namespace radheat {

/// Real function of the radial variable. Must be deterministic.
using Integrand = std::function<double(double)>;

struct QuadResult {
    double value = 0.0;
    double err_est = 0.0;
    std::size_t segments = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kronrod_nodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, kronrod, err;
    int depth;
};

template <class F>
double checked_eval(const F& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) throw NonFinite("integrand is " + std::to_string(y) + " at " + std::to_string(x));
    return y;
}

template <class F>
Segment gauss_kronrod15(const F& f, double a, double b, int depth) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = checked_eval(f, center);
    double kronrod = kronrod_weights[7] * fc;
    double gauss = gauss_weights[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        const double pair = checked_eval(f, center - dx) + checked_eval(f, center + dx);
        kronrod += kronrod_weights[j] * pair;
        if (j % 2 == 1) gauss += gauss_weights[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace detail

inline constexpr int quadrature_max_depth = 50;
inline constexpr std::size_t quadrature_max_segments = 200000;

/// Adaptive G7/K15 quadrature of f over [a, b].
///
/// A segment is accepted once |K15 - G7| is below its share of the absolute
/// tolerance, below rel_tol * |K15|, or at the round-off floor; segments that
/// reach depth 50 are accepted as they are and their error is still counted.
/// err_est is the sum of accepted |K15 - G7|, which bounds the true error for
/// integrands with bounded fourth derivative.
template <class F>
QuadResult integrate(const F& f, double a, double b, double tol, double rel_tol = 0.0) {
    if (!std::isfinite(a) || !std::isfinite(b) || a > b)
        throw DomainError("integrate needs finite a <= b, got [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
    if (!(tol > 0.0)) throw DomainError("integrate needs tol > 0");
    QuadResult result;
    if (a == b) return result;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double length = b - a;
    std::vector<detail::Segment> stack;
    stack.push_back(detail::gauss_kronrod15(f, a, b, 0));
    while (!stack.empty()) {
        const detail::Segment seg = stack.back();
        stack.pop_back();
        const double share = tol * (seg.b - seg.a) / length;
        const double floor = 50.0 * eps * std::abs(seg.kronrod);
        const double mid = 0.5 * (seg.a + seg.b);
        const bool unsplittable = !(mid > seg.a && mid < seg.b);
        if (seg.err <= std::max({share, rel_tol * std::abs(seg.kronrod), floor}) ||
            seg.depth >= quadrature_max_depth || unsplittable) {
            result.value += seg.kronrod;
            result.err_est += seg.err;
            ++result.segments;
            continue;
        }
        if (result.segments + stack.size() + 2 > quadrature_max_segments)
            throw NoConvergence("subdivision budget exhausted on [" + std::to_string(a) + ", " +
                                std::to_string(b) + "]");
        stack.push_back(detail::gauss_kronrod15(f, mid, seg.b, seg.depth + 1));
        stack.push_back(detail::gauss_kronrod15(f, seg.a, mid, seg.depth + 1));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Divergence probing

enum class Verdict { Divergent, Convergent, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Divergent: return "Divergent";
        case Verdict::Convergent: return "Convergent";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "?";
}

struct DivergenceVerdict {
    Verdict kind = Verdict::Indeterminate;
    /// Geometric bound on the neglected tail; meaningful for Convergent only.
    double tail_estimate = 0.0;
    double accumulated = 0.0;
    /// (right end R_k of panel k, integral over [R0, R_k]) for the doubling stage.
    std::vector<std::pair<double, double>> partials;
    /// Same for the log-variable stage: (r = e^s at block end, integral over [R0, r]).
    std::vector<std::pair<double, double>> condensed_partials;
    int doublings_used = 0;
    bool condensed = false;

    bool divergent() const { return kind == Verdict::Divergent; }
    bool convergent() const { return kind == Verdict::Convergent; }
};

struct ProbeOptions {
    int max_doublings = 60;
    double decay_ratio = 0.8;
    /// Convergent requires the geometric tail bound below tol * accumulated.
    double tol = 1e-2;
    double divergence_threshold = 1e12;
    /// Number of successive non-decreasing panels that signals divergence.
    int window = 5;
    /// Relative accuracy of each panel integral.
    double panel_rel_tol = 1e-11;
    /// Run the log-variable stage when the doubling stage is undecided.
    bool condense = true;
};

namespace detail {

struct PanelDecision {
    Verdict kind = Verdict::Indeterminate;
    double tail = 0.0;
};

inline double panel_ratio(double num, double den) {
    if (den > 0.0) return num / den;
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

// Shared rules for a sequence of nonnegative panel integrals.
inline PanelDecision decide_panels(const std::vector<double>& panels, double accumulated,
                                   const ProbeOptions& opt) {
    const std::size_t n = panels.size();
    if (accumulated > opt.divergence_threshold) return {Verdict::Divergent, 0.0};
    const auto w = static_cast<std::size_t>(opt.window);
    if (n >= w + 1) {
        if (accumulated == 0.0) return {Verdict::Convergent, 0.0};
        bool nondecreasing = panels[n - 1] > 0.0;
        for (std::size_t j = n - w; j < n && nondecreasing; ++j)
            nondecreasing = panels[j] >= panels[j - 1] * (1.0 - 1e-9);
        if (nondecreasing) return {Verdict::Divergent, 0.0};

        // Panels settling geometrically onto a positive limit.
        const double d2 = panels[n - 1] - panels[n - 2];
        const double d1 = panels[n - 2] - panels[n - 3];
        const double d0 = panels[n - 3] - panels[n - 4];
        if (d1 != 0.0 && d0 != 0.0 && panels[n - 1] > 0.0) {
            const double q1 = d2 / d1, q0 = d1 / d0;
            if (q1 >= 0.0 && q0 >= 0.0 && q1 <= opt.decay_ratio && q0 <= opt.decay_ratio) {
                const double limit = panels[n - 1] + d2 * q1 / (1.0 - q1);
                if (limit >= 0.9 * panels[n - 1]) return {Verdict::Divergent, 0.0};
            }
        }
    }
    if (n >= 3) {
        const double q1 = panel_ratio(panels[n - 1], panels[n - 2]);
        const double q0 = panel_ratio(panels[n - 2], panels[n - 3]);
        if (q1 <= opt.decay_ratio && q0 <= opt.decay_ratio) {
            const double tail = panels[n - 1] * q1 / (1.0 - q1);
            if (tail < opt.tol * accumulated) return {Verdict::Convergent, tail};
        }
    }
    return {};
}

inline double panel_integral(const Integrand& f, double a, double b, const ProbeOptions& opt) {
    return integrate(f, a, b, 1e-300, opt.panel_rel_tol).value;
}

}  // namespace detail

/// Decide whether the integral of a nonnegative f over [R0, inf) diverges.
///
/// Stage one integrates the panels [R0 2^k, R0 2^(k+1)], k = 0..max_doublings:
///   - Divergent when the running sum exceeds divergence_threshold or the last
///     `window` panels are non-decreasing, or once their increments shrink
///     geometrically towards a limit of at least 0.9 times the last panel;
///   - Convergent when the last two panel ratios are <= decay_ratio and the
///     geometric tail bound q P / (1 - q) is below tol times the running sum.
/// When stage one stays undecided the same rules are applied to the integral
/// in s = ln r, i.e. to e^s f(e^s) on blocks [s0 2^j, s0 2^(j+1)] with s <= 700.
/// This second pass separates the logarithmically slow families (1/(r log r)
/// against 1/(r log^2 r), or r^-q with q slightly above 1). Anything still
/// undecided is reported as Indeterminate.
template <class F>
DivergenceVerdict probe_divergence(const F& fn, double R0, const ProbeOptions& opt = {}) {
    if (!(R0 > 0.0) || !std::isfinite(R0)) throw DomainError("probe_divergence needs R0 > 0");
    if (!(opt.decay_ratio > 0.0 && opt.decay_ratio < 1.0))
        throw DomainError("probe_divergence needs 0 < decay_ratio < 1");
    const Integrand f = fn;
    DivergenceVerdict out;

    std::vector<double> panels;
    double acc = 0.0;
    double a = R0;
    for (int k = 0; k <= opt.max_doublings; ++k) {
        const double b = 2.0 * a;
        const double p = detail::panel_integral(f, a, b, opt);
        panels.push_back(p);
        acc += p;
        out.partials.emplace_back(b, acc);
        out.doublings_used = k + 1;
        const auto d = detail::decide_panels(panels, acc, opt);
        if (d.kind != Verdict::Indeterminate) {
            out.kind = d.kind;
            out.tail_estimate = d.tail;
            out.accumulated = acc;
            return out;
        }
        a = b;
    }
    out.accumulated = acc;
    if (!opt.condense) return out;

    // Log-variable stage.
    constexpr double s_limit = 700.0;
    const double s0 = std::max(std::log(R0), 1.0);
    const Integrand g = [&f](double s) {
        const double r = std::exp(s);
        const double v = f(r);
        return v == 0.0 ? 0.0 : r * v;
    };
    out.condensed = true;
    try {
        double acc2 = 0.0;
        if (R0 < std::exp(s0)) acc2 = detail::panel_integral(f, R0, std::exp(s0), opt);
        std::vector<double> blocks;
        for (double s = s0; 2.0 * s <= s_limit; s *= 2.0) {
            const double p = detail::panel_integral(g, s, 2.0 * s, opt);
            blocks.push_back(p);
            acc2 += p;
            out.condensed_partials.emplace_back(std::exp(2.0 * s), acc2);
            ++out.doublings_used;
            const auto d = detail::decide_panels(blocks, acc2, opt);
            if (d.kind != Verdict::Indeterminate) {
                out.kind = d.kind;
                out.tail_estimate = d.tail;
                out.accumulated = acc2;
                return out;
            }
        }
    } catch (const NonFinite&) {
        // Integrand not representable that far out: leave undecided.
    }
    out.kind = Verdict::Indeterminate;
    return out;
}

// ---------------------------------------------------------------------------

/// Solve g(r) = y for strictly increasing g on [lo, hi] by Illinois regula
/// falsi with a bisection safeguard. Returns r with |g(r) - y| <= tol, or the
/// best endpoint once the bracket has collapsed to rounding width.
template <class G>
double invert_monotone(const G& g, double y, double lo, double hi, double tol) {
    if (!(lo <= hi)) throw BracketInvalid("bracket low > high");
    double a = lo, b = hi;
    double fa = g(a) - y, fb = g(b) - y;
    if (std::abs(fa) <= tol) return a;
    if (std::abs(fb) <= tol) return b;
    if (fa > 0.0 || fb < 0.0)
        throw BracketInvalid("y = " + std::to_string(y) + " outside [g(lo), g(hi)] = [" +
                             std::to_string(fa + y) + ", " + std::to_string(fb + y) + "]");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    int side = 0;
    double width_before = b - a;
    for (int it = 0; it < 400; ++it) {
        double c = (fb * a - fa * b) / (fb - fa);
        const bool stalled = it % 3 == 2 && (b - a) > 0.5 * width_before;
        if (it % 3 == 2) width_before = b - a;
        if (stalled || !(c > a && c < b)) c = 0.5 * (a + b);
        const double fc = g(c) - y;
        if (std::abs(fc) <= tol) return c;
        if (fc < 0.0) {
            a = c;
            fa = fc;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = c;
            fb = fc;
            if (side == +1) fa *= 0.5;
            side = +1;
        }
        if (b - a <= 4.0 * eps * std::max(std::abs(a), std::abs(b))) break;
    }
    return std::abs(g(a) - y) <= std::abs(g(b) - y) ? a : b;
}

/// Thomas algorithm. sub[i] couples row i+1 to column i, sup[i] couples row i
/// to column i+1. The rhs is overwritten with the solution; scratch is resized
/// as needed so a caller can reuse it across solves.
inline void solve_tridiagonal_inplace(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<double> rhs,
                                      std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    if (rhs.size() != n || (n > 0 && (sub.size() != n - 1 || sup.size() != n - 1)))
        throw DomainError("solve_tridiagonal: inconsistent lengths");
    if (n == 0) return;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    scratch.resize(n);
    auto check = [&](double pivot, std::size_t i) {
        const double scale = std::abs(diag[i]) + (i > 0 ? std::abs(sub[i - 1]) : 0.0) +
                             (i + 1 < n ? std::abs(sup[i]) : 0.0);
        if (!std::isfinite(pivot) || std::abs(pivot) <= eps * scale)
            throw ZeroPivot("vanishing pivot at row " + std::to_string(i));
    };
    double pivot = diag[0];
    check(pivot, 0);
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i - 1] * scratch[i];
        check(pivot, i);
        rhs[i] = (rhs[i] - sub[i - 1] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i > 0; --i) rhs[i - 1] -= scratch[i] * rhs[i];
}

inline std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                             std::span<const double> sup, std::span<const double> rhs) {
    std::vector<double> x(rhs.begin(), rhs.end());
    std::vector<double> scratch;
    solve_tridiagonal_inplace(sub, diag, sup, x, scratch);
    return x;
}

}  // namespace radheat
