#pragma once

// The radial supersolution
//     h(r) = int_r^inf I(s) / (f(s) + 1)^(N-1) ds,   I(s) = int_0^s rho (f + 1)^(N-1),
// of Delta h = -rho. Its derivatives are
//     h'  = -I / (f + 1)^(N-1)
//     h'' = -rho + (N-1) f' I / (f + 1)^N
// so that Delta h + rho = -(N-1) f' I / (f (f + 1)^N) <= 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radheat/error.hpp"
#include "radheat/geometry.hpp"
#include "radheat/numerics.hpp"

namespace radheat {

struct SupersolutionOptions {
    /// Outer end of the tabulated range of h.
    double R_max = 64.0;
    /// Table nodes per decade of r.
    int nodes_per_decade = 64;
    /// Relative accuracy of every quadrature.
    double rel_tol = 1e-10;
    ProbeOptions probe = {};
};

class Supersolution {
public:
    Supersolution(ModelManifold m, Density d, SupersolutionOptions opt = {})
        : manifold_(std::move(m)), density_(std::move(d)), opt_(opt), k_(manifold_.dimension() - 1) {
        if (!(opt_.R_max >= 1.0)) throw DomainError("supersolution needs R_max >= 1");
        if (opt_.nodes_per_decade < 4) throw DomainError("supersolution needs at least 4 nodes per decade");
        build_inner_table();
        decide_finiteness();
        if (finite_) build_h_table();
    }

    const ModelManifold& manifold() const { return manifold_; }
    const Density& density() const { return density_; }
    bool finite() const { return finite_; }
    const DivergenceVerdict& finiteness_verdict() const { return verdict_; }
    double R_max() const { return opt_.R_max; }
    /// Largest r at which g and I can be evaluated.
    double table_end() const { return nodes_.back(); }

    /// log(f + 1)
    double ell(double r) const {
        const double L = manifold_.log_f(r);
        if (L < 30.0) return std::log1p(std::exp(L));
        return L + std::log1p(std::exp(-L));
    }
    /// ell(a) - ell(b)
    double ell_diff(double a, double b) const {
        if (a == b) return 0.0;
        const double La = manifold_.log_f(a), Lb = manifold_.log_f(b);
        if (La < 30.0 || Lb < 30.0) return ell(a) - ell(b);
        return manifold_.log_f_ratio(a, b) + std::log1p(std::exp(-La)) - std::log1p(std::exp(-Lb));
    }
    /// f' / (f + 1)
    double ell_d1(double r) const {
        const double L = manifold_.log_f(r);
        if (L < 30.0) return manifold_.f1(r) / (manifold_.f(r) + 1.0);
        return manifold_.dlog_f(r) / (1.0 + std::exp(-L));
    }

    /// g(s) = I(s) / (f(s) + 1)^(N-1) = -h'(s).
    double g(double s) const {
        if (!(s >= 0.0)) throw DomainError("g needs s >= 0");
        if (s > table_end()) throw OutOfRange("g beyond table end " + std::to_string(table_end()));
        if (s == 0.0) return 0.0;
        const std::size_t j = node_below(s);
        return g_[j] * std::exp(k_ * ell_diff(nodes_[j], s)) + local_inner(nodes_[j], s);
    }
    /// log I(s)
    double log_inner(double s) const { return std::log(g(s)) + k_ * ell(s); }

    double h(double r) const {
        require_finite();
        if (!(r >= 0.0)) throw DomainError("h needs r >= 0");
        if (r > opt_.R_max) return tail_integral(r).first;
        std::size_t j = node_below(r);
        if (nodes_[j] == r) return h_[j];
        ++j;
        return h_[j] + integrate_g(r, nodes_[j]).value;
    }
    /// Accumulated quadrature and tail uncertainty of h at the table node
    /// nearest above r.
    double h_error(double r) const {
        require_finite();
        if (r > opt_.R_max) return tail_integral(r).second;
        std::size_t j = node_below(r);
        if (nodes_[j] != r) ++j;
        return h_err_[std::min(j, h_err_.size() - 1)];
    }
    double h1(double r) const {
        require_finite();
        return -g(r);
    }
    double h2(double r) const {
        require_finite();
        return -density_.value(r) + k_ * ell_d1(r) * g(r);
    }

    /// Tabulated (r, h) pairs on [0, R_max].
    std::vector<std::pair<double, double>> table() const {
        require_finite();
        std::vector<std::pair<double, double>> out;
        for (std::size_t j = 0; j < h_.size(); ++j) out.emplace_back(nodes_[j], h_[j]);
        return out;
    }

private:
    void require_finite() const {
        if (!finite_) throw NotFinite("int_r^inf g diverges: no finite supersolution");
    }

    std::size_t node_below(double s) const {
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
        return static_cast<std::size_t>(it - nodes_.begin()) - 1;
    }

    // Relative resolution of the inner weight near s: adjacent doubles differ
    // by a factor exp(rate ulp(s)) there.
    double noise_floor(double s) const {
        return 4.0 * k_ * ell_d1(s) * s * std::numeric_limits<double>::epsilon();
    }

    double weight(double xi, double s) const { return density_.value(xi) * std::exp(k_ * ell_diff(xi, s)); }

    // int_a^s rho(xi) exp((N-1)(ell(xi) - ell(s))) dxi, integrated in panels
    // that widen leftwards from s so a sharp peak at s is always resolved.
    double local_inner(double a, double s) const {
        if (s <= a) return 0.0;
        const double rate = k_ * ell_d1(s);
        double w = rate > 0.0 ? std::min(s - a, 1.0 / rate) : s - a;
        double sum = 0.0;
        double hi = s;
        auto f = [&](double xi) { return weight(xi, s); };
        while (true) {
            const double lo = std::max(a, hi - w);
            sum += integrate(f, lo, hi, 1e-300, std::max(opt_.rel_tol * 1e-2, noise_floor(s))).value;
            if (lo <= a) break;
            const double rho_sup = std::max(density_.value(a), density_.value(lo));
            const double bound = (lo - a) * rho_sup * std::exp(k_ * ell_diff(lo, s));
            if (bound < 1e-17 * sum) break;
            hi = lo;
            w *= 2.0;
        }
        return sum;
    }

    void build_inner_table() {
        // Keep every table cell resolvable: the decay scale 1/rate of the
        // inner weight must stay far above the rounding width of r.
        double end = std::ldexp(1.0, 27);
        while (end > 2.0 * opt_.R_max && k_ * ell_d1(end) * end > 1e11) end *= 0.5;
        end = std::max(end, 2.0 * opt_.R_max);
        const double lo = 1e-3;
        const auto n = static_cast<std::size_t>(std::ceil(std::log10(end / lo) * opt_.nodes_per_decade)) + 1;
        nodes_.push_back(0.0);
        for (double r : logspace(lo, end, n)) nodes_.push_back(r);
        g_.assign(nodes_.size(), 0.0);
        for (std::size_t j = 1; j < nodes_.size(); ++j)
            g_[j] = g_[j - 1] * std::exp(k_ * ell_diff(nodes_[j - 1], nodes_[j])) + local_inner(nodes_[j - 1], nodes_[j]);
    }

    void decide_finiteness() {
        ProbeOptions p = opt_.probe;
        const int reach = static_cast<int>(std::floor(std::log2(table_end()))) - 1;
        p.max_doublings = std::clamp(reach, 0, p.max_doublings);
        p.condense = false;
        p.panel_rel_tol = std::max(p.panel_rel_tol, noise_floor(table_end()));
        verdict_ = probe_divergence([this](double s) { return g(s); }, 1.0, p);
        finite_ = verdict_.kind == Verdict::Convergent;
    }

    QuadResult integrate_g(double a, double b) const {
        return integrate([this](double s) { return g(s); }, a, b, 1e-300, std::max(opt_.rel_tol, noise_floor(b)));
    }

    // int_a^inf g by doubling panels with a geometric extrapolation of the
    // remainder; returns (value, uncertainty).
    std::pair<double, double> tail_integral(double a) const {
        double acc = 0.0, err = 0.0;
        double prev_panel = 0.0, prev_estimate = 0.0;
        double x = a;
        for (int k = 0; k < 60 && 2.0 * x <= table_end(); ++k, x *= 2.0) {
            const QuadResult q = integrate_g(x, 2.0 * x);
            acc += q.value;
            err += q.err_est;
            if (q.value <= 1e-12 * acc) return {acc, err + q.value};
            if (k >= 1 && prev_panel > 0.0) {
                const double ratio = q.value / prev_panel;
                if (ratio < 1.0) {
                    const double estimate = acc + q.value * ratio / (1.0 - ratio);
                    const double change = std::abs(estimate - prev_estimate);
                    if (k >= 2 && change < 1e-10 * estimate) return {estimate, err + change};
                    prev_estimate = estimate;
                }
            }
            prev_panel = q.value;
        }
        if (prev_estimate > 0.0) return {prev_estimate, err + std::abs(prev_estimate - acc)};
        return {acc, err + acc};
    }

    void build_h_table() {
        std::size_t last = node_below(opt_.R_max);
        if (nodes_[last] < opt_.R_max) {
            nodes_.insert(nodes_.begin() + static_cast<std::ptrdiff_t>(last) + 1, opt_.R_max);
            ++last;
            g_.insert(g_.begin() + static_cast<std::ptrdiff_t>(last),
                      g_[last - 1] * std::exp(k_ * ell_diff(nodes_[last - 1], opt_.R_max)) +
                          local_inner(nodes_[last - 1], opt_.R_max));
        }
        h_.assign(last + 1, 0.0);
        h_err_.assign(last + 1, 0.0);
        const auto [tail, tail_err] = tail_integral(opt_.R_max);
        h_[last] = tail;
        h_err_[last] = tail_err;
        for (std::size_t j = last; j > 0; --j) {
            const QuadResult q = integrate_g(nodes_[j - 1], nodes_[j]);
            h_[j - 1] = h_[j] + q.value;
            h_err_[j - 1] = h_err_[j] + q.err_est;
        }
    }

    ModelManifold manifold_;
    Density density_;
    SupersolutionOptions opt_;
    int k_;
    bool finite_ = false;
    DivergenceVerdict verdict_;
    std::vector<double> nodes_;
    /// g at the nodes: the inner table I(s) in the stabilized form I / (f + 1)^(N-1).
    std::vector<double> g_;
    std::vector<double> h_;
    std::vector<double> h_err_;
};

inline Supersolution build_supersolution(const ModelManifold& m, const Density& d, const SupersolutionOptions& opt = {}) {
    return {m, d, opt};
}

struct SupersolutionDerivatives {
    double h1 = 0.0;
    double h2 = 0.0;
};

inline SupersolutionDerivatives supersolution_derivatives(const Supersolution& s, double r) {
    if (!(r > 0.0)) throw DomainError("supersolution_derivatives needs r > 0");
    return {s.h1(r), s.h2(r)};
}

struct SupersolutionReport {
    bool ok = true;
    double worst_residual = -std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
    bool limit_ok = false;
};

/// Delta h + rho = h'' + (N-1) f'/f h' + rho <= tol at every grid radius in
/// [0.05, max grid radius], and h(R) < 0.01 h(1) at that largest radius R.
inline SupersolutionReport verify_supersolution(const ModelManifold& m, const Density& d, const RadialProfile& h,
                                                std::span<const double> grid, double tol) {
    SupersolutionReport rep;
    double R = 0.0;
    for (double r : grid) {
        if (r < 0.05) continue;
        R = std::max(R, r);
        const double residual = h.d2(r) + drift_coefficient(m, r) * h.d1(r) + d.value(r);
        if (residual > rep.worst_residual) {
            rep.worst_residual = residual;
            rep.worst_r = r;
        }
        if (!(residual <= tol)) rep.ok = false;
    }
    if (R > 0.0) rep.limit_ok = h.value(R) < 0.01 * h.value(1.0);
    return rep;
}

inline SupersolutionReport verify_supersolution(const Supersolution& s, std::span<const double> grid, double tol) {
    if (!s.finite()) throw NotFinite("verify_supersolution on a divergent construction");
    RadialProfile p;
    p.value = [&s](double r) { return s.h(r); };
    p.d1 = [&s](double r) { return s.h1(r); };
    p.d2 = [&s](double r) { return s.h2(r); };
    return verify_supersolution(s.manifold(), s.density(), p, grid, tol);
}

}  // namespace radheat
