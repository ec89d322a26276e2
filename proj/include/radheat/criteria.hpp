#pragma once

// Integral uniqueness criteria for rho u_t = Delta u on model manifolds, the
// comparison weight phi on the conformal manifold, the dichotomy table for
// power densities, weighted norms, and the pointwise check of the Gaussian
// cutoff inequality d_t xi + lambda/2 |grad xi|^2 + Delta_omega xi <= 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radheat/conformal.hpp"
#include "radheat/error.hpp"
#include "radheat/geometry.hpp"
#include "radheat/numerics.hpp"
#include "radheat/trajectory.hpp"

namespace radheat {

enum class WeightKind { Power, LogSquare, Custom };

/// Growth weight psi of the uniqueness class L^p_{e^-psi}.
class WeightPsi {
public:
    /// psi(r) = r^exponent; exponent 2 - theta is the weight paired with
    /// rho = (1 + r^2)^(-theta/2), theta < 2.
    static WeightPsi power(double exponent) {
        if (!(exponent > 0.0)) throw DomainError("power weight needs a positive exponent");
        WeightPsi w;
        w.kind_ = WeightKind::Power;
        w.param_ = exponent;
        w.name_ = "r^" + std::to_string(exponent);
        w.value_ = [exponent](double r) { return std::pow(r, exponent); };
        w.d1_ = [exponent](double r) { return exponent * std::pow(r, exponent - 1.0); };
        return w;
    }
    /// psi(r) = log^2(r^sqrt(gamma)) = gamma log^2 r, the weight for theta = 2.
    static WeightPsi log_square(double gamma) {
        if (!(gamma > 1.0)) throw DomainError("log-square weight needs gamma > 1");
        WeightPsi w;
        w.kind_ = WeightKind::LogSquare;
        w.param_ = gamma;
        w.domain_start_ = 1.0;
        w.name_ = "log^2(r^sqrt(" + std::to_string(gamma) + "))";
        w.value_ = [gamma](double r) {
            const double l = std::log(r);
            return gamma * l * l;
        };
        w.d1_ = [gamma](double r) { return 2.0 * gamma * std::log(r) / r; };
        return w;
    }
    static WeightPsi custom(RadialProfile::Fn value, RadialProfile::Fn d1, std::string name,
                            double domain_start = 0.0) {
        WeightPsi w;
        w.kind_ = WeightKind::Custom;
        w.value_ = std::move(value);
        w.d1_ = std::move(d1);
        w.name_ = std::move(name);
        w.domain_start_ = domain_start;
        return w;
    }

    /// psi * r^q
    WeightPsi times_power(double q) const {
        auto v = value_;
        auto d = d1_;
        return custom([v, q](double r) { return v(r) * std::pow(r, q); },
                      [v, d, q](double r) { return d(r) * std::pow(r, q) + q * v(r) * std::pow(r, q - 1.0); },
                      name_ + " * r^" + std::to_string(q), domain_start_);
    }
    /// factor * psi
    WeightPsi scaled(double factor) const {
        auto v = value_;
        auto d = d1_;
        return custom([v, factor](double r) { return factor * v(r); },
                      [d, factor](double r) { return factor * d(r); }, name_, domain_start_);
    }

    WeightKind kind() const { return kind_; }
    double parameter() const { return param_; }
    const std::string& name() const { return name_; }
    /// psi is positive and increasing on (domain_start, inf).
    double domain_start() const { return domain_start_; }
    double value(double r) const { return value_(r); }
    double d1(double r) const { return d1_(r); }
    double operator()(double r) const { return value_(r); }

private:
    WeightPsi() = default;

    WeightKind kind_ = WeightKind::Custom;
    double param_ = 0.0;
    double domain_start_ = 0.0;
    std::string name_;
    RadialProfile::Fn value_;
    RadialProfile::Fn d1_;
};

/// Sampled check that psi is positive and nondecreasing at the given radii
/// (restricted to its domain).
inline bool weight_is_admissible(const WeightPsi& psi, std::span<const double> radii) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double r : radii) {
        if (!(r > psi.domain_start())) continue;
        const double v = psi.value(r);
        if (!(v > 0.0) || !std::isfinite(v) || v < prev) return false;
        prev = v;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Integral criteria

/// int_{R0}^inf r^(1-theta) / psi(r) dr = +inf, for theta in [0, 2).
inline DivergenceVerdict criterion_power(const WeightPsi& psi, double theta, double R0, const ProbeOptions& opt = {}) {
    if (!(theta >= 0.0 && theta < 2.0)) throw DomainError("criterion_power needs theta in [0, 2)");
    return probe_divergence([&psi, theta](double r) { return std::pow(r, 1.0 - theta) / psi.value(r); }, R0, opt);
}

/// int_{R0}^inf log r / (r psi(r)) dr = +inf, for R0 > 1.
inline DivergenceVerdict criterion_log(const WeightPsi& psi, double R0, const ProbeOptions& opt = {}) {
    if (!(R0 > 1.0)) throw DomainError("criterion_log needs R0 > 1");
    return probe_divergence([&psi](double r) { return std::log(r) / (r * psi.value(r)); }, R0, opt);
}

/// psi + log rho: the unclamped comparison weight on the original radius.
inline double switch_function(const WeightPsi& psi, const Density& d, double r) {
    return psi.value(r) + d.log_value(r);
}

/// R2 = min{ r >= R0 : psi(r) + log rho(r) >= 0 }.
///
/// Scans [R0, 1e4] with unit steps, bisects the first bracket down to 1e-10
/// keeping the nonnegative end, then extends the scan geometrically to 1e6.
inline double find_switch_radius(const WeightPsi& psi, const Density& d, double R0) {
    auto value = [&](double r) { return switch_function(psi, d, r); };
    if (value(R0) >= 0.0) return R0;
    auto bisect = [&](double a, double b) {
        while (b - a > 1e-10) {
            const double mid = 0.5 * (a + b);
            if (!(mid > a && mid < b)) break;
            (value(mid) >= 0.0 ? b : a) = mid;
        }
        return b;
    };
    double a = R0;
    for (double b = R0 + 1.0; b <= 1e4; a = b, b += 1.0)
        if (value(b) >= 0.0) return bisect(a, b);
    for (double b = 2.0 * a; b <= 1e6; a = b, b *= 2.0)
        if (value(b) >= 0.0) return bisect(a, b);
    if (value(1e6) >= 0.0) return bisect(a, 1e6);
    throw R2NotFound("psi + log rho stays negative on [" + std::to_string(R0) + ", 1e6]");
}

struct GeneralCriterionReport {
    DivergenceVerdict integral;
    bool monotone_ok = true;
    double worst_monotone_margin = std::numeric_limits<double>::infinity();
    double worst_monotone_r = 0.0;
};

/// Radial form of the general criterion with rho_1 = rho_2 = rho:
///   int_{R0}^inf r~(r) sqrt(rho(r)) / (psi(r) + log rho(r)) dr = +inf
/// together with psi' + rho'/rho >= 0, checked on 200 log-spaced radii in
/// [R0, 1e4 R0].
inline GeneralCriterionReport criterion_general(const WeightPsi& psi, const ConformalChange& c, double R0,
                                                const ProbeOptions& opt = {}) {
    const Density& d = c.density();
    if (switch_function(psi, d, R0) <= 0.0)
        throw SwitchRadiusNotReached(R0, find_switch_radius(psi, d, R0));
    GeneralCriterionReport rep;
    for (double r : logspace(R0, 1e4 * R0, 200)) {
        const double margin = psi.d1(r) + d.dlog(r);
        if (margin < rep.worst_monotone_margin) {
            rep.worst_monotone_margin = margin;
            rep.worst_monotone_r = r;
        }
        if (margin < -1e-12) rep.monotone_ok = false;
    }
    auto integrand = [&](double r) {
        const double denom = switch_function(psi, d, r);
        if (!(denom > 0.0)) throw SwitchRadiusNotReached(R0, find_switch_radius(psi, d, r));
        return c.tilde_radius(r) * d.sqrt_value(r) / denom;
    };
    rep.integral = probe_divergence(integrand, R0, opt);
    return rep;
}

// ---------------------------------------------------------------------------
// The comparison weight phi on the conformal manifold

/// phi(r~) = psi(r) + log rho(r) at r = r(r~) beyond the switch radius
/// r~(R2), and the constant phi(r~(R2)) below it.
class PhiFunction {
public:
    PhiFunction(WeightPsi psi, ConformalChange c, double R0)
        : psi_(std::move(psi)), conformal_(std::move(c)), R0_(R0) {
        R2_ = find_switch_radius(psi_, conformal_.density(), R0_);
        if (R2_ > conformal_.R_max()) throw R2NotFound("switch radius beyond the conformal table");
        tilde_R2_ = conformal_.tilde_radius(R2_);
        floor_ = switch_function(psi_, conformal_.density(), R2_);
        validate();
    }

    double R0() const { return R0_; }
    double R2() const { return R2_; }
    double tilde_R2() const { return tilde_R2_; }
    double floor_value() const { return floor_; }
    double max_tilde() const { return conformal_.max_tilde(); }
    const ConformalChange& conformal() const { return conformal_; }
    const WeightPsi& psi() const { return psi_; }

    double operator()(double tilde_r) const {
        if (tilde_r <= tilde_R2_) return floor_;
        const double r = conformal_.radius_from_tilde(tilde_r);
        return std::max(floor_, switch_function(psi_, conformal_.density(), r));
    }

private:
    void validate() const {
        double prev = -std::numeric_limits<double>::infinity();
        for (double t : linspace(0.0, conformal_.max_tilde(), 1000)) {
            const double r = t <= tilde_R2_ ? R2_ : conformal_.radius_from_tilde(t);
            const double v = t <= tilde_R2_ ? floor_ : switch_function(psi_, conformal_.density(), r);
            if (!(v >= -1e-9)) throw PhiConstructionError("phi negative at r~ = " + std::to_string(t));
            if (v < prev - 1e-9 * std::max(1.0, std::abs(prev)))
                throw PhiConstructionError("phi decreasing at r~ = " + std::to_string(t));
            prev = std::max(prev, v);
        }
    }

    WeightPsi psi_;
    ConformalChange conformal_;
    double R0_;
    double R2_ = 0.0;
    double tilde_R2_ = 0.0;
    double floor_ = 0.0;
};

inline PhiFunction build_phi(const WeightPsi& psi, const ConformalChange& c, double R0) { return {psi, c, R0}; }

/// int_{R0}^inf r / phi(r) dr = +inf for an arbitrary weight phi defined up to
/// max_r; the probe stops doubling before leaving that range.
template <class Phi>
DivergenceVerdict check_phi_condition(const Phi& phi, double R0, double max_r, ProbeOptions opt = {}) {
    if (std::isfinite(max_r)) {
        const int reach = static_cast<int>(std::floor(std::log2(max_r / R0))) - 1;
        opt.max_doublings = std::clamp(reach, 0, opt.max_doublings);
        opt.condense = false;
    }
    return probe_divergence([&phi](double r) { return r / phi(r); }, R0, opt);
}

inline DivergenceVerdict check_phi_condition(const PhiFunction& phi, double R0, const ProbeOptions& opt = {}) {
    const double start = std::max(R0, phi.tilde_R2() + 1.0);
    return check_phi_condition(phi, start, phi.max_tilde(), opt);
}

// ---------------------------------------------------------------------------
// Dichotomy for rho = (1 + r^2)^(-theta/2)

enum class Uniqueness { Unique, NonUnique, Indeterminate };

inline const char* to_string(Uniqueness u) {
    switch (u) {
        case Uniqueness::Unique: return "Unique";
        case Uniqueness::NonUnique: return "NonUnique";
        case Uniqueness::Indeterminate: return "Indeterminate";
    }
    return "?";
}

struct Classification {
    Uniqueness verdict = Uniqueness::Indeterminate;
    std::string reason;
};

/// Uniqueness of bounded solutions for the power density on the growth
/// families:
///   exponential f = e^(r^beta/(N-1)):  theta < 2 - beta unique, theta > 2 - beta not;
///   polynomial  f = r^(beta/(N-1)):    theta <= 2 unique,     theta > 2 not.
/// theta = 2 - beta is left undecided, except theta = 0 (beta = 2) where
/// rho == 1 and log V(r) ~ r^2 still gives stochastic completeness.
inline Classification classify(WarpingKind family, double beta, double theta) {
    if (!(theta >= 0.0)) throw DomainError("classify needs theta >= 0");
    constexpr double tie = 1e-12;
    switch (family) {
        case WarpingKind::ExponentialGrowth: {
            if (!(beta > 0.0 && beta <= 2.0)) throw DomainError("exponential family needs beta in (0, 2]");
            const double edge = 2.0 - beta;
            if (std::abs(theta - edge) <= tie) {
                if (theta <= tie)
                    return {Uniqueness::Unique, "rho == 1 on log V ~ r^2: int r / log V(r) dr = inf"};
                return {Uniqueness::Indeterminate, "theta = 2 - beta is the boundary of both regimes"};
            }
            if (theta < edge) return {Uniqueness::Unique, "theta in [0, 2 - beta): power weight r^(2-theta)"};
            return {Uniqueness::NonUnique, "theta > 2 - beta: finite supersolution of Delta h = -rho"};
        }
        case WarpingKind::PolynomialGrowth: {
            if (!(beta > 0.0)) throw DomainError("polynomial family needs beta > 0");
            if (theta < 2.0 - tie) return {Uniqueness::Unique, "theta in [0, 2): power weight r^(2-theta)"};
            if (theta <= 2.0 + tie) return {Uniqueness::Unique, "theta = 2: log-square weight"};
            return {Uniqueness::NonUnique, "theta > 2: finite supersolution of Delta h = -rho"};
        }
        default: throw DomainError(std::string("classify covers only the growth families, got ") + to_string(family));
    }
}

// ---------------------------------------------------------------------------

/// c_N sum_n sum_i |u|^p e^(-psi(r_i)) f(r_i)^(N-1) dr dt over nodes r_i <=
/// R_trunc, trapezoid in both variables.
inline double weighted_norm(const FieldTrajectory& u, const WeightPsi& psi, double p, const ModelManifold& m,
                            double R_trunc) {
    if (!(p >= 1.0)) throw DomainError("weighted_norm needs p >= 1");
    if (u.radii.empty() || u.times.empty()) return 0.0;
    const int k = m.dimension() - 1;
    std::size_t n_r = 0;
    while (n_r < u.radii.size() && u.radii[n_r] <= R_trunc * (1.0 + 1e-12)) ++n_r;
    if (n_r < 2) return 0.0;

    std::vector<double> radial_weight(n_r);
    for (std::size_t i = 0; i < n_r; ++i) {
        const double r = u.radii[i];
        const double w = i == 0 || i + 1 == n_r ? 0.5 : 1.0;
        const double dr = i + 1 < n_r ? u.radii[i + 1] - u.radii[i] : u.radii[i] - u.radii[i - 1];
        radial_weight[i] = r > 0.0 ? w * dr * std::exp(k * m.log_f(r) - psi.value(r)) : 0.0;
    }
    auto spatial = [&](std::size_t n) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_r; ++i) s += std::pow(std::abs(u.values[n][i]), p) * radial_weight[i];
        return s;
    };
    double total = 0.0;
    if (u.times.size() == 1) return m.sphere_area_constant() * spatial(0);
    for (std::size_t n = 0; n + 1 < u.times.size(); ++n)
        total += 0.5 * (u.times[n + 1] - u.times[n]) * (spatial(n) + spatial(n + 1));
    return m.sphere_area_constant() * total;
}

// ---------------------------------------------------------------------------
// Cutoff inequality

struct CutoffParams {
    double R = 1.0;
    double tau = 0.5;
    double delta = 0.1;
    double lambda = 6.0;
    double alpha = 10.0;

    /// lambda / (1 - 4 delta), the smallest alpha for which the inequality is claimed.
    double alpha_threshold() const { return lambda / (1.0 - 4.0 * delta); }
};

struct CutoffReport {
    bool holds = true;
    /// alpha >= lambda / (1 - 4 delta)
    bool asserted = false;
    double worst_value = -std::numeric_limits<double>::infinity();
    std::pair<double, double> worst_point{0.0, 0.0};  ///< (r~, t)
};

/// Left side of the cutoff inequality for xi = -[r~ - R]_+^2 / (2 alpha (tau + delta - t))
/// on the conformal manifold with omega = log(1/rho):
///   d_t xi + lambda/2 xi_r^2 + xi_rr + (Delta~ r~ - omega'(r)/sqrt(rho)) xi_r.
inline double cutoff_expression(const ConformalChange& c, const CutoffParams& p, double tilde_r, double t) {
    if (tilde_r <= p.R) return 0.0;
    const double x = tilde_r - p.R;
    const double D = p.tau + p.delta - t;
    const double ad = p.alpha * D;
    const double xi_t = -x * x / (2.0 * ad * D);
    const double xi_r = -x / ad;
    const double xi_rr = -1.0 / ad;
    const double r = c.radius_from_tilde(tilde_r);
    const double drift = tilde_laplacian_of_tilde_r(c, r) - c.omega_d1(r) / c.density().sqrt_value(r);
    return xi_t + 0.5 * p.lambda * xi_r * xi_r + xi_rr + drift * xi_r;
}

inline CutoffReport verify_cutoff_inequality(const ConformalChange& c, const CutoffParams& p,
                                             std::span<const double> tilde_radii, std::span<const double> times) {
    if (!(p.delta > 0.0 && p.delta < std::min(p.tau, 0.25)))
        throw ParamViolation("cutoff needs delta in (0, min(tau, 1/4))");
    CutoffReport rep;
    rep.asserted = p.alpha >= p.alpha_threshold() * (1.0 - 1e-14);
    for (double t : times) {
        if (!(t > p.tau - p.delta && t <= p.tau)) continue;
        for (double tr : tilde_radii) {
            const double v = cutoff_expression(c, p, tr, t);
            if (v > rep.worst_value) {
                rep.worst_value = v;
                rep.worst_point = {tr, t};
            }
            if (v > 1e-9) rep.holds = false;
        }
    }
    return rep;
}

}  // namespace radheat
