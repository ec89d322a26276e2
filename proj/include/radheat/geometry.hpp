#pragma once

// Rotationally symmetric model manifolds g = dr^2 + f(r)^2 dtheta^2, radial
// densities, and the radial Laplace-Beltrami operator
//     Delta u = u'' + (N - 1) f'/f u'.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radheat/error.hpp"
#include "radheat/numerics.hpp"
#include "radheat/profile.hpp"

namespace radheat {

enum class WarpingKind { Euclidean, Hyperbolic, ExponentialGrowth, PolynomialGrowth, Custom };

inline const char* to_string(WarpingKind k) {
    switch (k) {
        case WarpingKind::Euclidean: return "euclidean";
        case WarpingKind::Hyperbolic: return "hyperbolic";
        case WarpingKind::ExponentialGrowth: return "exponential";
        case WarpingKind::PolynomialGrowth: return "polynomial";
        case WarpingKind::Custom: return "custom";
    }
    return "?";
}

/// Family of warping functions.
///
///   Euclidean           f = r
///   Hyperbolic(c)       f = sinh(sqrt(c) r) / sqrt(c)
///   ExponentialGrowth   f = exp(r^beta / (N-1)),  beta in (0, 2]
///   PolynomialGrowth    f = r^(beta / (N-1)),     beta > 0
///
/// The two growth families are not poles at r = 0 (f(0) != 0 or f'(0) != 1),
/// so their profile is f = r on [0, blend_inner], the family formula on
/// [blend_outer, inf) and the cubic Hermite interpolant of the two in between.
struct WarpingFamily {
    WarpingKind kind = WarpingKind::Euclidean;
    double curvature = 1.0;
    double beta = 1.0;
    RadialProfile custom;
    double blend_inner = 0.5;
    double blend_outer = 1.0;

    static WarpingFamily euclidean() { return {}; }
    static WarpingFamily hyperbolic(double c = 1.0) {
        WarpingFamily w;
        w.kind = WarpingKind::Hyperbolic;
        w.curvature = c;
        return w;
    }
    static WarpingFamily exponential(double beta) {
        WarpingFamily w;
        w.kind = WarpingKind::ExponentialGrowth;
        w.beta = beta;
        return w;
    }
    static WarpingFamily polynomial(double beta) {
        WarpingFamily w;
        w.kind = WarpingKind::PolynomialGrowth;
        w.beta = beta;
        return w;
    }
    static WarpingFamily from_profile(RadialProfile p) {
        WarpingFamily w;
        w.kind = WarpingKind::Custom;
        w.custom = std::move(p);
        return w;
    }

    bool needs_blend() const {
        return kind == WarpingKind::ExponentialGrowth || kind == WarpingKind::PolynomialGrowth;
    }

    /// The family formula without the blend near the origin.
    RadialProfile pure_profile(int N) const;
    /// The profile actually used by a model manifold.
    RadialProfile profile(int N) const;
};

inline RadialProfile WarpingFamily::pure_profile(int N) const {
    RadialProfile p;
    switch (kind) {
        case WarpingKind::Euclidean:
            p.value = [](double r) { return r; };
            p.d1 = [](double) { return 1.0; };
            p.d2 = [](double) { return 0.0; };
            p.log_value = [](double r) { return std::log(r); };
            p.log_d1 = [](double r) { return 1.0 / r; };
            break;
        case WarpingKind::Hyperbolic: {
            if (!(curvature > 0.0)) throw DomainError("hyperbolic warping needs c > 0");
            const double k = std::sqrt(curvature);
            p.value = [k](double r) { return std::sinh(k * r) / k; };
            p.d1 = [k](double r) { return std::cosh(k * r); };
            p.d2 = [k](double r) { return k * std::sinh(k * r); };
            p.log_value = [k](double r) {
                const double x = k * r;
                if (x < 20.0) return std::log(std::sinh(x) / k);
                return x - std::log(2.0 * k) + std::log1p(-std::exp(-2.0 * x));
            };
            p.log_d1 = [k](double r) { return k / std::tanh(k * r); };
            break;
        }
        case WarpingKind::ExponentialGrowth: {
            if (!(beta > 0.0 && beta <= 2.0)) throw DomainError("exponential warping needs beta in (0, 2]");
            const double b = beta;
            const double s = 1.0 / (N - 1);
            auto rate = [b, s](double r) { return s * b * std::pow(r, b - 1.0); };
            p.log_value = [b, s](double r) { return s * std::pow(r, b); };
            p.log_d1 = rate;
            p.value = [b, s](double r) { return std::exp(s * std::pow(r, b)); };
            p.d1 = [b, s, rate](double r) { return rate(r) * std::exp(s * std::pow(r, b)); };
            p.d2 = [b, s, rate](double r) {
                const double q = rate(r);
                return (q * q + s * b * (b - 1.0) * std::pow(r, b - 2.0)) * std::exp(s * std::pow(r, b));
            };
            break;
        }
        case WarpingKind::PolynomialGrowth: {
            if (!(beta > 0.0)) throw DomainError("polynomial warping needs beta > 0");
            const double a = beta / (N - 1);
            p.value = [a](double r) { return std::pow(r, a); };
            p.d1 = [a](double r) { return a * std::pow(r, a - 1.0); };
            p.d2 = [a](double r) { return a * (a - 1.0) * std::pow(r, a - 2.0); };
            p.log_value = [a](double r) { return a * std::log(r); };
            p.log_d1 = [a](double r) { return a / r; };
            break;
        }
        case WarpingKind::Custom:
            p = custom;
            break;
    }
    return p;
}

inline RadialProfile WarpingFamily::profile(int N) const {
    RadialProfile pure = pure_profile(N);
    if (!needs_blend()) return pure;
    if (!(blend_inner > 0.0 && blend_outer > blend_inner))
        throw DomainError("blend needs 0 < blend_inner < blend_outer");

    const double r0 = blend_inner, r1 = blend_outer, h = r1 - r0;
    const double p0 = r0, m0 = 1.0;
    const double p1 = pure.value(r1), m1 = pure.d1(r1);
    struct Hermite {
        double r0, h, p0, m0, p1, m1;
        double t(double r) const { return (r - r0) / h; }
        double value(double r) const {
            const double x = t(r), x2 = x * x, x3 = x2 * x;
            return (2 * x3 - 3 * x2 + 1) * p0 + (x3 - 2 * x2 + x) * h * m0 + (-2 * x3 + 3 * x2) * p1 +
                   (x3 - x2) * h * m1;
        }
        double d1(double r) const {
            const double x = t(r), x2 = x * x;
            return ((6 * x2 - 6 * x) * p0 + (-6 * x2 + 6 * x) * p1) / h + (3 * x2 - 4 * x + 1) * m0 +
                   (3 * x2 - 2 * x) * m1;
        }
        double d2(double r) const {
            const double x = t(r);
            return ((12 * x - 6) * p0 + (-12 * x + 6) * p1) / (h * h) + ((6 * x - 4) * m0 + (6 * x - 2) * m1) / h;
        }
    };
    const Hermite cubic{r0, h, p0, m0, p1, m1};

    RadialProfile p;
    p.value = [=](double r) { return r <= r0 ? r : (r < r1 ? cubic.value(r) : pure.value(r)); };
    p.d1 = [=](double r) { return r <= r0 ? 1.0 : (r < r1 ? cubic.d1(r) : pure.d1(r)); };
    p.d2 = [=](double r) { return r <= r0 ? 0.0 : (r < r1 ? cubic.d2(r) : pure.d2(r)); };
    p.log_value = [=](double r) {
        return r <= r0 ? std::log(r) : (r < r1 ? std::log(cubic.value(r)) : pure.log_at(r));
    };
    p.log_d1 = [=](double r) {
        return r <= r0 ? 1.0 / r : (r < r1 ? cubic.d1(r) / cubic.value(r) : pure.dlog_at(r));
    };
    return p;
}

/// Area of the unit (N-1)-sphere, 2 pi^(N/2) / Gamma(N/2).
inline double sphere_area(int N) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

class ModelManifold {
public:
    ModelManifold(WarpingFamily family, int N, bool blended = true)
        : family_(std::move(family)), N_(N), blended_(blended) {
        if (N < 2) throw DomainError("model manifold needs dimension N >= 2, got " + std::to_string(N));
        warp_ = blended ? family_.profile(N) : family_.pure_profile(N);
        area_ = sphere_area(N);
    }

    int dimension() const { return N_; }
    const WarpingFamily& family() const { return family_; }
    const RadialProfile& warp() const { return warp_; }
    double sphere_area_constant() const { return area_; }

    double f(double r) const { return warp_.value(r); }
    double f1(double r) const { return warp_.d1(r); }
    double f2(double r) const { return warp_.d2(r); }
    double log_f(double r) const { return warp_.log_at(r); }
    /// f'/f, finite even where f overflows.
    double dlog_f(double r) const { return warp_.dlog_at(r); }

    /// log f(a) - log f(b), without cancellation for the exponential family.
    double log_f_ratio(double a, double b) const {
        const bool pure = !blended_ || std::min(a, b) >= family_.blend_outer;
        if (family_.kind == WarpingKind::ExponentialGrowth && pure && a > 0.0 && b > 0.0) {
            const double beta = family_.beta;
            return std::pow(b, beta) * std::expm1(beta * std::log1p((a - b) / b)) / (N_ - 1);
        }
        return log_f(a) - log_f(b);
    }

private:
    WarpingFamily family_;
    int N_;
    bool blended_;
    RadialProfile warp_;
    double area_;
};

enum class DensityKind { Power, Custom };

/// Positive radial density. Power(c, theta) is rho = c (1 + r^2)^(-theta/2),
/// evaluated through log rho so that huge r neither overflows nor underflows
/// prematurely.
class Density {
public:
    static Density power(double c, double theta) {
        if (!(c > 0.0)) throw DomainError("power density needs c > 0");
        if (!(theta >= 0.0)) throw DomainError("power density needs theta >= 0");
        Density d;
        d.kind_ = DensityKind::Power;
        d.c_ = c;
        d.theta_ = theta;
        return d;
    }
    static Density unit() { return power(1.0, 0.0); }
    static Density from_profile(RadialProfile p) {
        Density d;
        d.kind_ = DensityKind::Custom;
        d.custom_ = std::move(p);
        return d;
    }

    DensityKind kind() const { return kind_; }
    double c() const { return c_; }
    double theta() const { return theta_; }

    double log_value(double r) const {
        if (kind_ == DensityKind::Custom) return custom_.log_at(r);
        return std::log(c_) - 0.5 * theta_ * log1p_square(r);
    }
    double value(double r) const {
        if (kind_ == DensityKind::Custom) return custom_.value(r);
        return std::exp(log_value(r));
    }
    /// rho'/rho
    double dlog(double r) const {
        if (kind_ == DensityKind::Custom) return custom_.dlog_at(r);
        if (r == 0.0) return 0.0;
        return -theta_ / (r + 1.0 / r);
    }
    double d1(double r) const {
        if (kind_ == DensityKind::Custom) return custom_.d1(r);
        return value(r) * dlog(r);
    }
    double d2(double r) const {
        if (kind_ == DensityKind::Custom) return custom_.d2(r);
        const double q = dlog(r);
        const double s = 1.0 + r * r;
        return value(r) * (q * q - theta_ * (1.0 - r * r) / (s * s));
    }
    double sqrt_value(double r) const {
        if (kind_ == DensityKind::Custom) return std::sqrt(custom_.value(r));
        return std::exp(0.5 * log_value(r));
    }

private:
    Density() = default;
    static double log1p_square(double r) {
        if (r < 1e150) return std::log1p(r * r);
        return 2.0 * std::log(r);
    }

    DensityKind kind_ = DensityKind::Power;
    double c_ = 1.0;
    double theta_ = 0.0;
    RadialProfile custom_;
};

// ---------------------------------------------------------------------------
// Operations

/// Delta r = (N - 1) f'/f.
inline double drift_coefficient(const ModelManifold& m, double r) {
    if (!(r > 0.0)) throw DomainError("drift_coefficient needs r > 0");
    return (m.dimension() - 1) * m.dlog_f(r);
}

/// V(o, r) = c_N int_0^r f^(N-1).
inline double volume(const ModelManifold& m, double r, double rel_tol = 1e-12) {
    if (!(r >= 0.0)) throw DomainError("volume needs r >= 0");
    const int k = m.dimension() - 1;
    auto integrand = [&m, k](double t) { return t == 0.0 ? 0.0 : std::pow(m.f(t), k); };
    return m.sphere_area_constant() * integrate(integrand, 0.0, r, 1e-300, rel_tol).value;
}

/// sec_rad = -f''/f.
inline double radial_sectional(const ModelManifold& m, double r) {
    if (!(r > 0.0)) throw DomainError("radial_sectional needs r > 0");
    return -m.f2(r) / m.f(r);
}

/// Nodes r_i = i dr, i = 0..n-1.
struct RadialGrid {
    double dr = 0.0;
    std::size_t nodes = 0;

    static RadialGrid covering(double R, double dr) {
        const double n = R / dr;
        const auto k = static_cast<std::size_t>(std::llround(n));
        if (std::abs(n - static_cast<double>(k)) > 1e-9 * std::max(1.0, n))
            throw DomainError("dr does not divide R");
        return {dr, k + 1};
    }
    double r(std::size_t i) const { return dr * static_cast<double>(i); }
    double radius() const { return r(nodes - 1); }
};

/// Radial Laplacian on a uniform grid starting at r = 0.
///
/// Interior nodes use centered second and first differences. The origin uses
/// the regularity limit Delta u(0) = N u''(0) with u'(0) = 0, i.e.
/// 2 N (u_1 - u_0) / dr^2. The outermost node uses second-order one-sided
/// differences (first order when only three nodes exist).
inline std::vector<double> apply_laplacian(const ModelManifold& m, std::span<const double> u, double dr) {
    const std::size_t n = u.size();
    if (n < 3) throw GridTooSmall("apply_laplacian needs at least 3 nodes, got " + std::to_string(n));
    if (!(dr > 0.0)) throw DomainError("apply_laplacian needs dr > 0");
    const double inv2 = 1.0 / (dr * dr);
    std::vector<double> out(n);
    out[0] = 2.0 * m.dimension() * (u[1] - u[0]) * inv2;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double r = dr * static_cast<double>(i);
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv2 +
                 drift_coefficient(m, r) * (u[i + 1] - u[i - 1]) / (2.0 * dr);
    }
    const std::size_t l = n - 1;
    const double rl = dr * static_cast<double>(l);
    double second, first;
    if (n >= 4) {
        second = (2.0 * u[l] - 5.0 * u[l - 1] + 4.0 * u[l - 2] - u[l - 3]) * inv2;
        first = (3.0 * u[l] - 4.0 * u[l - 1] + u[l - 2]) / (2.0 * dr);
    } else {
        second = (u[l] - 2.0 * u[l - 1] + u[l - 2]) * inv2;
        first = (u[l] - u[l - 1]) / dr;
    }
    out[l] = second + drift_coefficient(m, rl) * first;
    return out;
}

struct LaplacianComparisonReport {
    bool hypothesis_holds = true;  ///< sec_rad <= -h''/h at every sample
    bool conclusion_holds = true;  ///< Delta r >= (N-1) h'/h at every sample
    bool holds = true;             ///< both of the above
    double worst_hypothesis_margin = std::numeric_limits<double>::infinity();
    double worst_hypothesis_r = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;

    /// The comparison theorem itself: hypothesis implies conclusion.
    bool implication_ok() const { return !hypothesis_holds || conclusion_holds; }
};

namespace detail {
inline bool margin_ok(double margin, double scale) { return margin >= -1e-12 * std::max(1.0, std::abs(scale)); }
}  // namespace detail

/// Pointwise check of the Laplacian comparison on radial samples: if
/// sec_rad <= -h''/h then Delta r >= (N-1) h'/h, for h with h(0) = 0, h'(0) = 1.
inline LaplacianComparisonReport check_laplacian_comparison(const ModelManifold& m, const RadialProfile& h,
                                                            std::span<const double> radii) {
    if (std::abs(h.value(0.0)) > 1e-12 || std::abs(h.d1(0.0) - 1.0) > 1e-9)
        throw ClassAViolation("comparison profile needs h(0) = 0 and h'(0) = 1");
    LaplacianComparisonReport rep;
    const int k = m.dimension() - 1;
    for (double r : radii) {
        if (!(r > 0.0)) continue;
        const double hv = h.value(r);
        if (!(hv > 0.0)) throw ClassAViolation("comparison profile not positive at r = " + std::to_string(r));
        const double bound = -h.d2(r) / hv;
        const double sec = radial_sectional(m, r);
        const double hyp = bound - sec;
        if (hyp < rep.worst_hypothesis_margin) {
            rep.worst_hypothesis_margin = hyp;
            rep.worst_hypothesis_r = r;
        }
        if (!detail::margin_ok(hyp, bound)) rep.hypothesis_holds = false;

        const double lap = drift_coefficient(m, r);
        const double rhs = k * h.d1(r) / hv;
        const double concl = lap - rhs;
        if (concl < rep.worst_margin) {
            rep.worst_margin = concl;
            rep.worst_r = r;
        }
        if (!detail::margin_ok(concl, rhs)) rep.conclusion_holds = false;
    }
    rep.holds = rep.hypothesis_holds && rep.conclusion_holds;
    return rep;
}

struct MarginReport {
    bool holds = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
};

/// Delta r >= -(N-1)/2 rho'/rho at every sample.
inline MarginReport check_delta_r_condition(const ModelManifold& m, const Density& d, std::span<const double> radii) {
    MarginReport rep;
    const double half = 0.5 * (m.dimension() - 1);
    for (double r : radii) {
        if (!(r > 0.0)) continue;
        const double margin = drift_coefficient(m, r) + half * d.dlog(r);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_r = r;
        }
        if (margin < -1e-12) rep.holds = false;
    }
    return rep;
}

/// n points spaced evenly on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

/// n points spaced evenly in log r on [lo, hi], lo > 0.
inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? lo : std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    if (n > 1) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

}  // namespace radheat
