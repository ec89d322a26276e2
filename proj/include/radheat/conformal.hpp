#pragma once

// Conformal change g~ = rho g with measure rho dmu. On a model manifold the
// distance from the pole becomes r~(r) = int_0^r sqrt(rho), and the weighted
// Laplacian is (1/rho) Delta.

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

struct ConformalOptions {
    double R_max = 1e6;
    std::size_t table_nodes = 4096;
};

class ConformalChange {
public:
    ConformalChange(ModelManifold m, Density d, ConformalOptions opt = {})
        : manifold_(std::move(m)), density_(std::move(d)), opt_(opt) {
        if (!(opt_.R_max > 1e-6) || opt_.table_nodes < 2) throw DomainError("conformal table needs R_max > 1e-6");
        radii_.reserve(opt_.table_nodes + 1);
        radii_.push_back(0.0);
        for (double r : logspace(1e-6, opt_.R_max, opt_.table_nodes)) radii_.push_back(r);
        cumulative_.assign(radii_.size(), 0.0);
        for (std::size_t j = 1; j < radii_.size(); ++j)
            cumulative_[j] = cumulative_[j - 1] + cell_integral(radii_[j - 1], radii_[j]);
    }

    const ModelManifold& manifold() const { return manifold_; }
    const Density& density() const { return density_; }
    double R_max() const { return opt_.R_max; }
    /// r~(R_max): largest tilde radius the inverse map accepts.
    double max_tilde() const { return cumulative_.back(); }

    double tilde_radius(double r) const {
        if (!(r >= 0.0)) throw DomainError("tilde_radius needs r >= 0");
        if (r <= opt_.R_max) {
            const auto j = static_cast<std::size_t>(std::upper_bound(radii_.begin(), radii_.end(), r) - radii_.begin()) - 1;
            return cumulative_[j] + cell_integral(radii_[j], r);
        }
        double acc = cumulative_.back();
        for (double a = opt_.R_max; a < r; a *= 2.0) acc += cell_integral(a, std::min(2.0 * a, r));
        return acc;
    }

    double radius_from_tilde(double t) const {
        if (!(t >= 0.0)) throw DomainError("radius_from_tilde needs r~ >= 0");
        if (t > cumulative_.back())
            throw OutOfRange("r~ = " + std::to_string(t) + " beyond table end " + std::to_string(cumulative_.back()));
        const auto j = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), t) -
                                                cumulative_.begin()) - 1;
        if (j + 1 >= radii_.size()) return radii_.back();
        const double lo = radii_[j], hi = radii_[j + 1];
        const double base = cumulative_[j];
        auto local = [&](double r) { return base + cell_integral(lo, r); };
        return invert_monotone(local, t, lo, hi, 1e-13 * std::max(1.0, t));
    }

    /// omega = log(1/rho)
    double omega(double r) const { return -density_.log_value(r); }
    double omega_d1(double r) const { return -density_.dlog(r); }
    RadialProfile omega_profile() const {
        const Density d = density_;
        RadialProfile p;
        p.value = [d](double r) { return -d.log_value(r); };
        p.d1 = [d](double r) { return -d.dlog(r); };
        p.d2 = [d](double r) {
            const double q = d.dlog(r);
            return -(d.d2(r) / d.value(r) - q * q);
        };
        return p;
    }

private:
    double cell_integral(double a, double b) const {
        if (b <= a) return 0.0;
        auto root = [this](double s) { return density_.sqrt_value(s); };
        return integrate(root, a, b, 1e-300, 1e-13).value;
    }

    ModelManifold manifold_;
    Density density_;
    ConformalOptions opt_;
    std::vector<double> radii_;
    std::vector<double> cumulative_;
};

/// Radial completeness of g~: does int_1^inf sqrt(rho) diverge?
inline DivergenceVerdict check_completeness(const ConformalChange& c, const ProbeOptions& opt = {}) {
    const Density& d = c.density();
    return probe_divergence([&d](double r) { return d.sqrt_value(r); }, 1.0, opt);
}

/// (1/rho) Delta u on the uniform grid r_i = i dr.
inline std::vector<double> weighted_laplacian(const ConformalChange& c, std::span<const double> u, double dr) {
    std::vector<double> out = apply_laplacian(c.manifold(), u, dr);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= c.density().value(dr * static_cast<double>(i));
    return out;
}

/// Delta~ r~ = (Delta r + (N-1)/2 rho'/rho) / sqrt(rho).
inline double tilde_laplacian_of_tilde_r(const ConformalChange& c, double r) {
    if (!(r > 0.0)) throw DomainError("tilde_laplacian_of_tilde_r needs r > 0");
    const int k = c.manifold().dimension() - 1;
    return (drift_coefficient(c.manifold(), r) + 0.5 * k * c.density().dlog(r)) / c.density().sqrt_value(r);
}

struct AssumptionHReport {
    bool pole_ok = true;
    bool delta_ok = true;
    bool omega_growth_ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
    double omega_bound = 0.0;

    bool all() const { return pole_ok && delta_ok && omega_growth_ok; }
};

/// Assumption (H) on the conformal manifold: a pole (true for every model
/// manifold), Delta~ r~ >= 0, and |omega'(r)| / r bounded for r > 1 by twice
/// its maximum over (1, 2].
inline AssumptionHReport check_assumption_H(const ConformalChange& c, std::span<const double> radii) {
    AssumptionHReport rep;
    double ref = 0.0;
    for (double r : linspace(1.0 + 1e-3, 2.0, 101)) ref = std::max(ref, std::abs(c.omega_d1(r)) / r);
    rep.omega_bound = 2.0 * ref;
    for (double r : radii) {
        if (!(r > 0.0)) continue;
        const double margin = tilde_laplacian_of_tilde_r(c, r);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_r = r;
        }
        if (margin < -1e-12) rep.delta_ok = false;
        if (r > 1.0 && std::abs(c.omega_d1(r)) / r > rep.omega_bound + 1e-15) rep.omega_growth_ok = false;
    }
    return rep;
}

}  // namespace radheat
