#pragma once

#include <cstddef>
#include <vector>

namespace radheat {

/// Radial space-time grid function u(r_i, t_n) with its time average
/// v(r_i) = int_0^T u(r_i, t) dt.
struct FieldTrajectory {
    std::vector<double> radii;
    std::vector<double> times;
    /// values[n][i] = u(radii[i], times[n])
    std::vector<std::vector<double>> values;
    std::vector<double> time_average;
    /// Extremes of u over every time step, not only the stored snapshots.
    double u_min = 0.0;
    double u_max = 0.0;
    /// Some node with r >= 1 has |m(r)| dr > 1.
    bool peclet_warning = false;

    double dr() const { return radii.size() > 1 ? radii[1] - radii[0] : 0.0; }
    const std::vector<double>& final_values() const { return values.back(); }
};

}  // namespace radheat
