#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace radheat {

/// A smooth function of r >= 0 with its first two derivatives.
///
/// log_value / log_d1 are optional closed forms of log f and f'/f. Profiles
/// that grow like exponentials should provide them so that f'/f and log f
/// stay finite where f itself overflows.
struct RadialProfile {
    using Fn = std::function<double(double)>;

    Fn value;
    Fn d1;
    Fn d2;
    Fn log_value;
    Fn log_d1;

    double operator()(double r) const { return value(r); }
    double log_at(double r) const { return log_value ? log_value(r) : std::log(value(r)); }
    double dlog_at(double r) const { return log_d1 ? log_d1(r) : d1(r) / value(r); }
};

inline RadialProfile make_profile(RadialProfile::Fn value, RadialProfile::Fn d1, RadialProfile::Fn d2) {
    RadialProfile p;
    p.value = std::move(value);
    p.d1 = std::move(d1);
    p.d2 = std::move(d2);
    return p;
}

}  // namespace radheat
