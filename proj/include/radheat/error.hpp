#pragma once

#include <stdexcept>
#include <string>

namespace radheat {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define RADHEAT_DEFINE_ERROR(Name)              \
    class Name : public error {                 \
    public:                                     \
        explicit Name(const std::string& what)  \
            : error(#Name ": " + what) {}       \
    }

// numerics
RADHEAT_DEFINE_ERROR(NonFinite);
RADHEAT_DEFINE_ERROR(NoConvergence);
RADHEAT_DEFINE_ERROR(BracketInvalid);
RADHEAT_DEFINE_ERROR(ZeroPivot);

// geometry / conformal
RADHEAT_DEFINE_ERROR(DomainError);
RADHEAT_DEFINE_ERROR(GridTooSmall);
RADHEAT_DEFINE_ERROR(ClassAViolation);
RADHEAT_DEFINE_ERROR(OutOfRange);

// criteria
RADHEAT_DEFINE_ERROR(R2NotFound);
RADHEAT_DEFINE_ERROR(ParamViolation);
RADHEAT_DEFINE_ERROR(PhiConstructionError);

// witness / solver
RADHEAT_DEFINE_ERROR(NotFinite);
RADHEAT_DEFINE_ERROR(SolveFailure);
RADHEAT_DEFINE_ERROR(MaxPrincipleViolated);

#undef RADHEAT_DEFINE_ERROR

/// Raised when the weight psi + log rho has not turned positive at the
/// requested start radius; carries the radius where it does.
class SwitchRadiusNotReached : public error {
public:
    SwitchRadiusNotReached(double start, double needed)
        : error("SwitchRadiusNotReached: psi + log rho <= 0 at R0 = " + std::to_string(start) +
                ", needs R0 >= " + std::to_string(needed)),
          needed_radius(needed) {}
    double needed_radius;
};

}  // namespace radheat
