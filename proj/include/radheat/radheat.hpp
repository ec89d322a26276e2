#pragma once

#include "radheat/conformal.hpp"
#include "radheat/criteria.hpp"
#include "radheat/error.hpp"
#include "radheat/geometry.hpp"
#include "radheat/numerics.hpp"
#include "radheat/profile.hpp"
#include "radheat/solver.hpp"
#include "radheat/trajectory.hpp"
#include "radheat/witness.hpp"
