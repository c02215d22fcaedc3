#pragma once

// Adapters from the model right-hand sides to the integrator interface.
// Intermediate Runge-Kutta stages may dip marginally below zero, so the
// adapters evaluate the unchecked formulas; a zero total population maps to
// a zero derivative.

#include "wolbdyn/models.hpp"
#include "wolbdyn/odeint.hpp"

#include <vector>

namespace wolbdyn {

// direction = -1 gives the time-reversed field.
ode::Rhs single_field(const SingleStrainParams& params, double direction = 1.0);
ode::Rhs multistrain_field(const MultiStrainParams& params, double direction = 1.0);

std::vector<State4> to_state4(const ode::Trajectory& traj);

}  // namespace wolbdyn
