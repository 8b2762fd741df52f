#pragma once

// Parameter sets behind the bundled synthetic panel and the examples.

#include "nmd/levy_ou.hpp"

namespace nmd {

// Monthly VAR(1) fitted with Gaussian noise.
Var1Params demo_gaussian_params();

// Monthly VAR(1) fitted with NIG noise. The NIG laws keep their tail and
// asymmetry (gamma, beta) and are re-pinned to mean 0 and variance sigma^2.
Var1Params demo_nig_params();

// Heavy left-tailed volume law used as a stress reference, as published
// (its mean is only approximately zero).
NigParams demo_stressed_volume_law();

// First state of the synthetic panel: market rate 3.3%, deposit rate 1.25%
// (log), volume 700,000 (log).
Vec3 demo_initial_state();

}  // namespace nmd
