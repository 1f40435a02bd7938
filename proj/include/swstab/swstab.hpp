#pragma once

// Stability of planar randomly switched linear systems: hyperbolicity
// criterion, exact-flow Monte Carlo for the Lyapunov exponent, closed-form
// invariant measures for the two explicit families, the critical switching
// rate, contraction certificates and random matrix products.

#include "swstab/angular.hpp"
#include "swstab/certificates.hpp"
#include "swstab/exact.hpp"
#include "swstab/mat2.hpp"
#include "swstab/pdmp.hpp"
#include "swstab/products.hpp"
#include "swstab/quadrature.hpp"
#include "swstab/rng.hpp"
#include "swstab/system_spec.hpp"
