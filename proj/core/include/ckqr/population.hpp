#pragma once

#include "ckqr/design.hpp"
#include "ckqr/kernels.hpp"

namespace ckqr {

//! Population minimizer of the convolution-smoothed objective for an
//! intercept-only design: the b solving int F(b - h z) k(z) dz = tau.
double population_smoothed_minimizer(const DgpSpec& design,
                                     double tau,
                                     const Kernel& kernel,
                                     double h);

//! Population stationary point of the Horowitz objective, intercept-only:
//! int F(b - h z) k(z) dz - h int z k(z) f(b + h z) dz = tau.
double population_horowitz_minimizer(const DgpSpec& design,
                                     double tau,
                                     const Kernel& kernel,
                                     double h);

} // namespace ckqr
