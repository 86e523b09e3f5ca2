#pragma once

#include "wmle/errors.hpp"

namespace wmle {

/// psi(x) for x > 0; absolute error <= 1e-10 on [1e-3, 1e6].
double digamma(double x);

/// psi_m(x) for m in {0,1,2,3}, x > 0; m = 0 is digamma.
double polygamma(int m, double x);

/// Inverse of digamma on (0, inf) -> R. Safeguarded Newton started inside the
/// bracket (1/log(1+e^{-y}), e^y + 1/2); the result stays strictly inside it.
double inv_digamma(double y);

} // namespace wmle
