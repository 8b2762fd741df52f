#pragma once

namespace nmd {

// Modified Bessel function of the second kind, order one, K_1(x), x > 0.
// Underflows to 0 for x above ~705; use log_bessel_k1 there.
double bessel_k1(double x);

// Exponentially scaled e^x K_1(x), x > 0.
double bessel_k1_scaled(double x);

// log K_1(x), x > 0, finite for every finite positive x.
double log_bessel_k1(double x);

}  // namespace nmd
