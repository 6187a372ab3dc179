#pragma once

// Special functions shared by the tilt, Edgeworth and oracle machinery.
// The workhorse is the kernel integral
//   I(a, x) = int_0^1 e^{x u} u^{a-1} du,   a > 0, x real,
// an incomplete-gamma relative valid for x of both signs.

#include "shotnoise/model.hpp"

namespace shotnoise {

struct KernelEval {
    double a = 0.0;
    double x = 0.0;
    double value = 0.0;      // always > 0; equals 1/a at x = 0
    double log_value = 0.0;
};

// Relative error <= ~1e-13 over x in [-700, 700].
// x >= 0: power series sum_k x^k/(k!(a+k)), all terms positive.
// x < 0, -x < a+1: Kummer-transformed series e^x/a * sum_n (-x)^n/((a+1)...(a+n)).
// x < 0, -x >= a+1: (-x)^{-a} Gamma(a) (1 - Q(a,-x)), Q by Lentz continued fraction.
KernelEval kernel_I(double a, double x);

// psi0(s) = int_0^1 (e^{-su} - 1 + su) u^{-1-d/gamma} du
//         = sum_{n>=2} (-s)^n / (n! (n - d/gamma)).
// Series for |s| <= 10; otherwise the integration-by-parts identity
//   psi0(s) = (gamma/d) [ (1 - s - e^{-s}) + s*gamma/(gamma-d) - s*I(1-d/gamma, -s) ].
double psi0(const ModelParams& mp, double s);

// Probabilists' Hermite polynomial at 0: 0 for odd n, (-1)^{n/2} (n-1)!! for even n.
// Returned as double (exceeds integer range for large n).
double hermite_at_zero(int n);

double normal_pdf(double z);

}  // namespace shotnoise
