#pragma once

// Exponential tilting of the standardized tail sum Y^{(r)}. Solves the
// mean-shift equation
//   y/rho = d1 * [ I(1 - d/gamma, xi/rho) - gamma/(gamma - d) ]
// for the tilt parameter xi(y,r), and evaluates the tilted cumulants
//   tkappa_n = d1 * I(n - d/gamma, xi/rho)
// and the prefactor log(e^{-xi y} phi_{Y^{(r)}}(-xi)).

#include <vector>

#include "shotnoise/model.hpp"

namespace shotnoise {

struct TiltState {
    ModelParams model;
    double y = 0.0;
    double r = 0.0;
    double rho = 0.0;            // r^{d/2}
    double xi = 0.0;             // tilt parameter; sign(xi) = sign(y)
    double residual = 0.0;       // |equation residual| in y units at the solution
    std::vector<double> tkappa;  // tkappa[n] valid for 2 <= n <= n_max; [0],[1] unused
    double log_prefactor = 0.0;  // -xi*y + d1*rho^2*psi0(-xi/rho)

    double tk(int n) const { return tkappa[static_cast<size_t>(n)]; }
};

// Fraction of the support width d3*rho treated as out of range near the lower
// boundary (the tilt parameter diverges there; callers treat the sliver as
// zero density).
inline constexpr double kSupportGuard = 1e-9;

// Safeguarded Newton (bisection fallback on a maintained bracket).
// Throws std::domain_error outside the support, std::runtime_error on
// convergence failure (message carries the last bracket).
TiltState solve_xi(const ModelParams& mp, double y, double r, double tol = 1e-12);

// Returns a copy with tkappa populated up to n_max (2 <= n_max <= 64).
TiltState tilted_cumulants(const TiltState& st, int n_max);

double log_prefactor(const TiltState& st);

}  // namespace shotnoise
