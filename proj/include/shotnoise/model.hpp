#pragma once

// Power-law shot noise over a homogeneous Poisson process in R^d:
//   S = sum_k R_k^{-gamma},  Sbar^{(r)} = sum_{R_k > r} R_k^{-gamma},
// with the intensity normalized so Var(Sbar^{(r)}) = r^{d-2*gamma}.
// Holds the model parameters, derived constants, and the closed-form
// moments and radii densities.

#include <span>
#include <stdexcept>

namespace shotnoise {

struct ModelParams {
    int d = 2;             // spatial dimension
    double gamma = 4.0;    // pathloss exponent, gamma > d
    double lambda = 0.0;   // Poisson intensity, fixed to (2*gamma - d)/omega_{d-1}
    double d1 = 0.0;       // 2 - d/gamma, in (1,2)
    double d2 = 0.0;       // 2*gamma/d - 1 = d1/(d/gamma), radial intensity rate
    double d3 = 0.0;       // d1/(1 - d/gamma); mu(r)/sigma(r) = d3 * r^{d/2}
    double sphere_area = 0.0;  // omega_{d-1}

    double beta() const { return static_cast<double>(d) / gamma; }
};

// Rejects gamma <= d (the sum S diverges) and d < 1.
ModelParams make_params(int d, double gamma);

// Scale quantities of Sbar^{(r)} at truncation radius r.
struct RadialScale {
    double r = 0.0;
    double rho = 0.0;     // r^{d/2}
    double mu = 0.0;      // E[Sbar^{(r)}] = d3 * r^{d-gamma}
    double sigma2 = 0.0;  // Var(Sbar^{(r)}) = r^{d-2*gamma}
    double sigma = 0.0;
};
RadialScale radial_scale(const ModelParams& mp, double r);

// n-th cumulant of Sbar^{(r)}: a1*a2^n/(n - d/gamma), a1 = (lambda*omega/gamma)*r^d,
// a2 = r^{-gamma}. n capped at 64.
double cumulant(const ModelParams& mp, double r, int n);

// Density of S for the closed-form case d=2, gamma=4: (3/2) s^{-3/2} exp(-9*pi/(4 s)).
// Throws for other (d,gamma); callers fall back to oracle estimation.
double stable_density_S(const ModelParams& mp, double s);

// Density of the nearest-point distance: d*d2*r1^{d-1}*exp(-d2*r1^d).
double first_radius_density(const ModelParams& mp, double r1);

// Joint density of the ell nearest distances at 0 < r_1 < ... < r_ell:
// (d*d2)^ell * prod r_i^{d-1} * exp(-d2 * r_ell^d).
double joint_radii_density(const ModelParams& mp, std::span<const double> radii);

}  // namespace shotnoise
