#pragma once

// Ground-truth engines: characteristic-function inversion of f_{Y^{(r)}}
// (direct and tilted-path), exact Monte Carlo of Sbar^{(r)}, and the finite-n
// density-convergence check.

#include <complex>
#include <cstdint>
#include <span>

#include "shotnoise/model.hpp"
#include "shotnoise/quad.hpp"

namespace shotnoise {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double t_max = 0.0;   // 0: choose from the tail-decay bound, then double
    int panel_order = 15; // GK pair width (fixed 15-point rule)
    int max_panels = 20000;
};

// Characteristic function of Y^{(r)} at complex t; imaginary shifts move the
// integration path (t - i*xi corresponds to the tilted variable).
std::complex<double> cf_Y(const ModelParams& mp, double r, std::complex<double> t);

// Density of Y^{(r)} at y by Fourier inversion. The direct path integrates
// e^{-ity} chi_Y(t); the tilted path shifts to the saddle and multiplies by
// the exact prefactor, which preserves relative accuracy in the tails.
double invert_density(const ModelParams& mp, double y, double r, const QuadratureSpec& spec,
                      bool tilted);

// One draw of Sbar^{(r)}: radii on (r, tail_radius] via cumulative Exp(d2)
// increments of r^d, plus the analytic tail mean mu(tail_radius). Unbiased;
// residual sd sigma(tail_radius).
double simulate_Sbar(const ModelParams& mp, double r, double tail_radius, std::uint64_t seed);

// Convenience tail radius: residual sd <= min(8r, 20)^{d/2-gamma}.
double default_tail_radius(double r);

// Sup over s_grid of |KDE of S^{(n)} - closed-form f_S| from `draws` samples
// of the n-point uniform-ball model (d=2, gamma=4 only).
double finite_n_density_check(const ModelParams& mp, int n, std::span<const double> s_grid,
                              std::uint64_t seed, long draws = 200000);

namespace detail {
// Entire function Psi(z) = sum_{n>=2} z^n/(n!(n - d/gamma)); chi_Y(t) =
// exp(d1 rho^2 Psi(i t / rho)). Exposed for tests.
std::complex<double> psi_series_c(double beta, std::complex<double> z);
std::complex<double> kernel_I_c(double a, std::complex<double> z);
std::complex<double> psi_c(double beta, std::complex<double> z);
}  // namespace detail

}  // namespace shotnoise
