#pragma once

// Conditional distribution of the nearest distance R_1 given S = s:
// the ell-point scheme
//   fhat_{R1,S}(r1, s) = int over r1 < r2 < ... < r_ell of
//       f_{R1..R_ell}(r) * ghat_{ell,k}(y(s, r), r_ell),
//   y = (s - sum r_i^{-gamma} - mu(r_ell)) / sigma(r_ell),
// the plain normal baseline, and the closed-form two/three-point slice
// densities for d = 2, gamma = 4.

#include <cstdint>
#include <vector>

#include "shotnoise/edgeworth.hpp"
#include "shotnoise/model.hpp"
#include "shotnoise/oracle.hpp"

namespace shotnoise {

enum class FsMode { Auto, ClosedForm, Scheme };

struct ConditionalConfig {
    int ell = 4;
    int k = -1;               // -1: floor(sqrt(a0 * ell)) per the scheme's coupling
    double a0 = 0.05;         // cutoff constant, 0 < a0 < 1/d2
    bool use_reduction = true;  // collapse the middle pair analytically (d=2, gamma=4, ell=4)
    FsMode fs_mode = FsMode::Auto;
    double abs_tol = 1e-8;
    double rel_tol = 1e-7;
    int qmc_points = 1 << 14;  // per replicate, ell in [5,12]
    int qmc_replicates = 8;
    std::uint64_t qmc_seed = 0x51ab5eedULL;

    int effective_k(const ModelParams& mp) const;
    void validate(const ModelParams& mp) const;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;  // reported quadrature / RQMC error estimate
};

// ghat_{ell,k}(y, r): (1/sigma(r)) nf_k e^{-xi y} phi_Y(-xi) for
// r > (a0*ell)^{1/d}, zero at or below the cutoff and outside the support.
// Total by design: never throws on (y, r) inputs.
double g_ellk(const ModelParams& mp, double y, double r, const ConditionalConfig& cfg);

Estimate fhat_R1S(const ModelParams& mp, double r1, double s, const ConditionalConfig& cfg);

// P(R1 <= r | S = s) approximation; 0 for r <= s^{-1/gamma} by convention.
Estimate conditional_cdf_R1(const ModelParams& mp, double r, double s,
                            const ConditionalConfig& cfg);

// CDF at several radii in one pass (segment-accumulated); rs need not be sorted.
std::vector<Estimate> conditional_cdf_R1_grid(const ModelParams& mp, std::span<const double> rs,
                                              double s, const ConditionalConfig& cfg);

// Marginal density approximation f_S(s) ~= int fhat dr1.
Estimate fS_via_scheme(const ModelParams& mp, double s, const ConditionalConfig& cfg);

// The crude approximation: the 4-point integral with a plain Gaussian in
// place of the exact tail density (no tilt, no cutoff). d=2, gamma=4 only.
Estimate normal_baseline_R1S(const ModelParams& mp, double r1, double s, int n_points = 4);

// Conditional density of W = S_2 + S_3 given R_1, R_4 (d=2, gamma=4), in
// power coordinates s1 = r1^{-4} > s4 = r4^{-4}, on 2*s4 < w < 2*s1:
//   (1/Z) (4/w^2) g(v), v = min(w - s4, s1)/w, g(v) = (v - 1/2)/sqrt(v(1-v)),
//   Z = 2 (s4^{-1/2} - s1^{-1/2})^2.
double two_point_density_W(double s1, double s4, double w);

// Conditional density of Z = S_2 + S_3 + S_4 given R_1, R_5 on 3*s5 < z < 3*s1,
// by 1D quadrature of the two-point slice against (z-w)^{-3/2}.
double three_point_density_Z(double s1, double s5, double z, const QuadratureSpec& spec);

}  // namespace shotnoise
