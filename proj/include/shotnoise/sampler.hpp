#pragma once

// Exact samplers: unconditional radii (cumulative Exp(d2) increments of r^d),
// and a pairwise Gibbs chain for the conditional law of n uniform-ball points
// given their power sum, used to test the stochastic-dominance and
// escape-rate statements.

#include <cstdint>
#include <vector>

#include "shotnoise/model.hpp"
#include "shotnoise/rng.hpp"

namespace shotnoise {

struct RadiiSample {
    std::vector<double> radii;  // strictly increasing
    double power_sum = 0.0;     // sum r_i^{-gamma}
    std::uint64_t seed = 0;
    int n = 0;
};

RadiiSample sample_radii(const ModelParams& mp, int count, std::uint64_t seed);

struct GibbsChainState {
    std::vector<double> u;    // unordered coordinates in (0, m); u = R^d
    double s = 0.0;           // conserved constraint sum u_j^{-gamma/d}
    double m = 0.0;
    long sweep_count = 0;
    double max_drift = 0.0;   // renormalization ledger: worst pre-fix |sum - s|/s
};

// Ball parameter matching n points to the Poisson intensity: u ~ Unif(0, m).
double gibbs_box(const ModelParams& mp, int n);

// One exact draw of the unordered pair (u1 <= u2) on the constraint curve
// u1^{-q} + u2^{-q} = w, u_i < m, from the conditional law of two Unif(0,m)
// coordinates given their power sum (density ~ [w1 (w - w1)]^{-1-1/q} in
// power coordinates). Requires w > 2 m^{-q}.
std::pair<double, double> pair_resample(double gamma_over_d, double w, double m, CounterRng& rng);
std::pair<double, double> pair_resample(double gamma_over_d, double w, double m,
                                        std::uint64_t seed);

GibbsChainState gibbs_init(const ModelParams& mp, int n, double m, double s);

// Random-scan sweeps: each sweep updates n/2 disjoint random pairs; the
// constraint is re-imposed exactly after every sweep (drift recorded).
void gibbs_run(const ModelParams& mp, GibbsChainState& state, long sweeps, CounterRng& rng);

GibbsChainState gibbs_conditional(const ModelParams& mp, int n, double m, double s, long sweeps,
                                  std::uint64_t seed);

// Count-varying variant: pair moves plus split/merge, targeting a Poisson
// configuration on (0, m) (v-intensity d2, mean count d2*m) conditioned on
// sum u_j^{-gamma/d} = s. The fixed-count chain conditioned at an atypical s
// is biased by the frozen count; this one reproduces the infinite-model
// conditional up to the absorbed tail. gamma = 2d only.
void gibbs_run_poisson(const ModelParams& mp, GibbsChainState& state, long sweeps,
                       CounterRng& rng);

struct DominanceReport {
    int ell = 0;
    double s = 0.0;
    std::vector<double> grid;          // decile grid (from the conditional sample)
    std::vector<double> cdf_cond;      // empirical F of conditional R_ell
    std::vector<double> cdf_uncond;    // empirical F of unconditional R'_{ell-1}
    std::vector<double> band;          // 3-SE band at each grid point
    int violations = 0;                // grid points with F_cond > F_uncond + band
    double escape_prob = 0.0;          // P(R_ell <= (a*ell)^{1/d} | S = s) estimate
    double escape_a = 0.0;
    double ess = 0.0;                  // effective sample size of the chain draws
};

// Compares conditional R_ell (Gibbs, radii = u^{1/d} order statistics) against
// unconditional R'_{ell-1} one-sidedly, and reports the escape probability at
// radius (a*ell)^{1/d}.
DominanceReport dominance_test(const ModelParams& mp, int n, double m, double s, int ell,
                               long draws, std::uint64_t seed, double escape_a = 0.2);

// Integrated autocorrelation-based effective sample size of a scalar series.
double effective_sample_size(std::span<const double> series);

}  // namespace shotnoise
