#pragma once

// Order-k Edgeworth evaluation at the tilted mean: coefficient table
//   c_{j,l} = (1/l!) sum over (n_1..n_l) in [3,k+2]^l with sum(n_i - 2) = j
//             of prod tkappa_{n_i}/n_i!
// the scalar
//   nf_k = phi(0)/sqrt(tk2) * [1 + sum_{j even} rho^{-j} sum_l c_{j,l}
//          tk2^{-(j/2+l)} H_{j+2l}(0)]
// and the density approximation f_Y(y) ~= nf_k * e^{-xi y} phi_Y(-xi).

#include <vector>

#include "shotnoise/tilt.hpp"

namespace shotnoise {

struct EdgeworthTable {
    int k = 0;
    TiltState state;               // carries tkappa up to k+2
    std::vector<double> coeff;     // c_{j,l} for 1 <= l <= j <= k, row-major by j
    double nf = 0.0;               // the evaluated nf_k

    double c(int j, int l) const { return coeff[static_cast<size_t>((j - 1) * k + (l - 1))]; }
};

// Dynamic program over ordered compositions; the exhaustive-enumeration oracle
// lives in the tests. k > 30 rejected.
EdgeworthTable build_coefficients(const TiltState& st, int k);

double nf_k(const EdgeworthTable& table);

struct DensityValue {
    double value = 0.0;
    // False when the stated applicability conditions fail (r^{d/2} >= sqrt(k),
    // and additionally r^{d/2} >= k on the lower tail, unknown constants set
    // to 1); the value is still returned.
    bool theorem_applies = true;
};

// Density approximation for the standardized tail sum Y^{(r)} at y.
DensityValue density_Y(const ModelParams& mp, double y, double r, int k);

// Density of Sbar^{(r)} at sbar > 0 via the standardization change of variables.
DensityValue density_Sbar(const ModelParams& mp, double sbar, double r, int k);

// The error-bound expression of the density theorem with caller-supplied
// constants; the shape only, used for scaling studies.
double error_bound_form(const ModelParams& mp, const TiltState& st, int k, double C2, double C3);

}  // namespace shotnoise
