#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature for real- and complex-valued
// integrands, plus fixed Gauss-Legendre rules for tensor integration.

#include <complex>
#include <functional>
#include <vector>

namespace shotnoise {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    long evals = 0;
};

// Integrates f over [a,b]; bisects panels until the K15-G7 discrepancy meets
// abs_tol + rel_tol*|integral|. Panels beyond max_intervals mark the result
// as non-converged (error still reported).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, int max_intervals = 4000);

struct QuadResultC {
    std::complex<double> value{0.0, 0.0};
    double error = 0.0;
    bool converged = true;
    long evals = 0;
};

QuadResultC integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                              double b, double abs_tol, double rel_tol,
                              int max_intervals = 4000);

// Gauss-Legendre nodes/weights on [0,1], computed by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
};
const GaussLegendre& gauss_legendre(int n);  // cached per order

}  // namespace shotnoise
