#include "shotnoise/tilt.hpp"

#include <cmath>
#include <sstream>

#include "shotnoise/special.hpp"

namespace shotnoise {

namespace {

// Left side of the tilt equation in scaled coordinates: tau(x) = d1*(I(1-b,x) - 1/(1-b)).
double tau_of_x(const ModelParams& mp, double x) {
    const double beta = mp.beta();
    return mp.d1 * (kernel_I(1.0 - beta, x).value - 1.0 / (1.0 - beta));
}

}  // namespace

TiltState solve_xi(const ModelParams& mp, double y, double r, double tol) {
    if (!(r > 0.0)) throw std::domain_error("solve_xi: r must be positive");
    if (!(tol > 0.0)) throw std::domain_error("solve_xi: tol must be positive");
    TiltState st;
    st.model = mp;
    st.y = y;
    st.r = r;
    st.rho = std::pow(r, 0.5 * mp.d);

    const double support = mp.d3 * st.rho;
    if (y <= -support * (1.0 - kSupportGuard))
        throw std::domain_error("solve_xi: y at or below the support boundary -d3*rho");

    const double tau = y / st.rho;
    const double beta = mp.beta();
    if (y == 0.0) {
        st.xi = 0.0;
        st.residual = 0.0;
        st.log_prefactor = 0.0;
        return st;
    }

    // Bracket [lo, hi] with tau(lo) < tau < tau(hi); tau(.) is increasing and convex.
    double lo, hi;
    if (tau > 0.0) {
        lo = 0.0;
        hi = 1.0;
        while (tau_of_x(mp, hi) < tau) {
            lo = hi;
            hi *= 2.0;
            if (hi > 700.0) throw std::range_error("solve_xi: tilt parameter out of range");
        }
    } else {
        hi = 0.0;
        lo = -1.0;
        while (tau_of_x(mp, lo) > tau) {
            hi = lo;
            lo *= 2.0;
            if (lo < -1e308 / 2) throw std::runtime_error("solve_xi: bracket expansion failed");
        }
    }

    double x = 0.5 * (lo + hi);
    double resid = tau_of_x(mp, x) - tau;
    const double scale = std::max(1.0, std::abs(tau));
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(resid) <= 1e-15 * scale) break;
        if (resid > 0.0)
            hi = x;
        else
            lo = x;
        const double deriv = mp.d1 * kernel_I(2.0 - beta, x).value;  // = tkappa_2 at x
        double x_new = x - resid / deriv;
        if (!(x_new > lo && x_new < hi)) x_new = 0.5 * (lo + hi);  // bisection fallback
        if (x_new == x) break;
        x = x_new;
        resid = tau_of_x(mp, x) - tau;
    }
    st.xi = x * st.rho;
    st.residual = std::abs(resid) * st.rho;
    if (st.residual > tol * std::max(1.0, std::abs(y))) {
        std::ostringstream msg;
        msg << "solve_xi: no convergence, residual " << st.residual << ", bracket [" << lo << ", "
            << hi << "]";
        throw std::runtime_error(msg.str());
    }
    st.log_prefactor = st.rho * st.rho * (-x * tau + mp.d1 * psi0(mp, -x));
    return st;
}

TiltState tilted_cumulants(const TiltState& st, int n_max) {
    if (n_max < 2 || n_max > 64)
        throw std::domain_error("tilted_cumulants: n_max must be in [2, 64]");
    TiltState out = st;
    out.tkappa.assign(static_cast<size_t>(n_max) + 1, 0.0);
    const double beta = out.model.beta();
    const double x = out.xi / out.rho;
    for (int n = 2; n <= n_max; ++n)
        out.tkappa[static_cast<size_t>(n)] = out.model.d1 * kernel_I(n - beta, x).value;
    return out;
}

double log_prefactor(const TiltState& st) { return st.log_prefactor; }

}  // namespace shotnoise
