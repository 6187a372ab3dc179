#include "shotnoise/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "shotnoise/rng.hpp"
#include "shotnoise/special.hpp"
#include "shotnoise/tilt.hpp"

namespace shotnoise {

namespace detail {

// Taylor series; loses ~|z|/ln(10) digits to cancellation off the positive
// axis, so reserved for |z| <= 5.
std::complex<double> kernel_I_series(double a, std::complex<double> z) {
    std::complex<double> tot = 0.0, term = 1.0;
    for (int k = 0; k < 200; ++k) {
        tot += term / (a + k);
        term *= z / static_cast<double>(k + 1);
        if (std::abs(term) / (a + k + 1) < 1e-18 * std::max(1.0, std::abs(tot)) && k > 3) break;
    }
    return tot;
}

// Watson-lemma expansion of the upper incomplete gamma at w = -z:
//   I(a,z) = Gamma(a) (-z)^{-a} - e^z sum_{n>=0} c_n (-z)^{-(n+1)},
//   c_n = (a-1)(a-2)...(a-n).
// Valid off the positive real z axis (principal branch); first-omitted-term
// error, smallest term ~ e^{-|z|} for |z| >= 60.
std::complex<double> kernel_I_asymptotic(double a, std::complex<double> z) {
    const std::complex<double> w = -z;
    std::complex<double> s = 0.0;
    std::complex<double> p = 1.0 / w;
    double c = 1.0;
    double prev = 1e308;
    for (int n = 0; n < 400; ++n) {
        const std::complex<double> term = c * p;
        const double mag = std::abs(term);
        if (mag > prev) break;  // divergent tail reached
        s += term;
        prev = mag;
        if (mag < 1e-18 * std::max(1e-300, std::abs(s))) break;
        c *= (a - (n + 1));
        p /= w;
    }
    return std::tgamma(a) * std::pow(w, -a) - std::exp(z) * s;
}

// Direct quadrature of int_0^1 e^{zu} u^{a-1} du with the substitution
// u = v^{1/a} (removes the endpoint singularity); bridges the series and
// asymptotic regimes.
std::complex<double> kernel_I_quad(double a, std::complex<double> z) {
    const double inv_a = 1.0 / a;
    auto f = [&](double v) -> std::complex<double> {
        const double u = std::pow(v, inv_a);
        return std::exp(z * u);
    };
    QuadResultC q = integrate_complex(f, 0.0, 1.0, 1e-15, 1e-14, 6000);
    return q.value * inv_a;
}

std::complex<double> kernel_I_c(double a, std::complex<double> z) {
    const double az = std::abs(z);
    if (az < 1e-14) return std::complex<double>(1.0 / a, 0.0);
    if (az <= 5.0) return kernel_I_series(a, z);
    if (az >= 60.0 && (z.real() <= 10.0 || std::abs(z.imag()) > 10.0))
        return kernel_I_asymptotic(a, z);
    return kernel_I_quad(a, z);
}

std::complex<double> psi_series_c(double beta, std::complex<double> z) {
    std::complex<double> tot = 0.0;
    std::complex<double> term = 0.5 * z * z;
    for (int n = 2; n < 300; ++n) {
        tot += term / (n - beta);
        term *= z / static_cast<double>(n + 1);
        if (std::abs(term) / (n + 1 - beta) < 1e-18 * std::max(1.0, std::abs(tot)) && n > 6) break;
    }
    return tot;
}

// Psi(z) = (1/beta) [ (1 + z - e^z) - z/(1-beta) + z*I(1-beta, z) ].
std::complex<double> psi_c(double beta, std::complex<double> z) {
    if (std::abs(z) <= 5.0) return psi_series_c(beta, z);
    return ((1.0 + z - std::exp(z)) - z / (1.0 - beta) + z * kernel_I_c(1.0 - beta, z)) / beta;
}

}  // namespace detail

std::complex<double> cf_Y(const ModelParams& mp, double r, std::complex<double> t) {
    if (!(r > 0.0)) throw std::domain_error("cf_Y: r must be positive");
    const double rho = std::pow(r, 0.5 * mp.d);
    const std::complex<double> z = std::complex<double>(0.0, 1.0) * t / rho;
    const std::complex<double> log_cf = mp.d1 * rho * rho * detail::psi_c(mp.beta(), z);
    if (log_cf.real() > 700.0) throw std::range_error("cf_Y: overflow");
    return std::exp(log_cf);
}

namespace {

double auto_t_max(const ModelParams& mp, double rho, double abs_tol) {
    // Decay envelope exp(-c_fit rho^{d1} t^{d/gamma}) with conservative
    // c_fit = 0.05; smallest t pushing the envelope under abs_tol/10, doubled.
    const double c_fit = 0.05;
    const double target = -std::log(std::max(abs_tol, 1e-300) / 10.0);
    const double t = std::pow(target / (c_fit * std::pow(rho, mp.d1)), 1.0 / mp.beta());
    return 2.0 * t;
}

// Integrates g over [0, t_max] in geometrically growing segments, adapting
// each; stops early once two consecutive segments contribute below tol/8
// (the integrand decays monotonically in envelope beyond rho/2).
double segmented_integral(const std::function<double(double)>& g, double t0_width, double t_max,
                          const QuadratureSpec& spec, long& evals, bool& converged) {
    double total = 0.0;
    double err = 0.0;
    double lo = 0.0;
    double width = t0_width;
    int quiet = 0;
    while (lo < t_max) {
        const double hi = std::min(lo + width, t_max);
        QuadResult q = integrate(g, lo, hi, spec.abs_tol / 8.0, spec.rel_tol / 8.0,
                                 spec.max_panels);
        evals += q.evals;
        if (!q.converged) converged = false;
        total += q.value;
        err += q.error;
        if (std::abs(q.value) < spec.abs_tol / 8.0)
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 2) break;
        lo = hi;
        width *= 2.0;
    }
    return total;
}

}  // namespace

double invert_density(const ModelParams& mp, double y, double r, const QuadratureSpec& spec,
                      bool tilted) {
    if (!(r > 0.0)) throw std::domain_error("invert_density: r must be positive");
    const double rho = std::pow(r, 0.5 * mp.d);
    const double beta = mp.beta();
    const double t_max = spec.t_max > 0.0 ? spec.t_max : auto_t_max(mp, rho, spec.abs_tol);
    const double d1rho2 = mp.d1 * rho * rho;

    long evals = 0;
    bool converged = true;
    double result;
    if (!tilted) {
        auto g = [&](double t) {
            const std::complex<double> z(0.0, t / rho);
            const std::complex<double> ex =
                d1rho2 * detail::psi_c(beta, z) - std::complex<double>(0.0, t * y);
            return std::exp(ex).real();
        };
        result = segmented_integral(g, std::max(1.0, rho), t_max, spec, evals, converged) / M_PI;
    } else {
        const TiltState st = solve_xi(mp, y, r, 1e-13);
        const double x = st.xi / rho;
        // log chi_tilde(t) = d1 rho^2 (Psi(x + it/rho) - Psi(x)); the contour
        // shift is exact for any xi in the strip, so the phase keeps the
        // caller's y.
        const std::complex<double> psi_x = detail::psi_c(beta, std::complex<double>(x, 0.0));
        auto g = [&](double t) {
            const std::complex<double> z(x, t / rho);
            const std::complex<double> ex =
                d1rho2 * (detail::psi_c(beta, z) - psi_x) - std::complex<double>(0.0, t * y);
            return std::exp(ex).real();
        };
        const double integral =
            segmented_integral(g, std::max(1.0, rho), t_max, spec, evals, converged) / M_PI;
        result = std::exp(st.log_prefactor) * integral;
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "invert_density: quadrature hit max_panels (" << spec.max_panels << ") at y=" << y
            << " r=" << r << " after " << evals << " evals";
        throw std::runtime_error(msg.str());
    }
    return result;
}

double default_tail_radius(double r) { return std::max(8.0 * r, 20.0); }

double simulate_Sbar(const ModelParams& mp, double r, double tail_radius, std::uint64_t seed) {
    if (!(tail_radius >= r) || !(r > 0.0))
        throw std::domain_error("simulate_Sbar: need 0 < r <= tail_radius");
    CounterRng rng(seed);
    const double q = mp.gamma / mp.d;
    const double v_end = std::pow(tail_radius, mp.d);
    double v = std::pow(r, mp.d);
    double sum = 0.0;
    for (;;) {
        v += rng.exponential(mp.d2);
        if (v > v_end) break;
        sum += std::pow(v, -q);
    }
    return sum + mp.d3 * std::pow(tail_radius, mp.d - mp.gamma);
}

double finite_n_density_check(const ModelParams& mp, int n, std::span<const double> s_grid,
                              std::uint64_t seed, long draws) {
    if (mp.d != 2 || mp.gamma != 4.0)
        throw std::domain_error("finite_n_density_check: needs the closed-form case d=2, gamma=4");
    if (n < 8) throw std::domain_error("finite_n_density_check: n must be >= 8");
    if (s_grid.empty()) throw std::domain_error("finite_n_density_check: empty grid");

    const double m = n / mp.d2;  // R^d uniform on (0, m): ball of volume n/lambda
    const double q = mp.gamma / mp.d;
    CounterRng root(seed);
    std::vector<double> samples(static_cast<size_t>(draws));
    for (long i = 0; i < draws; ++i) {
        CounterRng rng = root.stream(static_cast<std::uint64_t>(i));
        double s = 0.0;
        if (q == 2.0) {
            for (int j = 0; j < n; ++j) {
                const double v = m * rng.uniform01();
                s += 1.0 / (v * v);
            }
        } else {
            for (int j = 0; j < n; ++j) s += std::pow(m * rng.uniform01(), -q);
        }
        samples[static_cast<size_t>(i)] = s;
    }

    // Gaussian KDE with Silverman bandwidth on the window-clipped sample
    // (the raw sample is heavy-tailed).
    const double lo = *std::min_element(s_grid.begin(), s_grid.end());
    const double hi = *std::max_element(s_grid.begin(), s_grid.end());
    std::vector<double> clipped;
    clipped.reserve(samples.size());
    for (double s : samples)
        if (s >= lo - 10.0 && s <= hi + 10.0) clipped.push_back(s);
    double mean = 0.0;
    for (double s : clipped) mean += s;
    mean /= std::max<size_t>(1, clipped.size());
    double var = 0.0;
    for (double s : clipped) var += (s - mean) * (s - mean);
    var /= std::max<size_t>(1, clipped.size() > 1 ? clipped.size() - 1 : 1);
    const double h =
        std::max(0.05, 1.06 * std::sqrt(var) * std::pow(static_cast<double>(clipped.size()), -0.2));

    double sup = 0.0;
    const double inv_norm = 1.0 / (draws * h);
    for (double s : s_grid) {
        double kde = 0.0;
        for (double smp : clipped) kde += normal_pdf((s - smp) / h);
        kde *= inv_norm;
        sup = std::max(sup, std::abs(kde - stable_density_S(mp, s)));
    }
    return sup;
}

}  // namespace shotnoise
