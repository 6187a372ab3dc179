#include <cmath>

#include "doctest.h"
#include "shotnoise/oracle.hpp"
#include "shotnoise/quad.hpp"
#include "shotnoise/rng.hpp"
#include "shotnoise/special.hpp"
#include "shotnoise/tilt.hpp"

using namespace shotnoise;

namespace {

// Bisection oracle on the monotone map x = xi/rho -> y/rho, independent of the
// Newton path in solve_xi.
double xi_bisect_oracle(const ModelParams& mp, double y, double r) {
    const double rho = std::pow(r, 0.5 * mp.d);
    const double tau = y / rho;
    auto f = [&](double x) {
        return mp.d1 * (kernel_I(1.0 - mp.beta(), x).value - 1.0 / (1.0 - mp.beta())) - tau;
    };
    double lo = 0.0, hi = rho * 50.0;
    if (tau < 0.0) {
        hi = 0.0;
        lo = -1.0;
        while (f(lo) > 0.0) lo *= 2.0;
    } else {
        while (f(hi) < 0.0) hi *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) * rho;
}

double tkappa_quad_oracle(const ModelParams& mp, const TiltState& st, int n) {
    const double x = st.xi / st.rho;
    QuadResult q = integrate(
        [&](double v) {
            const double u = v * v;  // u = v^2 smooths u^{-beta} for beta = 1/2
            return mp.d1 * std::exp(x * u) * std::pow(u, n - 1 - mp.beta()) * 2.0 * v;
        },
        0.0, 1.0, 1e-300, 1e-13, 20000);
    return q.value;
}

}  // namespace

TEST_CASE("xi at y = 0 vanishes exactly") {
    const ModelParams mp = make_params(2, 4.0);
    for (double r : {0.7, 1.0, 2.0, 8.0}) {
        const TiltState st = solve_xi(mp, 0.0, r);
        CHECK(st.xi == 0.0);
        CHECK(st.log_prefactor == 0.0);
    }
}

TEST_CASE("xi solves the tilt equation; frozen oracle value") {
    const ModelParams mp = make_params(2, 4.0);
    const TiltState st = solve_xi(mp, 1.0, 2.0);
    CHECK(st.xi == doctest::Approx(0.87278167548693952).epsilon(1e-12));
    CHECK(st.xi == doctest::Approx(xi_bisect_oracle(mp, 1.0, 2.0)).epsilon(1e-12));
    CHECK(st.residual <= 1e-12 * std::max(1.0, std::abs(st.y)));

    // Residual over random states.
    CounterRng rng(4242);
    for (int i = 0; i < 500; ++i) {
        const double r = rng.uniform(0.8, 8.0);
        const double rho = std::pow(r, 0.5 * mp.d);
        const double y = rng.uniform(-0.95 * mp.d3 * rho, 12.0);
        const TiltState s2 = solve_xi(mp, y, r);
        const double resid =
            std::abs(mp.d1 * rho *
                         (kernel_I(1.0 - mp.beta(), s2.xi / rho).value - 1.0 / (1.0 - mp.beta())) -
                     y);
        CHECK(resid <= 1e-12 * std::max(1.0, std::abs(y)));
        CHECK(s2.xi * y >= 0.0);  // sign(xi) = sign(y)
    }
}

TEST_CASE("support boundary rejected") {
    const ModelParams mp = make_params(2, 4.0);
    CHECK_THROWS_AS(solve_xi(mp, -6.1, 2.0), std::domain_error);   // below -d3*rho = -6
    CHECK_THROWS_AS(solve_xi(mp, -6.0, 2.0), std::domain_error);   // exactly at it
    CHECK_NOTHROW(solve_xi(mp, -5.9999, 2.0));
}

TEST_CASE("tilted cumulants at xi = 0 and against quadrature") {
    const ModelParams mp = make_params(2, 4.0);
    TiltState st0 = tilted_cumulants(solve_xi(mp, 0.0, 2.0), 6);
    CHECK(st0.tk(2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st0.tk(3) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(st0.tk(4) == doctest::Approx(1.5 / 3.5).epsilon(1e-14));

    // tkappa_2 = d1/d1 = 1 at xi = 0 for every (d,gamma).
    for (auto [d, g] : {std::pair{1, 2.5}, std::pair{2, 3.0}, std::pair{3, 5.0}}) {
        const ModelParams m2 = make_params(d, g);
        CHECK(tilted_cumulants(solve_xi(m2, 0.0, 2.0), 2).tk(2) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }

    TiltState st = tilted_cumulants(solve_xi(mp, 1.0, 2.0), 12);
    CHECK(st.tk(2) == doctest::Approx(1.3077039455872539).epsilon(1e-12));
    for (int n = 2; n <= 4; ++n)
        CHECK(st.tk(n) == doctest::Approx(tkappa_quad_oracle(mp, st, n)).epsilon(1e-11));
    for (int n = 2; n < 12; ++n) CHECK(st.tk(n) >= st.tk(n + 1));  // monotone chain
    CHECK(st.tk(12) > 0.0);

    CHECK_THROWS_AS(tilted_cumulants(st, 1), std::domain_error);
    CHECK_THROWS_AS(tilted_cumulants(st, 65), std::domain_error);
}

TEST_CASE("variance shift across the mean") {
    const ModelParams mp = make_params(2, 4.0);
    CHECK(tilted_cumulants(solve_xi(mp, 2.0, 2.0), 2).tk(2) > 1.0);   // y > 0
    CHECK(tilted_cumulants(solve_xi(mp, -2.0, 2.0), 2).tk(2) < 1.0);  // y < 0
}

TEST_CASE("strict monotonicity of y -> xi") {
    const ModelParams mp = make_params(2, 4.0);
    const double r = 2.0, rho = 2.0;
    double prev = -1e308;
    for (int i = 0; i < 50; ++i) {
        const double y = (-mp.d3 * rho + 0.1) + (10.0 - (-mp.d3 * rho + 0.1)) * i / 49.0;
        const double xi = solve_xi(mp, y, r).xi;
        CHECK(xi > prev);
        prev = xi;
    }
}

TEST_CASE("scale coupling: xi/rho is a function of y/rho only") {
    const ModelParams mp = make_params(2, 4.0);
    for (auto [ra, rb] : {std::pair{1.0, 4.0}, std::pair{2.0, 8.0}}) {
        const double rho_a = std::pow(ra, 0.5 * mp.d), rho_b = std::pow(rb, 0.5 * mp.d);
        for (double y : {-2.0, -0.5, 0.3, 1.0, 4.0}) {
            const double xa = solve_xi(mp, y, ra).xi / rho_a;
            const double xb = solve_xi(mp, y * rho_b / rho_a, rb).xi / rho_b;
            CHECK(xa == doctest::Approx(xb).epsilon(1e-10));
        }
    }
}

TEST_CASE("derivative identity dy/dxi = tkappa_2") {
    const ModelParams mp = make_params(2, 4.0);
    CounterRng rng(31);
    for (int i = 0; i < 50; ++i) {
        const double r = rng.uniform(1.0, 6.0);
        const double rho = std::pow(r, 0.5 * mp.d);
        const double y = rng.uniform(-0.7 * mp.d3 * rho, 6.0);
        const TiltState st = tilted_cumulants(solve_xi(mp, y, r), 2);
        const double h = 1e-5 * std::max(1.0, std::abs(y));
        const double fd = 2.0 * h / (solve_xi(mp, y + h, r).xi - solve_xi(mp, y - h, r).xi);
        CHECK(fd == doctest::Approx(st.tk(2)).epsilon(1e-6));
    }
}

TEST_CASE("log prefactor: frozen value, nonpositivity, argmin property") {
    const ModelParams mp = make_params(2, 4.0);
    const TiltState st = solve_xi(mp, 1.0, 2.0);
    CHECK(st.log_prefactor == doctest::Approx(-0.45588843427352382).epsilon(1e-11));

    CounterRng rng(8);
    for (int i = 0; i < 60; ++i) {
        const double r = rng.uniform(1.0, 6.0);
        const double rho = std::pow(r, 0.5 * mp.d);
        const double y = rng.uniform(-0.8 * mp.d3 * rho, 8.0);
        const TiltState s2 = solve_xi(mp, y, r);
        CHECK(s2.log_prefactor <= 1e-12);  // e^{-xi y} phi(-xi) <= 1 at the argmin
        // Perturbing xi can only increase the Legendre form.
        const double x = s2.xi / rho;
        for (double dxi : {-0.01, 0.01}) {
            const double xp = x + dxi / rho;
            const double lp_pert = rho * rho * (-xp * (y / rho) + mp.d1 * psi0(mp, -xp));
            CHECK(lp_pert >= s2.log_prefactor - 1e-12);
        }
    }
}

TEST_CASE("log prefactor against the Monte Carlo tilted mean" * doctest::skip(false)) {
    // E[e^{xi Y}] e^{-xi y} from shell-sampled draws of Sbar^{(r)}.
    const ModelParams mp = make_params(2, 4.0);
    const double r = 2.0, tail = 12.0;
    const TiltState st = solve_xi(mp, 1.0, r);
    const RadialScale sc = radial_scale(mp, r);
    const long n_draws = 1000000;
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < n_draws; ++i) {
        const double sbar = simulate_Sbar(mp, r, tail, 5150 + static_cast<std::uint64_t>(i));
        const double w = std::exp(st.xi * (sbar - sc.mu) / sc.sigma - st.xi * st.y);
        const double delta = w - mean;
        mean += delta / (i + 1);
        m2 += delta * (w - mean);
    }
    const double se = std::sqrt(m2 / (n_draws - 1) / n_draws);
    CHECK(std::abs(mean - std::exp(st.log_prefactor)) < 3.0 * se);
}
