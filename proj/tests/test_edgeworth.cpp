#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "shotnoise/edgeworth.hpp"
#include "shotnoise/oracle.hpp"
#include "shotnoise/rng.hpp"
#include "shotnoise/special.hpp"

using namespace shotnoise;

namespace {

// Exhaustive-enumeration oracle for the coefficient table: all ordered tuples
// (n_1..n_l) in [3, k+2]^l with sum(n_i - 2) = j.
double c_enum_oracle(const TiltState& st, int k, int j, int l) {
    double total = 0.0;
    std::vector<int> tuple(static_cast<size_t>(l), 3);
    for (;;) {
        int weight = 0;
        for (int v : tuple) weight += v - 2;
        if (weight == j) {
            double prod = 1.0;
            for (int v : tuple) {
                double f = 1.0;
                for (int i = 2; i <= v; ++i) f *= i;
                prod *= st.tk(v) / f;
            }
            total += prod;
        }
        int c = 0;
        while (c < l && ++tuple[static_cast<size_t>(c)] == k + 3) tuple[static_cast<size_t>(c++)] = 3;
        if (c == l) break;
    }
    double lf = 1.0;
    for (int i = 2; i <= l; ++i) lf *= i;
    return total / lf;
}

TiltState random_state(const ModelParams& mp, CounterRng& rng, int n_max) {
    const double r = rng.uniform(1.0, 6.0);
    const double rho = std::pow(r, 0.5 * mp.d);
    const double y = rng.uniform(-0.8 * mp.d3 * rho, 6.0);
    return tilted_cumulants(solve_xi(mp, y, r), n_max);
}

}  // namespace

TEST_CASE("low-order coefficients in closed form") {
    const ModelParams mp = make_params(2, 4.0);
    CounterRng rng(11);
    for (int i = 0; i < 20; ++i) {
        TiltState st = random_state(mp, rng, 8);
        EdgeworthTable t = build_coefficients(st, 4);
        CHECK(t.c(1, 1) == doctest::Approx(st.tk(3) / 6.0).epsilon(1e-14));
        CHECK(t.c(2, 1) == doctest::Approx(st.tk(4) / 24.0).epsilon(1e-14));
        CHECK(t.c(2, 2) ==
              doctest::Approx(0.5 * (st.tk(3) / 6.0) * (st.tk(3) / 6.0)).epsilon(1e-14));
        // c_{4,2} = (1/2!) [2 (tk3/3!)(tk5/5!) + (tk4/4!)^2]
        const double expect =
            0.5 * (2.0 * (st.tk(3) / 6.0) * (st.tk(5) / 120.0) +
                   (st.tk(4) / 24.0) * (st.tk(4) / 24.0));
        CHECK(t.c(4, 2) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("coefficient table equals the exhaustive enumeration up to k = 6") {
    const ModelParams mp = make_params(2, 4.0);
    CounterRng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        TiltState st = random_state(mp, rng, 9);
        for (int k = 1; k <= 6; ++k) {
            EdgeworthTable t = build_coefficients(st, k);
            for (int j = 1; j <= k; ++j)
                for (int l = 1; l <= j; ++l)
                    CHECK(t.c(j, l) ==
                          doctest::Approx(c_enum_oracle(st, k, j, l)).epsilon(1e-13));
        }
    }
}

TEST_CASE("coefficients nonnegative with the composition bound") {
    const ModelParams mp = make_params(2, 4.0);
    CounterRng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        TiltState st = random_state(mp, rng, 10);
        EdgeworthTable t = build_coefficients(st, 8);
        double jf = 1.0;
        for (int j = 1; j <= 8; ++j) {
            jf *= j;
            double lf = 1.0;
            for (int l = 1; l <= j; ++l) {
                lf *= l;
                CHECK(t.c(j, l) >= 0.0);
                const double bound =
                    std::pow(st.tk(3), l) * std::pow(static_cast<double>(l), j) / (lf * jf);
                CHECK(t.c(j, l) <= bound * (1.0 + 1e-12));
                if (st.y < 0.0) {
                    const double zr = -st.xi / st.rho;
                    const double binom = std::exp(std::lgamma(j + l) - std::lgamma(l + 1.0) -
                                                  std::lgamma(static_cast<double>(l)) -
                                                  std::lgamma(j + 1.0));
                    CHECK(t.c(j, l) <=
                          std::pow(st.tk(2), l) * std::pow(zr, -j) * binom * (1.0 + 1e-12));
                }
            }
        }
    }
}

TEST_CASE("nf parity is bit-exact") {
    const ModelParams mp = make_params(2, 4.0);
    CounterRng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        TiltState st = random_state(mp, rng, 16);
        for (int k = 0; k <= 6; ++k) {
            const double even = build_coefficients(st, 2 * k).nf;
            const double odd = build_coefficients(st, 2 * k + 1).nf;
            CHECK(even == odd);  // exact: odd-j terms are never computed
        }
    }
}

TEST_CASE("nf frozen values") {
    const ModelParams mp = make_params(2, 4.0);
    TiltState st0 = tilted_cumulants(solve_xi(mp, 0.0, 2.0), 6);
    CHECK(build_coefficients(st0, 0).nf == doctest::Approx(normal_pdf(0.0)).epsilon(1e-14));
    // Hand evaluation with tk3 = 0.6, tk4 = 1.5/3.5, confirmed by the
    // enumeration oracle: 0.3989423 * (1 - 0.0214286/4).
    CHECK(build_coefficients(st0, 2).nf == doctest::Approx(0.39680508961356786).epsilon(1e-12));
    // nf_0 = phi(0)/sqrt(tk2) at a tilted state.
    TiltState st = tilted_cumulants(solve_xi(mp, 1.0, 2.0), 4);
    CHECK(build_coefficients(st, 0).nf ==
          doctest::Approx(normal_pdf(0.0) / std::sqrt(st.tk(2))).epsilon(1e-13));
}

TEST_CASE("density against the inversion oracle") {
    const ModelParams mp = make_params(2, 4.0);
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-12;

    CHECK(density_Y(mp, 0.0, 4.0, 0).value == doctest::Approx(normal_pdf(0.0)).epsilon(1e-14));

    const double oracle = invert_density(mp, 1.0, 2.0, spec, true);
    const double gap0 = std::abs(density_Y(mp, 1.0, 2.0, 0).value - oracle) / oracle;
    const double gap2 = std::abs(density_Y(mp, 1.0, 2.0, 2).value - oracle) / oracle;
    CHECK(gap2 < gap0);
    CHECK(gap2 < 1e-4);

    // Deep lower tail: finite positive value, honest validity flag.
    const DensityValue deep = density_Y(mp, -5.9, 2.0, 2);
    CHECK(deep.value > 0.0);
    CHECK(std::isfinite(deep.value));
    const double deep_oracle = invert_density(mp, -5.9, 2.0, spec, true);
    CHECK(std::abs(deep.value - deep_oracle) / deep_oracle < 0.35);  // rho < k: outside theorem
    CHECK_FALSE(density_Y(mp, -5.9, 2.0, 4).theorem_applies);        // rho = 2 < k = 4, y < 0
    CHECK(density_Y(mp, 1.0, 4.0, 2).theorem_applies);

    CHECK_THROWS_AS(density_Y(mp, -6.5, 2.0, 2), std::domain_error);
}

TEST_CASE("density of Sbar: standardization and normalization") {
    const ModelParams mp = make_params(2, 4.0);
    const double r = 2.0;
    const RadialScale sc = radial_scale(mp, r);
    // sbar = mu maps to y = 0.
    CHECK(density_Sbar(mp, sc.mu, r, 2).value ==
          doctest::Approx(build_coefficients(tilted_cumulants(solve_xi(mp, 0.0, r), 4), 2).nf /
                          sc.sigma)
              .epsilon(1e-12));
    CHECK_THROWS_AS(density_Sbar(mp, 0.0, r, 2), std::domain_error);
    CHECK_THROWS_AS(density_Sbar(mp, -1.0, r, 2), std::domain_error);

    QuadResult q = integrate([&](double sb) { return density_Sbar(mp, sb, r, 2).value; },
                             sc.mu - 5.9 * sc.sigma, sc.mu + 40.0 * sc.sigma, 1e-9, 1e-8, 8000);
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("error bound form") {
    const ModelParams mp = make_params(2, 4.0);
    TiltState up = tilted_cumulants(solve_xi(mp, 1.0, 2.0), 4);
    // k = 0, y >= 0: C2/(sqrt(tk2) rho).
    CHECK(error_bound_form(mp, up, 0, 2.0, 3.0) ==
          doctest::Approx(2.0 / (std::sqrt(up.tk(2)) * up.rho)).epsilon(1e-13));
    // Doubling r shrinks the bound by 2^{d(k+1)/2} at fixed tk2.
    for (int k : {0, 1, 2, 3}) {
        TiltState a = up;
        TiltState b = up;
        b.rho = 2.0 * a.rho;
        const double ratio = error_bound_form(mp, a, k, 1.0, 1.0) /
                             error_bound_form(mp, b, k, 1.0, 1.0);
        CHECK(ratio == doctest::Approx(std::pow(2.0, k + 1)).epsilon(1e-12));
    }
    // Lower tail swaps in tk2^{1/d1 - 1/2}.
    TiltState dn = tilted_cumulants(solve_xi(mp, -2.0, 2.0), 4);
    const double expect =  // C2 C3^k k^{k/2} (tk2^{1/d1 - 1/2}/rho)^{k+1} at k = 2
        2.0 * std::pow(std::pow(dn.tk(2), 1.0 / mp.d1 - 0.5) / dn.rho, 3.0);
    CHECK(error_bound_form(mp, dn, 2, 1.0, 1.0) == doctest::Approx(expect).epsilon(1e-12));
}
