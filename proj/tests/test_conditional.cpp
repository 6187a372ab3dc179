#include <cmath>
#include <vector>

#include "doctest.h"
#include "shotnoise/conditional.hpp"
#include "shotnoise/quad.hpp"
#include "shotnoise/rng.hpp"
#include "shotnoise/sampler.hpp"
#include "shotnoise/special.hpp"

using namespace shotnoise;

namespace {
const ModelParams kMp = make_params(2, 4.0);

// Brute slice integral (1/Z) int s2^{-3/2} (w-s2)^{-3/2} ds2 over the valid
// range; the adjudicating oracle for the two-point closed form.
double two_point_brute(double s1, double s4, double w) {
    const double z_norm = 2.0 * std::pow(1.0 / std::sqrt(s4) - 1.0 / std::sqrt(s1), 2.0);
    const double hi = std::min(w - s4, s1);
    if (hi <= 0.5 * w) return 0.0;
    QuadResult q = integrate(
        [&](double s2) { return std::pow(s2, -1.5) * std::pow(w - s2, -1.5); }, 0.5 * w, hi,
        1e-14, 1e-12, 20000);
    return q.value / z_norm;
}

// Brute 3D simplex quadrature for the three-point density.
double three_point_brute(double s1, double s5, double z) {
    const double z3 = 4.0 / 3.0 * std::pow(1.0 / std::sqrt(s5) - 1.0 / std::sqrt(s1), 3.0);
    auto inner = [&](double s4) {
        const double lo3 = std::max(s4, z - s4 - s1);
        const double hi3 = std::min(0.5 * (z - s4), s1);
        if (hi3 <= lo3) return 0.0;
        QuadResult q = integrate(
            [&](double s3) { return std::pow(s3, -1.5) * std::pow(z - s4 - s3, -1.5); }, lo3, hi3,
            1e-13, 1e-10, 8000);
        return q.value;
    };
    const double lo4 = s5, hi4 = std::min(z / 3.0, s1);
    if (hi4 <= lo4) return 0.0;
    QuadResult q = integrate([&](double s4) { return std::pow(s4, -1.5) * inner(s4); }, lo4, hi4,
                             1e-12, 1e-9, 8000);
    return q.value / z3;
}

}  // namespace

TEST_CASE("two-point density: brute-force adjudication and normalization") {
    const double s1 = 16.0, s4 = 1.0;
    // Pointwise match across the support, including beyond w = s1 + s4 where
    // the uncapped closed form would diverge from the true density.
    for (int i = 1; i <= 20; ++i) {
        const double w = 2.0 * s4 + (2.0 * s1 - 2.0 * s4) * i / 21.0;
        CHECK(std::abs(two_point_density_W(s1, s4, w) - two_point_brute(s1, s4, w)) < 1e-8);
    }
    QuadResult mass = integrate([&](double w) { return two_point_density_W(s1, s4, w); },
                                2.0 * s4, 2.0 * s1, 1e-11, 1e-11, 40000);
    CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-8));

    // The "5/4 vs 1/4" adjudication: with the 1/4 constant the closed form
    // matches the brute oracle; substituting 5/4 does not.
    const double w_mid = 10.0;
    const double v = std::min(w_mid - s4, s1) / w_mid;
    const double z_norm = 2.0 * std::pow(1.0 / std::sqrt(s4) - 1.0 / std::sqrt(s1), 2.0);
    const double quarter = 4.0 / (w_mid * w_mid) * (v - 0.5) /
                           std::sqrt(0.25 - (v - 0.5) * (v - 0.5)) / z_norm;
    const double five_quarter = 4.0 / (w_mid * w_mid) * (v - 0.5) /
                                std::sqrt(1.25 - (v - 0.5) * (v - 0.5)) / z_norm;
    const double brute = two_point_brute(s1, s4, w_mid);
    CHECK(std::abs(quarter - brute) < 1e-10);
    CHECK(std::abs(five_quarter - brute) > 1e-3);

    // Boundary behaviour and rejections.
    CHECK(two_point_density_W(s1, s4, 2.0 * s4) == 0.0);
    CHECK(two_point_density_W(s1, s4, 2.0 * s1 + 0.1) == 0.0);
    const double w_edge = 2.0 * s4 * (1.0 + 1e-6);
    CHECK(std::abs(two_point_density_W(s1, s4, w_edge) - two_point_brute(s1, s4, w_edge)) < 1e-7);
    CHECK_THROWS_AS(two_point_density_W(1.0, 2.0, 3.0), std::domain_error);
}

TEST_CASE("two-point density: moment test functions against the 2D oracle") {
    const double s1 = 16.0, s4 = 1.0;
    const double z_norm = 2.0 * std::pow(1.0 / std::sqrt(s4) - 1.0 / std::sqrt(s1), 2.0);
    for (int pw = 0; pw <= 2; ++pw) {
        QuadResult got = integrate(
            [&](double w) { return std::pow(w, pw) * two_point_density_W(s1, s4, w); }, 2.0 * s4,
            2.0 * s1, 1e-11, 1e-11, 40000);
        auto inner = [&](double s2) {
            QuadResult q3 = integrate(
                [&](double s3) {
                    return std::pow(s2 + s3, pw) * std::pow(s2, -1.5) * std::pow(s3, -1.5);
                },
                s4, s2, 1e-12, 1e-11, 8000);
            return q3.value;
        };
        QuadResult ref = integrate(inner, s4, s1, 1e-11, 1e-10, 8000);
        CHECK(std::abs(got.value - ref.value / z_norm) < 1e-7 * std::max(1.0, std::abs(got.value)));
    }
}

TEST_CASE("three-point density: brute 3D adjudication and normalization") {
    const double s1 = 16.0, s5 = 1.0;
    QuadratureSpec spec;
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-10;
    for (double z : {3.5, 6.0, 12.0, 20.0, 30.0, 40.0, 47.0})
        CHECK(std::abs(three_point_density_Z(s1, s5, z, spec) - three_point_brute(s1, s5, z)) <
              1e-6);
    QuadResult mass = integrate([&](double z) { return three_point_density_Z(s1, s5, z, spec); },
                                3.0 * s5, 3.0 * s1, 1e-9, 1e-8, 8000);
    CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(three_point_density_Z(s1, s5, 3.0 * s1 - 1e-9, spec) < 1e-6);  // vanishing slice
    CHECK_THROWS_AS(three_point_density_Z(1.0, 2.0, 4.0, spec), std::domain_error);
}

TEST_CASE("g_ellk branches") {
    ConditionalConfig cfg;
    cfg.ell = 9;
    cfg.a0 = 0.3;
    cfg.k = 1;
    // At or below the cutoff radius (a0*ell)^{1/d}: exactly zero.
    const double r_cut = std::sqrt(cfg.a0 * cfg.ell);
    CHECK(g_ellk(kMp, 0.5, r_cut, cfg) == 0.0);
    CHECK(g_ellk(kMp, 0.5, 0.9 * r_cut, cfg) == 0.0);
    // Above the cutoff: matches (1/sigma) density_Y.
    const double r = 2.0, y = 0.5;
    const RadialScale sc = radial_scale(kMp, r);
    CHECK(g_ellk(kMp, y, r, cfg) ==
          doctest::Approx(density_Y(kMp, y, r, 1).value / sc.sigma).epsilon(1e-12));
    // Large r, y = 0: nf_k / sigma.
    CHECK(g_ellk(kMp, 0.0, 4.0, cfg) ==
          doctest::Approx(density_Y(kMp, 0.0, 4.0, 1).value / radial_scale(kMp, 4.0).sigma)
              .epsilon(1e-12));
    // Outside the support: zero, not a throw.
    CHECK(g_ellk(kMp, -1e9, 2.0, cfg) == 0.0);
}

TEST_CASE("fhat: ell = 1 degenerate form") {
    ConditionalConfig cfg;
    cfg.ell = 1;
    cfg.k = 0;
    const double s = 10.0, r1 = 0.8;
    const RadialScale sc = radial_scale(kMp, r1);
    const double y = (s - std::pow(r1, -4.0) - sc.mu) / sc.sigma;
    const Estimate e = fhat_R1S(kMp, r1, s, cfg);
    CHECK(e.value ==
          doctest::Approx(first_radius_density(kMp, r1) * g_ellk(kMp, y, r1, cfg)).epsilon(1e-13));
}

TEST_CASE("fhat: reduction on vs off") {
    ConditionalConfig on;  // defaults: ell = 4, reduction enabled
    ConditionalConfig off = on;
    off.use_reduction = false;
    for (double s : {5.0, 10.0, 40.0}) {
        for (double r1 : {0.65, 0.9, 1.2}) {
            const Estimate a = fhat_R1S(kMp, r1, s, on);
            const Estimate b = fhat_R1S(kMp, r1, s, off);
            CHECK(a.value == doctest::Approx(b.value).epsilon(1e-6));
        }
    }
}

TEST_CASE("fhat against Monte Carlo integration over the radii cascade") {
    ConditionalConfig cfg;
    cfg.ell = 4;
    cfg.k = 1;
    cfg.a0 = 0.8 / 3.0;  // the larger cutoff exercises the split
    const double s = 10.0, r1 = 0.7;
    const Estimate e = fhat_R1S(kMp, r1, s, cfg);

    CounterRng rng(20240607);
    const long n = 400000;
    const double v1 = r1 * r1;
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double delta =
            (rng.exponential(kMp.d2) + rng.exponential(kMp.d2) + rng.exponential(kMp.d2));
        const double u2 = rng.uniform01(), u3 = rng.uniform01();
        const double lo = std::min(u2, u3), hi = std::max(u2, u3);
        const double v4 = v1 + delta;
        const double r4 = std::sqrt(v4);
        const double powsum = std::pow(v1, -2.0) + std::pow(v1 + delta * lo, -2.0) +
                              std::pow(v1 + delta * hi, -2.0) + std::pow(v4, -2.0);
        const RadialScale sc = radial_scale(kMp, r4);
        const double y = (s - powsum - sc.mu) / sc.sigma;
        const double g = g_ellk(kMp, y, r4, cfg);
        const double d = g - mean;
        mean += d / (i + 1);
        m2 += d * (g - mean);
    }
    const double mc = first_radius_density(kMp, r1) * mean;
    const double se = first_radius_density(kMp, r1) * std::sqrt(m2 / (n - 1) / n);
    CHECK(std::abs(e.value - mc) < 3.0 * se + e.error);
}

TEST_CASE("conditional cdf: support convention and limits") {
    ConditionalConfig cfg;
    const double s = 10.0;
    const double r_lo = std::pow(s, -0.25);
    CHECK(conditional_cdf_R1(kMp, r_lo, s, cfg).value == 0.0);
    CHECK(conditional_cdf_R1(kMp, 0.9 * r_lo, s, cfg).value == 0.0);
    // r -> infinity approaches 1 within the scheme error.
    for (double sv : {1.0, 10.0, 100.0}) {
        const Estimate tail = conditional_cdf_R1(kMp, 6.0, sv, cfg);
        CHECK(tail.value == doctest::Approx(1.0).epsilon(0.02));
    }
    // Consistency: with the scheme denominator the limit is 1 up to quadrature.
    ConditionalConfig cfg_scheme = cfg;
    cfg_scheme.fs_mode = FsMode::Scheme;
    CHECK(conditional_cdf_R1(kMp, 6.0, 10.0, cfg_scheme).value ==
          doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("fS via the scheme against the closed form") {
    ConditionalConfig cfg;
    cfg.ell = 4;
    cfg.k = 1;
    // Pilot-pinned thresholds: the k <= 1 scheme carries 0.55% / 1.6% relative
    // bias at s = 1 / 10 (Edgeworth truncation at near-unit rho); k = 2 cuts
    // both by more than an order of magnitude.
    const Estimate e1 = fS_via_scheme(kMp, 1.0, cfg);
    CHECK(std::abs(e1.value - stable_density_S(kMp, 1.0)) / stable_density_S(kMp, 1.0) < 1e-2);
    const Estimate e10 = fS_via_scheme(kMp, 10.0, cfg);
    CHECK(std::abs(e10.value - stable_density_S(kMp, 10.0)) / stable_density_S(kMp, 10.0) < 2e-2);
    ConditionalConfig cfg2 = cfg;
    cfg2.k = 2;
    const Estimate f10 = fS_via_scheme(kMp, 10.0, cfg2);
    CHECK(std::abs(f10.value - stable_density_S(kMp, 10.0)) / stable_density_S(kMp, 10.0) < 2e-3);
    // s -> 0+: vanishes.
    CHECK(fS_via_scheme(kMp, 0.05, cfg).value < 1e-8);
}

TEST_CASE("normal baseline against its own MC oracle") {
    const double s = 10.0, r1 = 0.7;
    const Estimate e = normal_baseline_R1S(kMp, r1, s);

    CounterRng rng(77);
    const long n = 400000;
    const double v1 = r1 * r1;
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double delta =
            rng.exponential(kMp.d2) + rng.exponential(kMp.d2) + rng.exponential(kMp.d2);
        const double u2 = rng.uniform01(), u3 = rng.uniform01();
        const double lo = std::min(u2, u3), hi = std::max(u2, u3);
        const double v4 = v1 + delta;
        const double powsum = std::pow(v1, -2.0) + std::pow(v1 + delta * lo, -2.0) +
                              std::pow(v1 + delta * hi, -2.0) + std::pow(v4, -2.0);
        const RadialScale sc = radial_scale(kMp, std::sqrt(v4));
        const double g = normal_pdf((s - powsum - sc.mu) / sc.sigma) / sc.sigma;
        const double d = g - mean;
        mean += d / (i + 1);
        m2 += d * (g - mean);
    }
    const double mc = first_radius_density(kMp, r1) * mean;
    const double se = first_radius_density(kMp, r1) * std::sqrt(m2 / (n - 1) / n);
    CHECK(std::abs(e.value - mc) < 3.0 * se + e.error);

    CHECK_THROWS_AS(normal_baseline_R1S(kMp, r1, s, 3), std::domain_error);
    CHECK_THROWS_AS(normal_baseline_R1S(make_params(1, 2.0), r1, s), std::domain_error);
}

TEST_CASE("normal baseline and the tilted scheme agree near the mode") {
    // Both approximate the same conditional density; near the mode of
    // f(r1 | s = 10) they should sit within a few percent of each other.
    ConditionalConfig cfg;
    cfg.ell = 4;
    cfg.k = 2;
    const double s = 10.0;
    const double r_mode = 0.62;  // near the conditional mode for s = 10
    const double a = fhat_R1S(kMp, r_mode, s, cfg).value;
    const double b = normal_baseline_R1S(kMp, r_mode, s).value;
    CHECK(std::abs(a - b) / a < 0.05);
}

TEST_CASE("fhat nonnegative, vanishes below the support radius") {
    ConditionalConfig cfg;
    const double s = 10.0;
    const double r_lo = std::pow(s, -0.25);
    CHECK(fhat_R1S(kMp, r_lo * (1.0 - 1e-12), s, cfg).value == doctest::Approx(0.0));
    for (double r1 : {0.4, 0.7, 1.1, 1.6})
        CHECK(fhat_R1S(kMp, r1, s, cfg).value >= 0.0);
}

TEST_CASE("config validation") {
    ConditionalConfig cfg;
    cfg.a0 = 0.5;  // >= 1/d2 = 1/3
    CHECK_THROWS_AS(cfg.validate(kMp), std::domain_error);
    cfg.a0 = 0.05;
    cfg.ell = 0;
    CHECK_THROWS_AS(cfg.validate(kMp), std::domain_error);
    cfg.ell = 4;
    CHECK(cfg.effective_k(kMp) == 0);  // floor(sqrt(0.2))
    cfg.a0 = 0.3;
    CHECK(cfg.effective_k(kMp) == 1);  // floor(sqrt(1.2))
}
