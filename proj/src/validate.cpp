#include "shotnoise/validate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "shotnoise/conditional.hpp"
#include "shotnoise/edgeworth.hpp"
#include "shotnoise/model.hpp"
#include "shotnoise/oracle.hpp"
#include "shotnoise/quad.hpp"
#include "shotnoise/rng.hpp"
#include "shotnoise/sampler.hpp"
#include "shotnoise/special.hpp"
#include "shotnoise/tilt.hpp"

namespace shotnoise {

namespace {

struct Suite {
    std::vector<CheckResult> results;
    std::string module;
    // `measured` must stay at or below `bound` to pass.
    void check(const std::string& name, double measured, double bound, std::string note = "") {
        results.push_back({module, name, measured <= bound, measured, bound, std::move(note)});
    }
    void check_true(const std::string& name, bool ok, std::string note = "") {
        results.push_back({module, name, ok, ok ? 0.0 : 1.0, 0.5, std::move(note)});
    }
};

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void core_model_checks(Suite& s) {
    s.module = "core-model";
    const ModelParams mp = make_params(2, 4.0);
    s.check("lambda normalization", rel_gap(mp.lambda, 3.0 / M_PI), 1e-15);
    s.check("d1 d2 d3 (2,4)",
            std::max({std::abs(mp.d1 - 1.5), std::abs(mp.d2 - 3.0), std::abs(mp.d3 - 3.0)}),
            1e-15);

    // kappa_1/sqrt(kappa_2) = d3 * r^{d/2}; kappa_n * r^{gamma n - d} constant in r.
    double worst = 0.0;
    for (double r : {0.5, 1.0, 2.0, 4.0})
        worst = std::max(worst, rel_gap(cumulant(mp, r, 1) / std::sqrt(cumulant(mp, r, 2)),
                                        mp.d3 * std::pow(r, 0.5 * mp.d)));
    s.check("mean-to-sd ratio", worst, 1e-13);
    worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const double ref = cumulant(mp, 1.0, n);
        for (double r : {0.5, 2.0, 4.0}) {
            if (!(cumulant(mp, r, n) > 0.0)) worst = 1.0;
            worst = std::max(worst,
                             rel_gap(cumulant(mp, r, n) * std::pow(r, mp.gamma * n - mp.d), ref));
        }
    }
    s.check("kappa_n scaling", worst, 1e-12);

    // Normalizations.
    QuadResult qs = integrate([&](double x) { return stable_density_S(mp, x); }, 1e-6, 1e7,
                              1e-11, 1e-11, 20000);
    s.check("stable density mass", std::abs(qs.value - 1.0), 1e-9);
    QuadResult qr = integrate([&](double x) { return first_radius_density(mp, x); }, 0.0, 12.0,
                              1e-12, 1e-12, 20000);
    s.check("first radius mass", std::abs(qr.value - 1.0), 1e-10);

    // Marginalizing the joint over r2, r3 recovers f_{R1} (ell = 3).
    const double r1 = 0.8;
    auto inner = [&](double r2) {
        QuadResult q3 = integrate(
            [&](double r3) {
                const double rr[3] = {r1, r2, r3};
                return joint_radii_density(mp, rr);
            },
            r2 * (1 + 1e-12), 10.0, 1e-10, 1e-9, 4000);
        return q3.value;
    };
    QuadResult q2 = integrate(inner, r1 * (1 + 1e-12), 10.0, 1e-9, 1e-8, 2000);
    s.check("joint marginalization", std::abs(q2.value - first_radius_density(mp, r1)), 1e-6);
}

void special_checks(Suite& s, std::uint64_t seed) {
    s.module = "special-fn";
    // Recurrence x I(a+1,x) = e^x - a I(a,x).
    CounterRng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        const double a = rng.uniform(0.5, 8.0);
        const double x = rng.uniform(-50.0, 50.0);
        const double lhs = x * kernel_I(a + 1.0, x).value;
        const double rhs = std::exp(x) - a * kernel_I(a, x).value;
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), std::exp(x) * 1e-3));
    }
    s.check("kernel recurrence", worst, 1e-11);

    // Against adaptive quadrature on an (a,x) grid; u = v^{1/a} removes the
    // endpoint singularity.
    worst = 0.0;
    for (double a : {0.3, 0.7, 1.5, 2.5, 3.5, 5.5, 8.0, 12.0, 20.0, 31.5}) {
        for (double x : {-300.0, -40.0, -11.0, -3.0, -0.5, 0.0, 0.5, 3.0, 11.0, 40.0}) {
            const double inv_a = 1.0 / a;
            QuadResult q = integrate(
                [&](double v) { return std::exp(x * std::pow(v, inv_a)) * inv_a; }, 0.0, 1.0,
                1e-300, 1e-13, 20000);
            worst = std::max(worst, rel_gap(kernel_I(a, x).value, q.value));
        }
    }
    s.check("kernel vs quadrature grid", worst, 1e-12);

    const ModelParams mp = make_params(2, 4.0);
    worst = 0.0;
    for (double x : {-20.0, -12.0, -5.0, -1.0, 0.25, 1.0, 5.0, 12.0, 20.0}) {
        QuadResult q = integrate(
            [&](double v) {
                const double u = v * v;
                const double f = std::expm1(-x * u) + x * u;  // e^{-su} - 1 + su
                return f * std::pow(u, -1.0 - mp.beta()) * 2.0 * v;
            },
            0.0, 1.0, 1e-300, 1e-13, 20000);
        worst = std::max(worst, rel_gap(psi0(mp, x), q.value));
    }
    s.check("psi0 vs quadrature", worst, 1e-12);
    s.check("psi0(0)", std::abs(psi0(mp, 0.0)), 0.0);
    s.check_true("psi0 positive for s > 0",
                 psi0(mp, 0.3) > 0 && psi0(mp, 3.0) > 0 && psi0(mp, 30.0) > 0);

    // Hermite at zero against the three-term recurrence He_{n+1}(0) = -n He_{n-1}(0).
    worst = 0.0;
    double hm1 = 1.0, hm2 = 0.0;  // He_0(0), He_{-1} placeholder
    for (int n = 1; n <= 40; ++n) {
        const double hn = n >= 2 ? -(n - 1) * hm2 : 0.0;
        worst = std::max(worst, std::abs(hermite_at_zero(n) - hn));
        hm2 = hm1;
        hm1 = hn;
    }
    s.check("hermite recurrence", worst, 0.0);
}

void tilt_checks(Suite& s, std::uint64_t seed) {
    s.module = "tilt";
    const ModelParams mp = make_params(2, 4.0);

    // Strict monotonicity of y -> xi on a 50-point grid.
    const double r = 2.0, rho = 2.0;
    bool mono = true;
    double prev = -1e300;
    for (int i = 0; i < 50; ++i) {
        const double y = -mp.d3 * rho + 0.1 + (10.0 + mp.d3 * rho - 0.1) * i / 49.0;
        const double xi = solve_xi(mp, y, r).xi;
        if (xi <= prev) mono = false;
        prev = xi;
    }
    s.check_true("xi monotone in y", mono);

    // Scale coupling: xi(y,r)/rho depends on y/rho only.
    double worst = 0.0;
    for (auto [ra, rb] : {std::pair{1.0, 4.0}, std::pair{2.0, 8.0}}) {
        const double rho_a = ra, rho_b = rb;  // d = 2
        for (double y : {-1.5, 0.3, 2.0}) {
            const double xa = solve_xi(mp, y, ra).xi / rho_a;
            const double xb = solve_xi(mp, y * rho_b / rho_a, rb).xi / rho_b;
            worst = std::max(worst, std::abs(xa - xb));
        }
    }
    s.check("scale coupling", worst, 1e-10);

    // tkappa chain decreasing; derivative identity dy/dxi = tkappa_2.
    CounterRng rng(seed);
    bool chain = true;
    double fd_worst = 0.0;
    for (int i = 0; i < 60; ++i) {
        const double rr = rng.uniform(1.0, 6.0);
        const double rrho = std::pow(rr, 0.5 * mp.d);
        const double y = rng.uniform(-0.8 * mp.d3 * rrho, 6.0);
        TiltState st = tilted_cumulants(solve_xi(mp, y, rr), 11);
        for (int n = 2; n <= 10; ++n)
            if (st.tk(n) < st.tk(n + 1)) chain = false;
        const double h = 1e-5 * std::max(1.0, std::abs(y));
        const double xi_hi = solve_xi(mp, y + h, rr).xi;
        const double xi_lo = solve_xi(mp, y - h, rr).xi;
        fd_worst = std::max(fd_worst, rel_gap(2.0 * h / (xi_hi - xi_lo), st.tk(2)));
    }
    s.check_true("tkappa chain decreasing", chain);
    s.check("dy/dxi = tkappa2 (finite diff)", fd_worst, 1e-5);

    // Legendre optimality: perturbed xi gives a larger exponent.
    bool opt = true;
    for (double y : {-2.0, 1.0, 3.0}) {
        TiltState st = solve_xi(mp, y, 2.0);
        const double x = st.xi / st.rho;
        for (double dxi : {-0.01, 0.01}) {
            const double xp = x + dxi / st.rho;
            const double lp_pert =
                st.rho * st.rho * (-(xp) * (y / st.rho) + mp.d1 * psi0(mp, -xp));
            if (lp_pert < st.log_prefactor - 1e-12) opt = false;
        }
    }
    s.check_true("prefactor argmin", opt);
}

void edgeworth_checks(Suite& s, std::uint64_t seed) {
    s.module = "edgeworth";
    const ModelParams mp = make_params(2, 4.0);
    CounterRng rng(seed);

    // Coefficient bounds (upper tail and lower tail variants); parity.
    double worst_upper = 0.0, worst_lower = 0.0, worst_parity = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double r = rng.uniform(1.0, 5.0);
        const double rho = std::pow(r, 0.5 * mp.d);
        const double y = rng.uniform(-0.8 * mp.d3 * rho, 5.0);
        const int k = 6;
        TiltState st = tilted_cumulants(solve_xi(mp, y, r), k + 2);
        EdgeworthTable t = build_coefficients(st, k);
        double fj = 1.0;
        for (int j = 1; j <= k; ++j) {
            fj *= j;
            double fl = 1.0;
            for (int l = 1; l <= j; ++l) {
                fl *= l;
                const double c = t.c(j, l);
                if (c < 0.0) worst_upper = std::max(worst_upper, -c);
                const double bnd =
                    std::pow(st.tk(3), l) * std::pow(static_cast<double>(l), j) / (fl * fj);
                worst_upper = std::max(worst_upper, c - bnd);
                if (y < 0.0) {
                    const double zr = -st.xi / st.rho;
                    double binom = 1.0;  // (j+l-1)!/(l!(l-1)!j!) via lgamma
                    binom = std::exp(std::lgamma(j + l) - std::lgamma(l + 1.0) - std::lgamma(l) -
                                     std::lgamma(j + 1.0));
                    const double bnd2 = std::pow(st.tk(2), l) * std::pow(zr, -j) * binom;
                    worst_lower = std::max(worst_lower, c - bnd2);
                }
            }
        }
        // nf parity across adjacent orders.
        for (int kk : {0, 2, 4}) {
            TiltState st2 = tilted_cumulants(st, kk + 3);
            const double even = build_coefficients(st2, kk).nf;
            const double odd = build_coefficients(st2, kk + 1).nf;
            worst_parity = std::max(worst_parity, std::abs(even - odd));
        }
    }
    s.check("coefficient bound (Lemma-3.2 form)", worst_upper, 1e-15);
    s.check("lower-tail coefficient bound", worst_lower, 1e-15);
    s.check("nf parity bit-exact", worst_parity, 0.0);

    // Upper-tail error improves away from the mean (r=4, k=2).
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-12;
    const double f0 = invert_density(mp, 0.0, 4.0, spec, true);
    const double f4 = invert_density(mp, 4.0, 4.0, spec, true);
    const double e0 = rel_gap(density_Y(mp, 0.0, 4.0, 2).value, f0);
    const double e4 = rel_gap(density_Y(mp, 4.0, 4.0, 2).value, f4);
    s.check("tail improvement at r=4,k=2", e4, e0);
}

void oracle_checks(Suite& s) {
    s.module = "oracle";
    const ModelParams mp = make_params(2, 4.0);
    QuadratureSpec spec;

    s.check("cf at 0", std::abs(cf_Y(mp, 2.0, 0.0) - 1.0), 1e-14);
    double worst = 0.0;
    for (double t : {0.3, 1.7, 5.0}) {
        const std::complex<double> a = cf_Y(mp, 2.0, t);
        const std::complex<double> b = std::conj(cf_Y(mp, 2.0, -t));
        worst = std::max(worst, std::abs(a - b));
        worst = std::max(worst, std::max(0.0, std::abs(a) - 1.0));
    }
    s.check("cf conjugate symmetry, |cf|<=1", worst, 1e-13);

    // Standardization via central differences at 0.
    const double h = 1e-4;
    const std::complex<double> cp = cf_Y(mp, 2.0, h), cm = cf_Y(mp, 2.0, -h);
    const std::complex<double> d1c = (cp - cm) / (2.0 * h);
    const std::complex<double> d2c = (cp - 2.0 * cf_Y(mp, 2.0, 0.0) + cm) / (h * h);
    s.check("cf mean 0", std::abs(d1c), 1e-6);
    s.check("cf variance 1", std::abs(d2c + 1.0), 1e-6);

    // Decay envelope beyond rho/2 with the conservative constant.
    bool env = true;
    for (double t : {1.5, 3.0, 8.0, 20.0}) {
        const double rho = 2.0;
        const double c_t = -std::log(std::abs(cf_Y(mp, 2.0, t))) /
                           (std::pow(rho, mp.d1) * std::pow(t, mp.beta()));
        if (!(c_t > 0.05)) env = false;
    }
    s.check_true("cf decay envelope", env);

    // Self-consistency: halving the tolerance moves the inversion < abs_tol.
    QuadratureSpec tight = spec;
    tight.abs_tol = 5e-11;
    tight.rel_tol = 5e-11;
    const double va = invert_density(mp, 1.0, 2.0, spec, false);
    const double vb = invert_density(mp, 1.0, 2.0, tight, false);
    s.check("inversion self-consistency", std::abs(va - vb), spec.abs_tol);

    // Tilted and direct paths agree.
    worst = 0.0;
    QuadratureSpec spec9;
    spec9.abs_tol = 1e-12;
    spec9.rel_tol = 1e-12;
    for (double r : {2.0, 4.0})
        for (double y : {-4.0, -2.0, 0.0, 1.0, 4.0})
            worst = std::max(worst, std::abs(invert_density(mp, y, r, spec9, false) -
                                             invert_density(mp, y, r, spec9, true)));
    s.check("direct vs tilted path", worst, 1e-9);
}

void conditional_checks(Suite& s) {
    s.module = "conditional";
    const double s1 = 16.0, s4 = 1.0;

    QuadResult mass = integrate([&](double w) { return two_point_density_W(s1, s4, w); },
                                2.0 * s4, 2.0 * s1, 1e-11, 1e-11, 20000);
    s.check("two-point mass", std::abs(mass.value - 1.0), 1e-8);

    // Pointwise against the brute slice integral int s2^{-3/2} (w-s2)^{-3/2}.
    const double z_norm = 2.0 * std::pow(1.0 / std::sqrt(s4) - 1.0 / std::sqrt(s1), 2.0);
    double worst = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double w = 2.0 * s4 + (2.0 * s1 - 2.0 * s4) * i / 21.0;
        const double hi = std::min(w - s4, s1);
        QuadResult q = integrate(
            [&](double s2) { return std::pow(s2, -1.5) * std::pow(w - s2, -1.5); }, 0.5 * w, hi,
            1e-14, 1e-12, 20000);
        worst = std::max(worst, std::abs(two_point_density_W(s1, s4, w) - q.value / z_norm));
    }
    s.check("two-point vs brute slice", worst, 1e-8);

    // Moments against the 2D oracle through the slice decomposition.
    double worst_mom = 0.0;
    for (int pw = 0; pw <= 2; ++pw) {
        QuadResult got = integrate(
            [&](double w) { return std::pow(w, pw) * two_point_density_W(s1, s4, w); }, 2.0 * s4,
            2.0 * s1, 1e-11, 1e-11, 20000);
        // E[(S2+S3)^pw] by direct 2D quadrature of the simplex density.
        auto inner = [&](double s2) {
            QuadResult q3 = integrate(
                [&](double s3) {
                    return std::pow(s2 + s3, pw) * std::pow(s2, -1.5) * std::pow(s3, -1.5);
                },
                s4, s2, 1e-12, 1e-11, 8000);
            return q3.value;
        };
        QuadResult ref = integrate(inner, s4, s1, 1e-11, 1e-10, 8000);
        worst_mom = std::max(worst_mom, std::abs(got.value - ref.value / z_norm) /
                                            std::max(1.0, std::abs(got.value)));
    }
    s.check("two-point moments vs 2D oracle", worst_mom, 1e-7);

    QuadratureSpec zspec;
    zspec.abs_tol = 1e-10;
    zspec.rel_tol = 1e-10;
    const double s5 = 1.0;
    QuadResult zmass = integrate([&](double z) { return three_point_density_Z(s1, s5, z, zspec); },
                                 3.0 * s5, 3.0 * s1, 1e-8, 1e-8, 4000);
    s.check("three-point mass", std::abs(zmass.value - 1.0), 1e-6);

    // Scheme CDF is nondecreasing in r.
    const ModelParams mp = make_params(2, 4.0);
    ConditionalConfig cfg;
    bool monotone = true;
    for (double sv : {1.0, 10.0, 100.0}) {
        const double r_lo = std::pow(sv, -0.25);
        std::vector<double> rg;
        for (int i = 1; i <= 12; ++i) rg.push_back(r_lo + 0.15 * i);
        auto cdfs = conditional_cdf_R1_grid(mp, rg, sv, cfg);
        for (size_t i = 1; i < cdfs.size(); ++i)
            if (cdfs[i].value < cdfs[i - 1].value - 1e-9) monotone = false;
    }
    s.check_true("conditional cdf monotone", monotone);
}

void sampler_checks(Suite& s, std::uint64_t seed) {
    s.module = "sampler";
    const ModelParams mp = make_params(2, 4.0);

    // Exp(d2) partial-sum moments, 4-SE.
    const int n_draws = 40000, count = 6;
    double mean4 = 0.0, var4 = 0.0;
    std::vector<double> g4(static_cast<size_t>(n_draws));
    for (int i = 0; i < n_draws; ++i) {
        RadiiSample rs = sample_radii(mp, count, seed + static_cast<std::uint64_t>(i));
        g4[static_cast<size_t>(i)] = std::pow(rs.radii[3], mp.d);
    }
    for (double v : g4) mean4 += v;
    mean4 /= n_draws;
    for (double v : g4) var4 += (v - mean4) * (v - mean4);
    var4 /= n_draws - 1;
    const double se_mean = std::sqrt(4.0 / (mp.d2 * mp.d2) / n_draws);
    s.check("Gamma_4 mean", std::abs(mean4 - 4.0 / mp.d2), 4.0 * se_mean);
    s.check("Gamma_4 variance", std::abs(var4 - 4.0 / (mp.d2 * mp.d2)),
            4.0 * std::sqrt(2.0) * 4.0 / (mp.d2 * mp.d2) / std::sqrt(static_cast<double>(n_draws)));

    // Pair constraint conservation.
    CounterRng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 10.0;
        const double w = rng.uniform(2.5 * std::pow(m, -2.0), 50.0);
        auto [u1, u2] = pair_resample(2.0, w, m, rng);
        worst = std::max(worst,
                         std::abs(std::pow(u1, -2.0) + std::pow(u2, -2.0) - w) / w);
        if (u1 > u2) worst = 1.0;
    }
    s.check("pair constraint", worst, 1e-12);

    // Gibbs conservation over 10^4 sweeps.
    const int n = 16;
    GibbsChainState st = gibbs_conditional(mp, n, gibbs_box(mp, n), 40.0, 10000, seed);
    double sum = 0.0;
    for (double u : st.u) sum += std::pow(u, -2.0);
    s.check("gibbs constraint drift", std::abs(sum - st.s) / st.s, 1e-9);
}

}  // namespace

std::vector<CheckResult> run_validation(const std::string& only, std::uint64_t seed) {
    Suite suite;
    auto want = [&](const char* m) { return only.empty() || only == m; };
    if (want("core-model")) core_model_checks(suite);
    if (want("special-fn")) special_checks(suite, seed);
    if (want("tilt")) tilt_checks(suite, seed);
    if (want("edgeworth")) edgeworth_checks(suite, seed);
    if (want("oracle")) oracle_checks(suite);
    if (want("conditional")) conditional_checks(suite);
    if (want("sampler")) sampler_checks(suite, seed);
    return suite.results;
}

}  // namespace shotnoise
