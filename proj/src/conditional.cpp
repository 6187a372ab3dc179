#include "shotnoise/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shotnoise/quad.hpp"
#include "shotnoise/rng.hpp"
#include "shotnoise/special.hpp"

namespace shotnoise {

int ConditionalConfig::effective_k(const ModelParams&) const {
    if (k >= 0) return k;
    return static_cast<int>(std::floor(std::sqrt(a0 * ell)));
}

void ConditionalConfig::validate(const ModelParams& mp) const {
    if (ell < 1 || ell > 12) throw std::domain_error("ConditionalConfig: ell must be in [1,12]");
    if (!(a0 > 0.0 && a0 < 1.0 / mp.d2))
        throw std::domain_error("ConditionalConfig: a0 must lie in (0, 1/d2)");
    if (k > 30) throw std::domain_error("ConditionalConfig: k > 30 rejected");
}

double g_ellk(const ModelParams& mp, double y, double r, const ConditionalConfig& cfg) {
    if (!(r > 0.0) || std::pow(r, mp.d) <= cfg.a0 * cfg.ell) return 0.0;  // cutoff branch
    const RadialScale sc = radial_scale(mp, r);
    if (y <= -mp.d3 * sc.rho * (1.0 - kSupportGuard)) return 0.0;        // outside support
    const int k = cfg.effective_k(mp);
    TiltState st;
    try {
        st = solve_xi(mp, y, r);
    } catch (const std::range_error&) {
        return 0.0;  // tilt beyond floating range: density is far below underflow
    }
    st = tilted_cumulants(st, k + 2);
    const EdgeworthTable table = build_coefficients(st, k);
    return table.nf * std::exp(st.log_prefactor) / sc.sigma;
}

namespace {

constexpr double kGammaTail = 50.0;  // d2*Delta beyond which the Gamma weight is negligible

double log_factorial(int n) {
    double v = 0.0;
    for (int i = 2; i <= n; ++i) v += std::log(static_cast<double>(i));
    return v;
}

// Gamma(shape, rate) density.
double gamma_pdf(double x, int shape, double rate) {
    if (x <= 0.0) return 0.0;
    return std::exp(shape * std::log(rate) + (shape - 1) * std::log(x) - rate * x -
                    log_factorial(shape - 1));
}

struct InnerEval {
    const ModelParams& mp;
    const ConditionalConfig& cfg;
    double s;
    double v1;
    int mids;       // ell - 2 middle coordinates
    int gl_order;
    bool normal_baseline = false;

    // Expectation of g over the middle order statistics at fixed Delta = v_ell - v1.
    double operator()(double delta) const {
        const double v_ell = v1 + delta;
        const double r_ell = std::pow(v_ell, 1.0 / mp.d);
        const RadialScale sc = radial_scale(mp, r_ell);
        const double q = mp.gamma / mp.d;
        const double base = s - std::pow(v1, -q) - std::pow(v_ell, -q) - sc.mu;

        if (mids == 0) {
            const double y = base / sc.sigma;
            return eval_g(y, r_ell);
        }
        const GaussLegendre& gl = gauss_legendre(gl_order);
        // Ordered uniforms x_(1) < ... < x_(mids) from the descending product
        // construction x_(i) = x_(i+1) * b_i, the b_i carrying weight i*b^{i-1}.
        std::vector<int> idx(static_cast<size_t>(mids), 0);
        std::vector<double> x(static_cast<size_t>(mids));
        double total = 0.0;
        for (;;) {
            double wgt = 1.0;
            double carry = 1.0;
            for (int i = mids - 1; i >= 0; --i) {
                const double b = gl.x[static_cast<size_t>(idx[static_cast<size_t>(i)])];
                carry *= b;
                x[static_cast<size_t>(i)] = carry;
                const int rank = i + 1;
                wgt *= gl.w[static_cast<size_t>(idx[static_cast<size_t>(i)])] * rank *
                       std::pow(b, rank - 1);
            }
            double powsum = 0.0;
            for (int i = 0; i < mids; ++i)
                powsum += std::pow(v1 + delta * x[static_cast<size_t>(i)], -q);
            const double y = (base - powsum) / sc.sigma;
            total += wgt * eval_g(y, r_ell);
            int c = 0;
            while (c < mids && ++idx[static_cast<size_t>(c)] == gl_order) idx[static_cast<size_t>(c++)] = 0;
            if (c == mids) break;
        }
        return total;
    }

    double eval_g(double y, double r_ell) const {
        if (normal_baseline) return normal_pdf(y) / radial_scale(mp, r_ell).sigma;
        return g_ellk(mp, y, r_ell, cfg);
    }
};

// fhat via the outer Delta quadrature with the inner tensor expectation.
Estimate fhat_tensor(const ModelParams& mp, double r1, double s, const ConditionalConfig& cfg,
                     bool normal_baseline) {
    const double v1 = std::pow(r1, mp.d);
    const int ell = cfg.ell;
    const double dcut =
        normal_baseline ? 0.0 : std::max(0.0, cfg.a0 * ell - v1);  // cutoff in v coordinates
    const double d_hi = dcut + kGammaTail / mp.d2;

    InnerEval inner{mp, cfg, s, v1, ell - 2, 16, normal_baseline};
    auto f = [&](double delta) {
        return gamma_pdf(delta, ell - 1, mp.d2) * inner(delta);
    };
    QuadResult q = integrate(f, dcut, d_hi, cfg.abs_tol, cfg.rel_tol, 600);
    // Inner-order refinement probe at the outer midpoint.
    InnerEval probe = inner;
    probe.gl_order = 10;
    const double mid = dcut + 1.0 / mp.d2;
    const double probe_gap = std::abs(inner(mid) - probe(mid)) * gamma_pdf(mid, ell - 1, mp.d2);
    const double f1 = first_radius_density(mp, r1);
    return {f1 * q.value, f1 * (q.error + probe_gap)};
}

// g(v) = (v - 1/2)/sqrt(v(1-v)): the two-point slice integral evaluated at the
// capped upper limit; zero at v = 1/2.
double slice_g(double v) {
    if (v <= 0.5) return 0.0;
    if (v >= 1.0) return 0.0;  // degenerate
    return (v - 0.5) / std::sqrt(v * (1.0 - v));
}

// fhat for ell = 4, d=2, gamma=4, with the middle pair collapsed to the
// closed-form W density.
Estimate fhat_reduced(const ModelParams& mp, double r1, double s, const ConditionalConfig& cfg) {
    const double v1 = r1 * r1;
    const double s1 = std::pow(r1, -4.0);
    const double dcut = std::max(0.0, cfg.a0 * cfg.ell - v1);
    const double d_hi = dcut + kGammaTail / mp.d2;

    auto outer = [&](double delta) {
        const double v4 = v1 + delta;
        const double r4 = std::sqrt(v4);
        const double s4 = 1.0 / (v4 * v4);
        const RadialScale sc = radial_scale(mp, r4);
        const double base = s - s1 - s4 - sc.mu;
        // y-support requires s1 + w + s4 < s (i.e. Sbar > 0).
        const double w_hi = std::min(2.0 * s1, s - s1 - s4);
        const double w_lo = 2.0 * s4;
        if (w_hi <= w_lo) return 0.0;
        auto fw = [&](double w) {
            const double y = (base - w) / sc.sigma;
            return two_point_density_W(s1, s4, w) * g_ellk(mp, y, r4, cfg);
        };
        const double split = std::min(w_hi, std::max(w_lo, s1 + s4));
        QuadResult qa = integrate(fw, w_lo, split, cfg.abs_tol, cfg.rel_tol, 240);
        QuadResult qb = split < w_hi
                            ? integrate(fw, split, w_hi, cfg.abs_tol, cfg.rel_tol, 240)
                            : QuadResult{};
        return qa.value + qb.value;
    };
    auto f = [&](double delta) { return gamma_pdf(delta, 3, mp.d2) * outer(delta); };
    QuadResult q = integrate(f, dcut, d_hi, cfg.abs_tol, cfg.rel_tol, 400);
    const double f1 = first_radius_density(mp, r1);
    return {f1 * q.value, f1 * q.error};
}

double inverse_normal_cdf(double p) {
    // Acklam's rational approximation; start value only, callers refine.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double qq = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * qq + c[1]) * qq + c[2]) * qq + c[3]) * qq + c[4]) * qq + c[5]) /
               ((((dd[0] * qq + dd[1]) * qq + dd[2]) * qq + dd[3]) * qq + 1.0);
    }
    if (p > 1.0 - plow) return -inverse_normal_cdf(1.0 - p);
    const double qq = p - 0.5;
    const double rr = qq * qq;
    return (((((a[0] * rr + a[1]) * rr + a[2]) * rr + a[3]) * rr + a[4]) * rr + a[5]) * qq /
           (((((b[0] * rr + b[1]) * rr + b[2]) * rr + b[3]) * rr + b[4]) * rr + 1.0);
}

// Regularized lower incomplete gamma P(a, x) via the kernel integral.
double gamma_p(int a, double x) {
    if (x <= 0.0) return 0.0;
    const KernelEval ke = kernel_I(static_cast<double>(a), -x);
    return std::exp(a * std::log(x) + ke.log_value - std::lgamma(static_cast<double>(a)));
}

// Quantile of Gamma(shape, 1) by Newton with a Wilson-Hilferty start.
double gamma_quantile(int shape, double p) {
    const double a = shape;
    const double z = inverse_normal_cdf(p);
    double x = a * std::pow(1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a)), 3.0);
    x = std::max(x, 1e-8);
    for (int it = 0; it < 60; ++it) {
        const double f = gamma_p(shape, x) - p;
        const double df = std::exp((a - 1.0) * std::log(x) - x - std::lgamma(a));
        double step = f / std::max(df, 1e-300);
        if (std::abs(step) > 0.5 * x) step = std::copysign(0.5 * x, step);
        x -= step;
        if (std::abs(step) < 1e-12 * std::max(1.0, x)) break;
    }
    return x;
}

constexpr int kHaltonPrimes[12] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double halton(long index, int base) {
    double f = 1.0, r = 0.0;
    long i = index;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

// Randomized QMC for ell in [5,12]: Cranley-Patterson rotated Halton points,
// error from the replicate spread.
Estimate fhat_qmc(const ModelParams& mp, double r1, double s, const ConditionalConfig& cfg) {
    const double v1 = std::pow(r1, mp.d);
    const int ell = cfg.ell;
    const int mids = ell - 2;
    const int dims = mids + 1;
    const double q = mp.gamma / mp.d;
    const double dcut = std::max(0.0, cfg.a0 * ell - v1);
    const double p_cut = gamma_p(ell - 1, mp.d2 * dcut);
    if (p_cut >= 1.0 - 1e-15) return {0.0, 0.0};

    CounterRng root(cfg.qmc_seed);
    std::vector<double> rep_means;
    rep_means.reserve(static_cast<size_t>(cfg.qmc_replicates));
    std::vector<double> shift(static_cast<size_t>(dims));
    std::vector<double> x(static_cast<size_t>(mids));
    for (int rep = 0; rep < cfg.qmc_replicates; ++rep) {
        CounterRng rng = root.stream(static_cast<std::uint64_t>(rep));
        for (int d = 0; d < dims; ++d) shift[static_cast<size_t>(d)] = rng.uniform01();
        double acc = 0.0;
        for (long i = 1; i <= cfg.qmc_points; ++i) {
            // Delta from the truncated Gamma(ell-1, d2) via its quantile.
            double u0 = halton(i, kHaltonPrimes[0]) + shift[0];
            u0 -= std::floor(u0);
            const double delta =
                gamma_quantile(ell - 1, p_cut + (1.0 - p_cut) * std::min(u0, 1.0 - 1e-12)) / mp.d2;
            const double v_ell = v1 + delta;
            const double r_ell = std::pow(v_ell, 1.0 / mp.d);
            const RadialScale sc = radial_scale(mp, r_ell);
            double carry = 1.0;
            for (int d = mids - 1; d >= 0; --d) {
                double u = halton(i, kHaltonPrimes[d + 1]) + shift[static_cast<size_t>(d + 1)];
                u -= std::floor(u);
                carry *= std::pow(u, 1.0 / (d + 1));  // descending order statistics
                x[static_cast<size_t>(d)] = carry;
            }
            double powsum = std::pow(v1, -q) + std::pow(v_ell, -q);
            for (int d = 0; d < mids; ++d)
                powsum += std::pow(v1 + delta * x[static_cast<size_t>(d)], -q);
            const double y = (s - powsum - sc.mu) / sc.sigma;
            acc += g_ellk(mp, y, r_ell, cfg);
        }
        rep_means.push_back(acc / cfg.qmc_points * (1.0 - p_cut));
    }
    double mean = 0.0;
    for (double v : rep_means) mean += v;
    mean /= rep_means.size();
    double var = 0.0;
    for (double v : rep_means) var += (v - mean) * (v - mean);
    var /= std::max<size_t>(1, rep_means.size() - 1);
    const double f1 = first_radius_density(mp, r1);
    return {f1 * mean, f1 * std::sqrt(var / rep_means.size())};
}

double fS_denominator(const ModelParams& mp, double s, const ConditionalConfig& cfg,
                      double* err_out) {
    const bool closed = mp.d == 2 && mp.gamma == 4.0;
    if (cfg.fs_mode == FsMode::ClosedForm || (cfg.fs_mode == FsMode::Auto && closed)) {
        if (!closed) throw std::domain_error("conditional: no closed-form f_S for this model");
        if (err_out) *err_out = 0.0;
        return stable_density_S(mp, s);
    }
    Estimate e = fS_via_scheme(mp, s, cfg);
    if (err_out) *err_out = e.error;
    return e.value;
}

}  // namespace

Estimate fhat_R1S(const ModelParams& mp, double r1, double s, const ConditionalConfig& cfg) {
    cfg.validate(mp);
    if (!(r1 > 0.0)) throw std::domain_error("fhat_R1S: r1 must be positive");
    if (!(s > 0.0)) throw std::domain_error("fhat_R1S: s must be positive");
    if (cfg.ell == 1) {
        const RadialScale sc = radial_scale(mp, r1);
        const double y = (s - std::pow(r1, -mp.gamma) - sc.mu) / sc.sigma;
        const double g = g_ellk(mp, y, r1, cfg);
        return {first_radius_density(mp, r1) * g, 0.0};
    }
    if (cfg.ell >= 5) return fhat_qmc(mp, r1, s, cfg);
    if (cfg.use_reduction && cfg.ell == 4 && mp.d == 2 && mp.gamma == 4.0)
        return fhat_reduced(mp, r1, s, cfg);
    return fhat_tensor(mp, r1, s, cfg, false);
}

Estimate conditional_cdf_R1(const ModelParams& mp, double r, double s,
                            const ConditionalConfig& cfg) {
    cfg.validate(mp);
    if (!(s > 0.0)) throw std::domain_error("conditional_cdf_R1: s must be positive");
    const double r_lo = std::pow(s, -1.0 / mp.gamma);
    if (r <= r_lo) return {0.0, 0.0};
    double fs_err = 0.0;
    const double fs = fS_denominator(mp, s, cfg, &fs_err);
    double acc_err = 0.0;
    auto f = [&](double r1) {
        Estimate e = fhat_R1S(mp, r1, s, cfg);
        acc_err = std::max(acc_err, e.error);
        return e.value;
    };
    QuadResult q = integrate(f, r_lo, r, fs * 1e-6, 1e-5, 240);
    const double val = q.value / fs;
    const double err = (q.error + acc_err * (r - r_lo)) / fs + val * fs_err / fs;
    return {val, err};
}

std::vector<Estimate> conditional_cdf_R1_grid(const ModelParams& mp, std::span<const double> rs,
                                              double s, const ConditionalConfig& cfg) {
    cfg.validate(mp);
    if (!(s > 0.0)) throw std::domain_error("conditional_cdf_R1_grid: s must be positive");
    const double r_lo = std::pow(s, -1.0 / mp.gamma);
    double fs_err = 0.0;
    const double fs = fS_denominator(mp, s, cfg, &fs_err);

    std::vector<size_t> order(rs.size());
    for (size_t i = 0; i < rs.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rs[a] < rs[b]; });

    std::vector<Estimate> out(rs.size());
    double cum = 0.0, cum_err = 0.0, prev = r_lo;
    double acc_err = 0.0;
    auto f = [&](double r1) {
        Estimate e = fhat_R1S(mp, r1, s, cfg);
        acc_err = std::max(acc_err, e.error);
        return e.value;
    };
    for (size_t i : order) {
        const double r = rs[i];
        if (r > prev) {
            QuadResult q = integrate(f, prev, r, fs * 1e-6, 1e-5, 240);
            cum += q.value;
            cum_err += q.error;
            prev = r;
        }
        out[i] = r <= r_lo ? Estimate{0.0, 0.0}
                           : Estimate{cum / fs, (cum_err + acc_err * (r - r_lo)) / fs +
                                                    cum / fs * fs_err / fs};
    }
    return out;
}

Estimate fS_via_scheme(const ModelParams& mp, double s, const ConditionalConfig& cfg) {
    cfg.validate(mp);
    if (!(s > 0.0)) throw std::domain_error("fS_via_scheme: s must be positive");
    const double r_lo = std::pow(s, -1.0 / mp.gamma);
    const double v_hi = (kGammaTail + 5.0) / mp.d2 + std::pow(r_lo, mp.d);
    const double r_hi = std::pow(v_hi, 1.0 / mp.d);
    double acc_err = 0.0;
    auto f = [&](double r1) {
        Estimate e = fhat_R1S(mp, r1, s, cfg);
        acc_err = std::max(acc_err, e.error);
        return e.value;
    };
    QuadResult q = integrate(f, r_lo, r_hi, cfg.abs_tol, 1e-6, 240);
    return {q.value, q.error + acc_err * (r_hi - r_lo)};
}

Estimate normal_baseline_R1S(const ModelParams& mp, double r1, double s, int n_points) {
    if (mp.d != 2 || mp.gamma != 4.0)
        throw std::domain_error("normal_baseline_R1S: stated for d=2, gamma=4 only");
    if (n_points != 4) throw std::domain_error("normal_baseline_R1S: n_points must be 4");
    if (!(r1 > 0.0) || !(s > 0.0))
        throw std::domain_error("normal_baseline_R1S: r1 and s must be positive");
    ConditionalConfig cfg;
    cfg.ell = 4;
    cfg.k = 0;
    return fhat_tensor(mp, r1, s, cfg, true);
}

double two_point_density_W(double s1, double s4, double w) {
    if (!(s4 > 0.0) || !(s4 < s1))
        throw std::domain_error("two_point_density_W: need 0 < s4 < s1");
    if (w <= 2.0 * s4 || w >= 2.0 * s1) return 0.0;
    const double z_norm = 2.0 * std::pow(1.0 / std::sqrt(s4) - 1.0 / std::sqrt(s1), 2.0);
    const double v = std::min(w - s4, s1) / w;
    return 4.0 / (w * w) * slice_g(v) / z_norm;
}

double three_point_density_Z(double s1, double s5, double z, const QuadratureSpec& spec) {
    if (!(s5 > 0.0) || !(s5 < s1))
        throw std::domain_error("three_point_density_Z: need 0 < s5 < s1");
    if (z <= 3.0 * s5 || z >= 3.0 * s1) return 0.0;
    const double z3 = 4.0 / 3.0 * std::pow(1.0 / std::sqrt(s5) - 1.0 / std::sqrt(s1), 3.0);
    // w = s3 + s4 with pair barrier s5 below and s2 = z - w above.
    const double lo = std::max(2.0 * s5, z - s1);
    const double hi = 2.0 * z / 3.0;
    if (hi <= lo) return 0.0;
    auto f = [&](double w) {
        const double s2 = z - w;
        const double cap = std::min(w - s5, s2);
        if (cap <= 0.5 * w) return 0.0;
        return std::pow(s2, -1.5) * 4.0 / (w * w) * slice_g(cap / w);
    };
    const double split = std::min(hi, std::max(lo, 0.5 * (z + s5)));  // cap switch
    QuadResult qa = integrate(f, lo, split, spec.abs_tol, spec.rel_tol, spec.max_panels);
    QuadResult qb = split < hi ? integrate(f, split, hi, spec.abs_tol, spec.rel_tol,
                                           spec.max_panels)
                               : QuadResult{};
    if (!qa.converged || !qb.converged)
        throw std::runtime_error("three_point_density_Z: quadrature failure");
    return (qa.value + qb.value) / z3;
}

}  // namespace shotnoise
