#include "shotnoise/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shotnoise {

RadiiSample sample_radii(const ModelParams& mp, int count, std::uint64_t seed) {
    if (count < 1) throw std::domain_error("sample_radii: count must be >= 1");
    RadiiSample out;
    out.seed = seed;
    out.n = count;
    out.radii.resize(static_cast<size_t>(count));
    CounterRng rng(seed);
    double v = 0.0;  // R_i^d is a cumulative sum of Exp(d2) increments
    for (int i = 0; i < count; ++i) {
        v += rng.exponential(mp.d2);
        out.radii[static_cast<size_t>(i)] = std::pow(v, 1.0 / mp.d);
        out.power_sum += std::pow(v, -mp.gamma / mp.d);
    }
    return out;
}

double gibbs_box(const ModelParams& mp, int n) { return n * mp.d / (mp.lambda * mp.sphere_area); }

namespace {

// Samples w1 from the symmetric density ~ [w1 (w - w1)]^{-p}, p = 1 + 1/q,
// on (mq, w - mq): pick a half by symmetry, propose from the power law
// v^{-p} (closed-form inverse CDF), accept with ((w - v) * 2/w)^{-p} <= 1.
double pair_w1(double q, double w, double mq, CounterRng& rng) {
    const double p = 1.0 + 1.0 / q;
    const double lo = mq, hi = 0.5 * w;
    const double e = 1.0 - p;  // = -1/q
    const double lo_e = std::pow(lo, e), hi_e = std::pow(hi, e);
    double v;
    for (;;) {
        v = std::pow(lo_e + rng.uniform01() * (hi_e - lo_e), 1.0 / e);
        if (rng.uniform01() < std::pow((w - v) * 2.0 / w, -p)) break;
    }
    return rng.uniform01() < 0.5 ? v : w - v;
}

}  // namespace

std::pair<double, double> pair_resample(double gamma_over_d, double w, double m, CounterRng& rng) {
    const double q = gamma_over_d;
    const double mq = std::pow(m, -q);
    if (!(w > 2.0 * mq)) throw std::domain_error("pair_resample: infeasible w <= 2 m^{-q}");
    const double w1 = pair_w1(q, w, mq, rng);
    const double ua = std::pow(w1, -1.0 / q);
    const double ub = std::pow(w - w1, -1.0 / q);
    return ua <= ub ? std::make_pair(ua, ub) : std::make_pair(ub, ua);
}

std::pair<double, double> pair_resample(double gamma_over_d, double w, double m,
                                        std::uint64_t seed) {
    CounterRng rng(seed);
    return pair_resample(gamma_over_d, w, m, rng);
}

GibbsChainState gibbs_init(const ModelParams& mp, int n, double m, double s) {
    if (n < 2) throw std::domain_error("gibbs_init: n must be >= 2");
    const double q = mp.gamma / mp.d;
    const double mq = std::pow(m, -q);
    if (!(s > n * mq)) throw std::domain_error("gibbs_init: infeasible s <= n m^{-gamma/d}");
    GibbsChainState st;
    st.m = m;
    st.s = s;
    st.u.assign(static_cast<size_t>(n), 0.0);

    const double u_eq = std::pow(s / n, -1.0 / q);
    if (u_eq < m) {
        std::fill(st.u.begin(), st.u.end(), u_eq);
    } else {
        // Waterfall: park coordinates just inside the box, dump the remaining
        // constraint mass into the last one.
        double rem = s;
        const double u_hi = m * (1.0 - 1e-9);
        const double w_hi = std::pow(u_hi, -q);
        for (int j = 0; j < n - 1; ++j) {
            st.u[static_cast<size_t>(j)] = u_hi;
            rem -= w_hi;
        }
        if (!(rem > w_hi)) throw std::domain_error("gibbs_init: no feasible start found");
        st.u[static_cast<size_t>(n - 1)] = std::pow(rem, -1.0 / q);
    }
    return st;
}

void gibbs_run(const ModelParams& mp, GibbsChainState& st, long sweeps, CounterRng& rng) {
    const int n = static_cast<int>(st.u.size());
    const double q = mp.gamma / mp.d;
    const double mq = std::pow(st.m, -q);
    std::vector<double> w(st.u.size());
    for (size_t j = 0; j < st.u.size(); ++j) w[j] = std::pow(st.u[j], -q);
    std::vector<int> perm(st.u.size());
    std::iota(perm.begin(), perm.end(), 0);

    int last_updated = 0;
    for (long sweep = 0; sweep < sweeps; ++sweep) {
        for (int j = n - 1; j > 0; --j)
            std::swap(perm[static_cast<size_t>(j)],
                      perm[static_cast<size_t>(rng.next_u64() % static_cast<std::uint64_t>(j + 1))]);
        for (int p = 0; p + 1 < n; p += 2) {
            const int a = perm[static_cast<size_t>(p)];
            const int b = perm[static_cast<size_t>(p + 1)];
            const double wab = w[static_cast<size_t>(a)] + w[static_cast<size_t>(b)];
            if (!(wab > 2.0 * mq)) continue;  // pair stuck at the box edge
            const double w1 = pair_w1(q, wab, mq, rng);
            w[static_cast<size_t>(a)] = w1;
            w[static_cast<size_t>(b)] = wab - w1;
            last_updated = b;
        }
        // Re-impose the constraint exactly on the last updated coordinate.
        double sum = 0.0;
        for (double wj : w) sum += wj;
        st.max_drift = std::max(st.max_drift, std::abs(sum - st.s) / st.s);
        const size_t fix = static_cast<size_t>(last_updated);
        const double fixed = w[fix] + (st.s - sum);
        if (fixed > mq) w[fix] = fixed;
        ++st.sweep_count;
    }
    for (size_t j = 0; j < st.u.size(); ++j) st.u[j] = std::pow(w[j], -1.0 / q);
}

GibbsChainState gibbs_conditional(const ModelParams& mp, int n, double m, double s, long sweeps,
                                  std::uint64_t seed) {
    GibbsChainState st = gibbs_init(mp, n, m, s);
    CounterRng rng(seed);
    gibbs_run(mp, st, sweeps, rng);
    return st;
}

namespace {

// Z_h(w) = int h(w') h(w - w') dw' over (m^{-q}, w - m^{-q}) for q = 2,
// h(w) = (1/2) w^{-3/2}; closed form via the two-point antiderivative.
double pair_mass_q2(double w, double mq) {
    const double v = (w - mq) / w;
    if (v <= 0.5) return 0.0;
    return 2.0 / (w * w) * (v - 0.5) / std::sqrt(v * (1.0 - v));
}

}  // namespace

void gibbs_run_poisson(const ModelParams& mp, GibbsChainState& st, long sweeps, CounterRng& rng) {
    const double q = mp.gamma / mp.d;
    if (q != 2.0) throw std::domain_error("gibbs_run_poisson: only gamma = 2d supported");
    const double mq = std::pow(st.m, -q);
    const double nu = mp.d2;  // v-space intensity; mean count d2 * m
    auto h = [](double w) { return 0.5 * std::pow(w, -1.5); };

    std::vector<double> w;
    w.reserve(st.u.size() * 2);
    for (double u : st.u) w.push_back(std::pow(u, -q));
    std::vector<int> perm;

    for (long sweep = 0; sweep < sweeps; ++sweep) {
        int n = static_cast<int>(w.size());
        // Disjoint-pair conditional redraws.
        perm.resize(static_cast<size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        for (int j = n - 1; j > 0; --j)
            std::swap(perm[static_cast<size_t>(j)],
                      perm[static_cast<size_t>(rng.next_u64() % static_cast<std::uint64_t>(j + 1))]);
        for (int p = 0; p + 1 < n; p += 2) {
            const int a = perm[static_cast<size_t>(p)], b = perm[static_cast<size_t>(p + 1)];
            const double wab = w[static_cast<size_t>(a)] + w[static_cast<size_t>(b)];
            if (!(wab > 2.0 * mq)) continue;
            const double w1 = pair_w1(q, wab, mq, rng);
            w[static_cast<size_t>(a)] = w1;
            w[static_cast<size_t>(b)] = wab - w1;
        }
        // Split/merge attempts (count moves).
        const int attempts = std::max(2, n / 2);
        for (int t = 0; t < attempts; ++t) {
            n = static_cast<int>(w.size());
            if (rng.uniform01() < 0.5) {
                // Split w_j into (w', w_j - w') drawn from the pair conditional.
                const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
                const double wj = w[static_cast<size_t>(j)];
                if (!(wj > 2.0 * mq)) continue;
                const double accept = nu * pair_mass_q2(wj, mq) / ((n + 1.0) * h(wj));
                if (rng.uniform01() < accept) {
                    const double w1 = pair_w1(q, wj, mq, rng);
                    w[static_cast<size_t>(j)] = w1;
                    w.push_back(wj - w1);
                }
            } else if (n >= 2) {
                // Merge a uniformly chosen unordered pair.
                const int a = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
                int b = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n - 1));
                if (b >= a) ++b;
                const double wc = w[static_cast<size_t>(a)] + w[static_cast<size_t>(b)];
                const double accept = n * h(wc) / (nu * pair_mass_q2(wc, mq));
                if (rng.uniform01() < accept) {
                    w[static_cast<size_t>(std::max(a, b))] = w.back();
                    w.pop_back();
                    w[static_cast<size_t>(std::min(a, b))] = wc;  // min(a,b) < new size always
                }
            }
        }
        // Constraint renormalization on an arbitrary coordinate.
        double sum = 0.0;
        for (double wj : w) sum += wj;
        st.max_drift = std::max(st.max_drift, std::abs(sum - st.s) / st.s);
        const double fixed = w.back() + (st.s - sum);
        if (fixed > mq) w.back() = fixed;
        ++st.sweep_count;
    }
    st.u.resize(w.size());
    for (size_t j = 0; j < w.size(); ++j) st.u[j] = std::pow(w[j], -1.0 / q);
}

double effective_sample_size(std::span<const double> series) {
    const size_t n = series.size();
    if (n < 8) return static_cast<double>(n);
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    if (var <= 0.0) return static_cast<double>(n);
    double tau = 1.0;
    const size_t max_lag = std::min<size_t>(n / 4, 2000);
    for (size_t lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (size_t i = 0; i + lag < n; ++i) c += (series[i] - mean) * (series[i + lag] - mean);
        const double rho = c / var;
        if (rho < 0.02) break;
        tau += 2.0 * rho;
    }
    return static_cast<double>(n) / tau;
}

DominanceReport dominance_test(const ModelParams& mp, int n, double m, double s, int ell,
                               long draws, std::uint64_t seed, double escape_a) {
    if (ell < 2 || ell > n) throw std::domain_error("dominance_test: need 2 <= ell <= n");
    DominanceReport rep;
    rep.ell = ell;
    rep.s = s;
    rep.escape_a = escape_a;

    // Conditional sample of R_ell from the Gibbs chain.
    GibbsChainState st = gibbs_init(mp, n, m, s);
    CounterRng rng(seed);
    const long burn = 100L * n;
    gibbs_run(mp, st, burn, rng);
    const int thin = 4;
    std::vector<double> r_cond;
    r_cond.reserve(static_cast<size_t>(draws));
    std::vector<double> sorted(st.u.size());
    for (long i = 0; i < draws; ++i) {
        gibbs_run(mp, st, thin, rng);
        sorted = st.u;
        std::nth_element(sorted.begin(), sorted.begin() + (ell - 1), sorted.end());
        r_cond.push_back(std::pow(sorted[static_cast<size_t>(ell - 1)], 1.0 / mp.d));
    }
    rep.ess = effective_sample_size(r_cond);

    // Unconditional R'_{ell-1}.
    CounterRng uncond_root = CounterRng(seed).stream(0xDECADEull);
    std::vector<double> r_unc;
    r_unc.reserve(static_cast<size_t>(draws));
    for (long i = 0; i < draws; ++i) {
        CounterRng child = uncond_root.stream(static_cast<std::uint64_t>(i));
        double v = 0.0;
        for (int j = 0; j < ell - 1; ++j) v += child.exponential(mp.d2);
        r_unc.push_back(std::pow(v, 1.0 / mp.d));
    }

    std::vector<double> qs = r_cond;
    std::sort(qs.begin(), qs.end());
    std::sort(r_unc.begin(), r_unc.end());
    auto ecdf = [](const std::vector<double>& sorted_v, double x) {
        return static_cast<double>(std::upper_bound(sorted_v.begin(), sorted_v.end(), x) -
                                   sorted_v.begin()) /
               static_cast<double>(sorted_v.size());
    };
    for (int dec = 1; dec <= 9; ++dec) {
        const double x = qs[static_cast<size_t>(qs.size() * dec / 10)];
        const double fc = ecdf(qs, x);
        const double fu = ecdf(r_unc, x);
        const double se = std::sqrt(fc * (1.0 - fc) / std::max(rep.ess, 1.0) +
                                    fu * (1.0 - fu) / static_cast<double>(draws));
        rep.grid.push_back(x);
        rep.cdf_cond.push_back(fc);
        rep.cdf_uncond.push_back(fu);
        rep.band.push_back(3.0 * se);
        if (fc > fu + 3.0 * se) ++rep.violations;
    }
    rep.escape_prob = ecdf(qs, std::pow(escape_a * ell, 1.0 / mp.d));
    return rep;
}

}  // namespace shotnoise
