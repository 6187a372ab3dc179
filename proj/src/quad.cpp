#include "shotnoise/quad.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace shotnoise {

namespace {

// (G7,K15) abscissae/weights on [-1,1]; Kronrod weights for all 15 nodes,
// Gauss weights nonzero on the odd-indexed subset.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

template <class Value>
void gk15(const std::function<Value(double)>& f, double a, double b, Value& k15, double& err,
          long& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    Value fc = f(c);
    Value resk = kWgk[7] * fc;
    Value resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        Value fsum = f(c - dx) + f(c + dx);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    evals += 15;
    k15 = resk * h;
    const double raw = std::abs((resk - resg) * h);
    err = std::min(raw, std::pow(200.0 * raw, 1.5));
}

template <class Value, class Result>
Result adapt(const std::function<Value(double)>& f, double a, double b, double abs_tol,
             double rel_tol, int max_intervals) {
    struct Panel {
        double err;
        double a, b;
        Value val;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    Result out;
    std::priority_queue<Panel> panels;
    Value v0;
    double e0;
    gk15(f, a, b, v0, e0, out.evals);
    panels.push({e0, a, b, v0});
    Value total = v0;
    double total_err = e0;
    int used = 1;
    while (total_err > abs_tol + rel_tol * std::abs(total)) {
        if (used >= max_intervals || panels.empty()) {
            out.converged = false;
            break;
        }
        Panel p = panels.top();
        panels.pop();
        const double m = 0.5 * (p.a + p.b);
        Value vl, vr;
        double el, er;
        gk15(f, p.a, m, vl, el, out.evals);
        gk15(f, m, p.b, vr, er, out.evals);
        total += vl + vr - p.val;
        total_err += el + er - p.err;
        panels.push({el, p.a, m, vl});
        panels.push({er, m, p.b, vr});
        ++used;
    }
    out.value = total;
    out.error = total_err;
    return out;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     double rel_tol, int max_intervals) {
    if (a == b) return {};
    return adapt<double, QuadResult>(f, a, b, abs_tol, rel_tol, max_intervals);
}

QuadResultC integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                              double b, double abs_tol, double rel_tol, int max_intervals) {
    if (a == b) return {};
    return adapt<std::complex<double>, QuadResultC>(f, a, b, abs_tol, rel_tol, max_intervals);
}

const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendre gl;
    gl.x.resize(n);
    gl.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        gl.x[i] = 0.5 * (1.0 - z);
        gl.x[n - 1 - i] = 0.5 * (1.0 + z);
        const double w = 1.0 / ((1.0 - z * z) * pp * pp);
        gl.w[i] = w;
        gl.w[n - 1 - i] = w;
    }
    auto [pos, ok] = cache.emplace(n, std::move(gl));
    return pos->second;
}

}  // namespace shotnoise
