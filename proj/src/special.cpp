#include "shotnoise/special.hpp"

#include <cmath>
#include <limits>

namespace shotnoise {

namespace {

constexpr double kOverflowX = 705.0;
constexpr int kMaxTerms = 100000;

// Neumaier-compensated accumulator.
struct Kahan {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double total() const { return sum + comp; }
};

// sum_k x^k/(k!(a+k)) for x >= 0; all terms positive.
double series_nonneg(double a, double x) {
    Kahan acc;
    double term = 1.0;  // x^k/k!
    for (int k = 0;; ++k) {
        const double contrib = term / (a + k);
        acc.add(contrib);
        term *= x / (k + 1);
        if (contrib < 1e-18 * acc.total() && k > 3) break;
        if (k >= kMaxTerms) throw std::runtime_error("kernel_I: series did not converge");
    }
    return acc.total();
}

// e^{-z}/a * sum_n z^n/((a+1)...(a+n)) for z = -x > 0; all terms positive,
// decreasing once n > z - a.
double series_kummer(double a, double z) {
    Kahan acc;
    double term = 1.0;
    acc.add(term);
    for (int n = 1;; ++n) {
        term *= z / (a + n);
        acc.add(term);
        if (term < 1e-18 * acc.total() && n > 3) break;
        if (n >= kMaxTerms) throw std::runtime_error("kernel_I: series did not converge");
    }
    return std::exp(-z) * acc.total() / a;
}

// Regularized upper incomplete gamma Q(a,z) by modified Lentz, valid z >= a+1.
double gamma_q_cf(double a, double z) {
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= std::numeric_limits<double>::epsilon()) break;
    }
    return std::exp(-z + a * std::log(z) - std::lgamma(a)) * h;
}

}  // namespace

KernelEval kernel_I(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("kernel_I: a must be positive");
    if (!std::isfinite(x)) throw std::domain_error("kernel_I: x must be finite");
    if (x > kOverflowX) throw std::range_error("kernel_I: x beyond overflow threshold");

    KernelEval out;
    out.a = a;
    out.x = x;
    if (x == 0.0) {
        out.value = 1.0 / a;
        out.log_value = -std::log(a);
        return out;
    }
    if (x > 0.0) {
        out.value = series_nonneg(a, x);
        if (!std::isfinite(out.value)) throw std::range_error("kernel_I: overflow");
        out.log_value = std::log(out.value);
        return out;
    }
    const double z = -x;
    if (z < a + 1.0) {
        out.value = series_kummer(a, z);
        out.log_value = std::log(out.value);
    } else {
        const double q = gamma_q_cf(a, z);
        const double log_head = std::lgamma(a) - a * std::log(z);
        out.log_value = log_head + std::log1p(-q);
        out.value = std::exp(out.log_value);
    }
    return out;
}

double psi0(const ModelParams& mp, double s) {
    if (!std::isfinite(s)) throw std::domain_error("psi0: s must be finite");
    if (s < -kOverflowX) throw std::range_error("psi0: overflow range");
    const double beta = mp.beta();
    if (std::abs(s) <= 10.0) {
        Kahan acc;
        double term = 0.5 * s * s;  // (-s)^n/n! at n = 2
        for (int n = 2;; ++n) {
            acc.add(term / (n - beta));
            term *= -s / (n + 1);
            if (std::abs(term) / (n + 1 - beta) < 1e-18 * std::max(std::abs(acc.total()), 1e-300) && n > 6)
                break;
            if (n >= kMaxTerms) throw std::runtime_error("psi0: series did not converge");
        }
        return acc.total();
    }
    const double inv_beta = mp.gamma / mp.d;
    return inv_beta * ((1.0 - s - std::exp(-s)) + s / (1.0 - beta) - s * kernel_I(1.0 - beta, -s).value);
}

double hermite_at_zero(int n) {
    if (n < 0) throw std::domain_error("hermite_at_zero: n must be >= 0");
    if (n % 2 != 0) return 0.0;
    double v = 1.0;
    for (int i = 1; i < n; i += 2) v *= i;  // (n-1)!!
    return (n / 2) % 2 == 0 ? v : -v;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace shotnoise
