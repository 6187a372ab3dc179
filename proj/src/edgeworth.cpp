#include "shotnoise/edgeworth.hpp"

#include <cmath>

#include "shotnoise/special.hpp"

namespace shotnoise {

EdgeworthTable build_coefficients(const TiltState& st, int k) {
    if (k < 0) throw std::domain_error("build_coefficients: k must be >= 0");
    if (k > 30) throw std::domain_error("build_coefficients: k > 30 rejected");
    if (k > 0 && (st.tkappa.size() < static_cast<size_t>(k + 3)))
        throw std::domain_error("build_coefficients: tkappa must be populated to k+2");

    EdgeworthTable table;
    table.k = k;
    table.state = st;
    if (k == 0) {
        table.nf = nf_k(table);
        return table;
    }

    // b[m] = tkappa_{m+2}/(m+2)! for part size m = n-2 in [1,k].
    std::vector<double> b(static_cast<size_t>(k) + 1, 0.0);
    double fact = 2.0;  // (m+2)! running
    for (int m = 1; m <= k; ++m) {
        fact *= (m + 2);
        b[static_cast<size_t>(m)] = st.tk(m + 2) / fact;
    }

    // T[l][j] = sum over ordered compositions of j into l parts from [1,k]
    // of prod b[m_i]; c_{j,l} = T[l][j]/l!.
    table.coeff.assign(static_cast<size_t>(k) * k, 0.0);
    std::vector<double> prev(static_cast<size_t>(k) + 1, 0.0), cur(static_cast<size_t>(k) + 1);
    prev[0] = 1.0;  // l = 0
    double lfact = 1.0;
    for (int l = 1; l <= k; ++l) {
        lfact *= l;
        std::fill(cur.begin(), cur.end(), 0.0);
        for (int j = l; j <= k; ++j) {
            double tot = 0.0;
            for (int m = 1; m <= j - l + 1; ++m) tot += b[static_cast<size_t>(m)] * prev[static_cast<size_t>(j - m)];
            cur[static_cast<size_t>(j)] = tot;
            table.coeff[static_cast<size_t>((j - 1) * k + (l - 1))] = tot / lfact;
        }
        std::swap(prev, cur);
    }
    table.nf = nf_k(table);
    return table;
}

double nf_k(const EdgeworthTable& table) {
    const TiltState& st = table.state;
    const double tk2 = table.k >= 0 && st.tkappa.size() > 2
                           ? st.tk(2)
                           : st.model.d1 * kernel_I(2.0 - st.model.beta(), st.xi / st.rho).value;
    double bracket = 1.0;
    // Odd j carry H_{j+2l}(0) = 0 and are never computed (nf_{2k+1} = nf_{2k}
    // holds bit-exactly).
    for (int j = 2; j <= table.k; j += 2) {
        double inner = 0.0;
        for (int l = 1; l <= j; ++l)
            inner += table.c(j, l) * std::pow(tk2, -(0.5 * j + l)) * hermite_at_zero(j + 2 * l);
        bracket += inner / std::pow(st.rho, j);  // (-1)^j = +1 for even j
    }
    return normal_pdf(0.0) / std::sqrt(tk2) * bracket;
}

DensityValue density_Y(const ModelParams& mp, double y, double r, int k) {
    TiltState st = solve_xi(mp, y, r);
    st = tilted_cumulants(st, k + 2 >= 2 ? k + 2 : 2);
    EdgeworthTable table = build_coefficients(st, k);

    DensityValue out;
    out.value = table.nf * std::exp(st.log_prefactor);
    const double rho = st.rho;
    out.theorem_applies = r >= 1.0 && rho >= std::sqrt(static_cast<double>(k));
    if (y <= 0.0) out.theorem_applies = out.theorem_applies && rho >= static_cast<double>(k);
    return out;
}

DensityValue density_Sbar(const ModelParams& mp, double sbar, double r, int k) {
    if (!(sbar > 0.0)) throw std::domain_error("density_Sbar: sbar must be positive");
    const RadialScale sc = radial_scale(mp, r);
    DensityValue out = density_Y(mp, (sbar - sc.mu) / sc.sigma, r, k);
    out.value /= sc.sigma;
    return out;
}

double error_bound_form(const ModelParams& mp, const TiltState& st, int k, double C2, double C3) {
    const double kk = k == 0 ? 1.0 : std::pow(static_cast<double>(k), 0.5 * k);
    const double tk2 = st.tkappa.size() > 2
                           ? st.tk(2)
                           : mp.d1 * kernel_I(2.0 - mp.beta(), st.xi / st.rho).value;
    const double head = C2 * std::pow(C3, k) * kk;
    if (st.y >= 0.0) return head / std::pow(std::sqrt(tk2) * st.rho, k + 1);
    return head * std::pow(std::pow(tk2, 1.0 / mp.d1 - 0.5) / st.rho, k + 1);
}

}  // namespace shotnoise
