#include "shotnoise/model.hpp"

#include <cmath>

namespace shotnoise {

ModelParams make_params(int d, double gamma) {
    if (d < 1) throw std::domain_error("make_params: d must be a positive integer");
    if (!(gamma > static_cast<double>(d)))
        throw std::domain_error("make_params: gamma must exceed d (S diverges otherwise)");
    ModelParams mp;
    mp.d = d;
    mp.gamma = gamma;
    mp.sphere_area = 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
    mp.lambda = (2.0 * gamma - d) / mp.sphere_area;
    const double beta = d / gamma;
    mp.d1 = 2.0 - beta;
    mp.d2 = 2.0 * gamma / d - 1.0;
    mp.d3 = mp.d1 / (1.0 - beta);
    return mp;
}

RadialScale radial_scale(const ModelParams& mp, double r) {
    if (!(r > 0.0)) throw std::domain_error("radial_scale: r must be positive");
    RadialScale sc;
    sc.r = r;
    sc.rho = std::pow(r, 0.5 * mp.d);
    sc.mu = mp.d3 * std::pow(r, mp.d - mp.gamma);
    sc.sigma = std::pow(r, 0.5 * mp.d - mp.gamma);
    sc.sigma2 = sc.sigma * sc.sigma;
    return sc;
}

double cumulant(const ModelParams& mp, double r, int n) {
    if (!(r > 0.0)) throw std::domain_error("cumulant: r must be positive");
    if (n < 1) throw std::domain_error("cumulant: n must be >= 1");
    if (n > 64) throw std::domain_error("cumulant: n > 64 not supported");
    const double a1 = mp.lambda * mp.sphere_area / mp.gamma * std::pow(r, mp.d);
    const double a2 = std::pow(r, -mp.gamma);
    return a1 * std::pow(a2, n) / (n - mp.beta());
}

double stable_density_S(const ModelParams& mp, double s) {
    if (mp.d != 2 || mp.gamma != 4.0)
        throw std::domain_error("stable_density_S: no closed form outside d=2, gamma=4");
    if (!(s > 0.0)) throw std::domain_error("stable_density_S: s must be positive");
    return 1.5 * std::pow(s, -1.5) * std::exp(-9.0 * M_PI / (4.0 * s));
}

double first_radius_density(const ModelParams& mp, double r1) {
    if (!(r1 > 0.0)) throw std::domain_error("first_radius_density: r1 must be positive");
    return mp.d * mp.d2 * std::pow(r1, mp.d - 1) * std::exp(-mp.d2 * std::pow(r1, mp.d));
}

double joint_radii_density(const ModelParams& mp, std::span<const double> radii) {
    if (radii.empty()) throw std::domain_error("joint_radii_density: empty radii");
    double prod = 1.0;
    double prev = 0.0;
    for (double r : radii) {
        if (!(r > prev))
            throw std::domain_error("joint_radii_density: radii must be positive and strictly increasing");
        prod *= mp.d * mp.d2 * std::pow(r, mp.d - 1);
        prev = r;
    }
    return prod * std::exp(-mp.d2 * std::pow(radii.back(), mp.d));
}

}  // namespace shotnoise
