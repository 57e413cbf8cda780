#include "gridrisk/risk.hpp"

#include <cmath>
#include <stdexcept>

namespace gridrisk {

double gaussian_cdf(double x) {
    if (!std::isfinite(x)) {
        if (std::isnan(x)) throw std::invalid_argument("gaussian_cdf: NaN input");
        return x > 0.0 ? 1.0 : 0.0;
    }
    const double p = 0.5 * std::erfc(-x / std::sqrt(2.0));
    return p < 1e-300 ? 0.0 : p;
}

double threshold_for(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw std::domain_error("threshold_for: epsilon must lie in (0, 0.5)");
    double lo = -40.0, hi = 0.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (gaussian_cdf(mid) < epsilon ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

LineRisk line_risk(double m, double sigma, double f_star, double r_eps) {
    if (!(sigma > 0.0)) throw std::invalid_argument("line_risk: sigma must be positive");
    constexpr double half_pi = M_PI / 2.0;
    LineRisk r;
    r.m = m;
    r.sigma = sigma;
    r.r_a = (-half_pi - m) / sigma;
    r.r_b_neg = (-half_pi + m) / sigma;
    r.r_ab = (-half_pi + std::abs(m)) / sigma;
    r.f_a = gaussian_cdf(r.r_a);
    r.f_b = gaussian_cdf(r.r_b_neg);
    r.p_out = r.f_a + r.f_b;
    r.p_out_bound_direct = 2.0 * gaussian_cdf(r.r_ab);
    if (f_star < half_pi)
        r.p_out_bound_global = 2.0 * gaussian_cdf((-half_pi + f_star) / sigma - r_eps);
    return r;
}

}  // namespace gridrisk
