#pragma once

#include <array>
#include <optional>
#include <utility>

namespace gridrisk {

/// Standard normal CDF via erfc; tails below 1e-300 clamp to zero.
double gaussian_cdf(double x);

/// r with Phi(r) = epsilon, by bisection to 1e-10. Domain (0, 0.5).
double threshold_for(double epsilon);

/// Safe-set exit probabilities of one line under the invariant Gaussian
/// distribution, plus the two upper bounds.
struct LineRisk {
    double m = 0.0;      // mean phase-angle difference (rad)
    double sigma = 0.0;  // invariant standard deviation (rad)
    double r_a = 0.0;    // (-pi/2 - m) / sigma
    double r_b_neg = 0.0;  // (-pi/2 + m) / sigma, equals -r_b
    double r_ab = 0.0;   // max of the two = (-pi/2 + |m|) / sigma
    double f_a = 0.0;    // Phi(r_a), lower-tail exit probability
    double f_b = 0.0;    // Phi(-r_b), upper-tail exit probability
    double p_out = 0.0;  // f_a + f_b
    double p_out_bound_direct = 0.0;  // 2 Phi(r_ab)
    // 2 Phi((-pi/2 + f*) / sigma - r_eps); present only when f* < pi/2
    std::optional<double> p_out_bound_global;
};

/// Computes the exit probabilities for a line with mean m and standard
/// deviation sigma, anchored at the dispatch optimum value f_star. The
/// stored risk multiplier is positive; the threshold arithmetic negates it.
LineRisk line_risk(double m, double sigma, double f_star, double r_eps);

/// Tabulated (epsilon, r_epsilon) threshold pairs for common tail levels.
struct ThresholdTable {
    static constexpr std::array<std::pair<double, double>, 6> rows{{
        {0.050, -1.65},
        {0.040, -1.76},
        {0.030, -1.89},
        {0.020, -2.06},
        {0.010, -2.33},
        {0.001, -3.08},
    }};
};

}  // namespace gridrisk
