#include "gridrisk/risk.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace gridrisk;

TEST_CASE("gaussian cdf basics") {
    CHECK(gaussian_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gaussian_cdf(-3.08) == doctest::Approx(1.036e-3).epsilon(1e-3));
    CHECK(gaussian_cdf(-3.08) <= 0.001 * 1.04);
    CHECK(gaussian_cdf(-8.0) == doctest::Approx(6.22e-16).epsilon(1e-2));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(-6.0, 6.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = unif(rng);
        CHECK(std::abs(gaussian_cdf(-x) - (1.0 - gaussian_cdf(x))) <= 1e-15);
    }
    CHECK(gaussian_cdf(-40.0) == 0.0);  // deep tail clamps to zero
}

TEST_CASE("threshold_for inverts the cdf") {
    CHECK(threshold_for(gaussian_cdf(-1.0)) == doctest::Approx(-1.0).epsilon(1e-9));
    for (double r = -6.0; r <= -0.1; r += 0.37)
        CHECK(threshold_for(gaussian_cdf(r)) == doctest::Approx(r).epsilon(1e-8));
    CHECK(threshold_for(0.010) == doctest::Approx(-2.3263).epsilon(1e-4));
    CHECK(threshold_for(0.050) == doctest::Approx(-1.6449).epsilon(1e-4));
    CHECK_THROWS_AS(threshold_for(0.0), std::domain_error);
    CHECK_THROWS_AS(threshold_for(0.5), std::domain_error);
    CHECK_THROWS_AS(threshold_for(-0.1), std::domain_error);
}

TEST_CASE("tabulated thresholds round down the exact quantiles") {
    // the first five table rows are the exact quantiles floored at two
    // decimals; the 0.001 row is a looser tabulated approximation
    for (const auto& [eps, r] : ThresholdTable::rows) {
        CHECK(gaussian_cdf(r) <= eps * 1.04);
        if (eps > 0.001) {
            const double exact = threshold_for(eps);
            CHECK(std::floor(exact * 100.0) / 100.0 == doctest::Approx(r).epsilon(1e-12));
        }
    }
}

TEST_CASE("ring line risks from the published table values") {
    // line 1-12 with control
    const LineRisk r112 = line_risk(0.5720, 0.2646, 1.4455, 3.08);
    CHECK(r112.f_a == doctest::Approx(2.79e-16).epsilon(0.05));
    CHECK(r112.f_b == doctest::Approx(8.01e-05).epsilon(0.05));
    REQUIRE(r112.p_out_bound_global.has_value());
    CHECK(*r112.p_out_bound_global == doctest::Approx(2 * 1.90e-04).epsilon(0.05));

    // line 4-10 with control
    const LineRisk r410 = line_risk(0.6747, 0.2502, 1.4455, 3.08);
    CHECK(*r410.p_out_bound_global == doctest::Approx(2 * 1.71e-04).epsilon(0.05));
}

TEST_CASE("vanishing mean and noise push the exit probability to zero") {
    const LineRisk r = line_risk(0.0, 1e-3, 0.5, 3.08);
    CHECK(r.f_a == 0.0);
    CHECK(r.f_b == 0.0);
    CHECK(r.p_out == 0.0);
}

TEST_CASE("bound ordering on random lines") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> m_dist(-1.5, 1.5);
    std::uniform_real_distribution<double> s_dist(0.01, 0.6);
    double prev_rab = -1e9;
    for (int i = 0; i < 1000; ++i) {
        const double m = m_dist(rng);
        const double s = s_dist(rng);
        const LineRisk r = line_risk(m, s, 1.2, 3.08);
        CHECK(r.p_out <= r.p_out_bound_direct + 1e-18);
        CHECK(r.r_ab == doctest::Approx(std::max(r.r_a, r.r_b_neg)).epsilon(1e-14));
        (void)prev_rab;
    }
    // monotone in r_ab: larger threshold, larger direct bound
    const LineRisk lo = line_risk(0.3, 0.2, 1.2, 3.08);
    const LineRisk hi = line_risk(0.5, 0.2, 1.2, 3.08);
    CHECK(lo.r_ab < hi.r_ab);
    CHECK(lo.p_out_bound_direct < hi.p_out_bound_direct);
}

TEST_CASE("global bound is tight exactly on the most vulnerable line") {
    // when f* equals this line's own component, the f*-anchored bound
    // collapses to the direct bound
    const double m = 0.53, sigma = 0.27, r_eps = 3.08;
    const double f_star = m + r_eps * sigma;
    const LineRisk r = line_risk(m, sigma, f_star, r_eps);
    REQUIRE(r.p_out_bound_global.has_value());
    CHECK(*r.p_out_bound_global == doctest::Approx(r.p_out_bound_direct).epsilon(1e-12));

    // and it dominates on any less-loaded line
    const LineRisk other = line_risk(0.2, 0.21, f_star, r_eps);
    CHECK(*other.p_out_bound_global >= other.p_out_bound_direct);
}

TEST_CASE("bound absent above pi/2 and sigma must be positive") {
    const LineRisk r = line_risk(0.4, 0.3, 1.8, 3.08);
    CHECK_FALSE(r.p_out_bound_global.has_value());
    CHECK_THROWS_AS(line_risk(0.1, 0.0, 1.0, 3.08), std::invalid_argument);
    CHECK_THROWS_AS(line_risk(0.1, -0.2, 1.0, 3.08), std::invalid_argument);
}
