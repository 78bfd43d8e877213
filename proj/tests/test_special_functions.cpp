#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "parisian/quadrature.hpp"
#include "parisian/special_functions.hpp"

using namespace parisian;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using big = boost::multiprecision::cpp_bin_float_50;

// Reference values below were computed with mpmath at 30 digits and frozen.

TEST_CASE("normal cdf matches boost in both tails") {
    for (double x : {-38.0, -10.0, -1.5, 0.0, 0.3, 4.0, 9.0}) {
        const double ref = 0.5 * boost::math::erfc(-x / std::sqrt(2.0));
        CHECK_THAT(special::normal_cdf(x), WithinRel(ref, 1e-14));
    }
    CHECK(special::normal_cdf(50.0) == 1.0);
    CHECK(special::normal_cdf(-50.0) == 0.0);
}

TEST_CASE("erfcx against high-precision erfc") {
    for (double x : {-3.0, -0.5, 0.0, 1.0, 5.0, 9.99, 10.0, 30.0, 300.0}) {
        const big bx = x;
        const big ref = boost::multiprecision::exp(bx * bx) * boost::multiprecision::erfc(bx);
        CHECK_THAT(special::erfcx(x), WithinRel(static_cast<double>(ref), 1e-13));
    }
    CHECK_THAT(special::erfcx(10.0), WithinRel(0.056140992743822586, 1e-13));
    CHECK_THROWS_AS(special::erfcx(-27.0), numerics_error);
}

TEST_CASE("Mittag-Leffler of order 1/2") {
    CHECK_THAT(special::mittag_leffler_half(-1.0), WithinRel(0.427583576155807, 1e-13));
    CHECK_THAT(special::mittag_leffler_half(-5.0), WithinRel(0.11070463773306863, 1e-13));
    CHECK_THAT(special::mittag_leffler_half(-30.0), WithinRel(0.018795888861416751, 1e-13));
    CHECK_THAT(special::mittag_leffler_half(0.5), WithinRel(1.9523604891825571, 1e-13));
    CHECK_THAT(special::mittag_leffler_half(2.0), WithinRel(108.94090438997797, 1e-13));
    CHECK(special::mittag_leffler_half(0.0) == 1.0);

    SECTION("agrees with the power series where it converges well") {
        for (double z : {-0.8, -0.2, 0.4, 1.1}) {
            double sum = 0.0;
            for (int k = 0; k < 80; ++k) sum += std::pow(z, k) / std::tgamma(0.5 * k + 1.0);
            CHECK_THAT(special::mittag_leffler_half(z), WithinRel(sum, 1e-13));
        }
    }
    SECTION("decreasing and positive on the negative axis") {
        double prev = 1.0;
        for (double z = -0.25; z > -30.0; z -= 0.25) {
            const double v = special::mittag_leffler_half(z);
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
    }
    CHECK_THROWS_AS(special::mittag_leffler_half(31.0), numerics_error);
}

TEST_CASE("incomplete gamma") {
    CHECK_THAT(special::regularized_lower_gamma(3, 2), WithinRel(0.32332358381693654, 1e-13));
    CHECK_THAT(special::regularized_lower_gamma(0.5, 0.1), WithinRel(0.34527915398142298, 1e-13));
    CHECK_THAT(special::regularized_lower_gamma(10, 12), WithinRel(0.75760783832948765, 1e-13));
    CHECK_THAT(special::regularized_lower_gamma(50, 40), WithinRel(0.070335066659394954, 1e-12));
    // int_0^2 e^{-t} t^2 dt = 2 - 10 e^{-2}
    CHECK_THAT(special::lower_incomplete_gamma(3, 2), WithinRel(2.0 - 10.0 * std::exp(-2.0), 1e-13));

    SECTION("boost gamma_p oracle on a grid") {
        for (double a : {0.3, 1.0, 2.5, 7.0, 40.0, 150.0})
            for (double x : {0.01, 0.5, 2.0, 10.0, 60.0, 200.0})
                CHECK_THAT(special::regularized_lower_gamma(a, x),
                           WithinAbs(boost::math::gamma_p(a, x), 1e-13));
    }
    CHECK_THROWS_AS(special::regularized_lower_gamma(-1, 1), domain_error);
    CHECK_THROWS_AS(special::regularized_lower_gamma(1, -1), domain_error);
}

TEST_CASE("Kummer U and Whittaker W") {
    CHECK_THAT(special::hypergeometric_u(1, 1, 1), WithinRel(0.59634736232319407, 1e-11));
    CHECK_THAT(special::hypergeometric_u(0.5, 4.0 / 3.0, 0.1), WithinRel(2.5825303897904703, 1e-11));
    CHECK_THAT(special::hypergeometric_u(1.0 / 3.0, 4.0 / 3.0, 5), WithinRel(0.58480354764257323, 1e-11));
    CHECK_THAT(special::hypergeometric_u(2.5, 0.5, 20), WithinRel(0.00040311513799625616, 1e-11));

    const double sixth = 1.0 / 6.0;
    CHECK_THAT(special::whittaker_w_scaled(0.5, sixth, 0.01), WithinRel(0.13130371786370455, 1e-11));
    CHECK_THAT(special::whittaker_w_scaled(0.5, sixth, 1), WithinRel(1.0208671373347342, 1e-11));
    CHECK_THAT(special::whittaker_w_scaled(0.5, sixth, 30), WithinRel(5.482218284262163, 1e-11));
    CHECK_THAT(special::whittaker_w_scaled(-0.5, sixth, 0.5), WithinRel(0.66765426005309962, 1e-11));
    CHECK_THAT(special::whittaker_w_scaled(-0.5, sixth, 100), WithinRel(0.099046531669405562, 1e-11));
    CHECK_THAT(special::whittaker_w(0.5, sixth, 1), WithinRel(std::exp(-0.5) * 1.0208671373347342, 1e-11));

    SECTION("U(a, a+1, z) = z^{-a}") {
        for (double a : {0.25, 1.0, 3.0})
            for (double z : {0.05, 1.0, 12.0})
                CHECK_THAT(special::hypergeometric_u(a, a + 1.0, z), WithinRel(std::pow(z, -a), 1e-11));
    }
    SECTION("W_{0,1/2}(z) = e^{-z/2} since U(1,2,z) = 1/z") {
        for (double z : {0.2, 3.0})
            CHECK_THAT(special::whittaker_w(0.0, 0.5, z), WithinRel(std::exp(-0.5 * z), 1e-11));
    }
    CHECK_THROWS_AS(special::hypergeometric_u(1, 1, 0), domain_error);
    CHECK_THROWS_AS(special::whittaker_w(2.0, 0.1, 1.0), domain_error);
}

TEST_CASE("adaptive Gauss-Kronrod quadrature") {
    auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-14, 1e-13);
    CHECK_THAT(r.value, WithinRel(2.0, 1e-13));
    auto s = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-12, 1e-10);
    CHECK_THAT(s.value, WithinRel(2.0, 1e-9));
    const std::vector<double> pts{0.0, 1.0, 3.0};
    auto p = quad::integrate_pieces([](double x) { return std::abs(x - 1.0); }, pts, 1e-14, 1e-13);
    CHECK_THAT(p.value, WithinRel(2.5, 1e-13));
    CHECK_THROWS_AS(quad::integrate([](double x) { return std::sin(1.0 / x) / x; }, 1e-9, 1.0, 1e-15, 1e-15, 20),
                    numerics_error);
}
