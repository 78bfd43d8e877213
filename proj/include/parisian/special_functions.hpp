#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "parisian/config.hpp"
#include "parisian/errors.hpp"
#include "parisian/quadrature.hpp"

namespace parisian::special {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Standard normal CDF through erfc, accurate in both tails.
inline double normal_cdf(double x) {
    if (x >= 40.0) return 1.0;
    if (x <= -40.0) return 0.0;
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace detail {

// exp(x*x) with the rounding error of x*x folded back in.
inline double exp_square(double x) {
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(hi) * std::exp(lo);
}

// Modified Lentz evaluation of erfc(x) e^{x^2} sqrt(pi) = 1/(x + (1/2)/(x + 1/(x + (3/2)/...))).
inline double erfcx_continued_fraction(double x, const SpecialFnConfig& cfg) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n <= cfg.max_terms; ++n) {
        const double an = 0.5 * n;
        d = x + an * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < cfg.cf_tol) return 1.0 / (f * std::sqrt(std::numbers::pi));
    }
    throw numerics_error("erfcx continued fraction did not converge");
}

}  // namespace detail

// Scaled complementary error function e^{x^2} erfc(x).
inline double erfcx(double x, const SpecialFnConfig& cfg = {}) {
    if (x >= 10.0) return detail::erfcx_continued_fraction(x, cfg);
    if (x >= -26.0) return detail::exp_square(x) * std::erfc(x);
    throw numerics_error("erfcx overflows for x < -26");
}

// Mittag-Leffler function of order 1/2, E(z) = sum_k z^k / Gamma(k/2 + 1), evaluated through
// E(z) = e^{z^2} erfc(-z). For z <= 0 this is erfcx(-z), which stays accurate as z -> -inf
// where the power series cancels catastrophically.
inline double mittag_leffler_half(double z, const SpecialFnConfig& cfg = {}) {
    if (z > 30.0) throw numerics_error("mittag_leffler_half: argument above 30");
    if (z <= 0.0) return erfcx(-z, cfg);
    const double value = detail::exp_square(z) * std::erfc(-z);
    if (!std::isfinite(value)) throw numerics_error("mittag_leffler_half overflows double range");
    return value;
}

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
inline double regularized_lower_gamma(double a, double x, const SpecialFnConfig& cfg = {}) {
    if (!(a > 0.0)) throw domain_error("incomplete gamma: a must be > 0");
    if (!(x >= 0.0)) throw domain_error("incomplete gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // gamma(a,x) = x^a e^{-x} sum_n x^n / (a (a+1) ... (a+n))
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n <= cfg.max_terms; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < cfg.series_tol * std::abs(sum))
                return std::min(1.0, sum * std::exp(log_prefactor));
        }
        throw numerics_error("incomplete gamma series did not converge");
    }
    // Q(a,x) by the Legendre continued fraction, modified Lentz.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int n = 1; n <= cfg.max_terms; ++n) {
        const double an = -n * (n - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < cfg.cf_tol) return 1.0 - std::exp(log_prefactor) * h;
    }
    throw numerics_error("incomplete gamma continued fraction did not converge");
}

// Lower incomplete gamma gamma(a, x) = int_0^x e^{-t} t^{a-1} dt (not the upper tail).
inline double lower_incomplete_gamma(double a, double x, const SpecialFnConfig& cfg = {}) {
    return std::tgamma(a) * regularized_lower_gamma(a, x, cfg);
}

namespace detail {

// I(a,b,z) = int_0^inf e^{-w} w^{a-1} (z+w)^{b-a-1} dw, so that U(a,b,z) = z^{1-b} I / Gamma(a).
// The range is split at m = min(z, 1): below m the substitution s = w^a removes the w^{a-1}
// endpoint singularity when a < 1; on [m, 1] a log substitution absorbs the (z+w)^{b-a-1}
// power law that dominates when z is small.
inline double kummer_u_integral(double a, double b, double z, double rel_tol) {
    const double p = b - a - 1.0;
    const double m = std::min(z, 1.0);
    const double abs_floor = 1e-300;
    double total = 0.0;

    if (a < 1.0) {
        auto head = [&](double s) {
            const double w = std::pow(s, 1.0 / a);
            return std::exp(-w) * std::pow(z + w, p) / a;
        };
        total += quad::integrate(head, 0.0, std::pow(m, a), abs_floor, rel_tol).value;
    } else {
        auto head = [&](double w) { return std::exp(-w) * std::pow(w, a - 1.0) * std::pow(z + w, p); };
        total += quad::integrate(head, 0.0, m, abs_floor, rel_tol).value;
    }
    if (m < 1.0) {
        auto mid = [&](double v) {
            const double w = std::exp(v);
            return std::exp(-w) * std::pow(w, a) * std::pow(z + w, p);
        };
        total += quad::integrate(mid, std::log(m), 0.0, abs_floor, rel_tol).value;
    }
    const double lo = std::max(m, 1.0);
    const double hi = lo + 60.0 + 2.0 * std::abs(a) + 2.0 * std::abs(p);
    auto tail = [&](double w) { return std::exp(-w) * std::pow(w, a - 1.0) * std::pow(z + w, p); };
    total += quad::integrate(tail, lo, hi, abs_floor, rel_tol).value;
    return total;
}

inline constexpr double u_rel_tol = 1e-12;

}  // namespace detail

// Confluent hypergeometric function of the second kind U(a, b, z) for a > 0, z > 0, from
// U = (1/Gamma(a)) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt (rescaled by t = w/z).
inline double hypergeometric_u(double a, double b, double z) {
    if (!(z > 0.0)) throw domain_error("hypergeometric_u: z must be > 0");
    if (!(a > 0.0)) throw domain_error("hypergeometric_u: integral representation needs a > 0");
    return std::pow(z, 1.0 - b) * detail::kummer_u_integral(a, b, z, detail::u_rel_tol) /
           std::tgamma(a);
}

// e^{z/2} W_{kappa,mu}(z) = z^{1/2-mu} I(a, b, z) / Gamma(a), a = mu - kappa + 1/2, b = 1 + 2 mu.
// Finite for large z where e^{z/2} and W separately over/underflow.
inline double whittaker_w_scaled(double kappa, double mu, double z) {
    if (!(z > 0.0)) throw domain_error("whittaker_w: z must be > 0");
    const double a = mu - kappa + 0.5;
    const double b = 1.0 + 2.0 * mu;
    if (!(a > 0.0)) throw domain_error("whittaker_w: needs mu - kappa + 1/2 > 0");
    return std::pow(z, 0.5 - mu) * detail::kummer_u_integral(a, b, z, detail::u_rel_tol) /
           std::tgamma(a);
}

// Whittaker W_{kappa,mu}(z) = e^{-z/2} z^{mu+1/2} U(mu - kappa + 1/2, 1 + 2 mu, z).
inline double whittaker_w(double kappa, double mu, double z) {
    return std::exp(-0.5 * z) * whittaker_w_scaled(kappa, mu, z);
}

}  // namespace parisian::special
