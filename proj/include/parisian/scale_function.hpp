#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "parisian/config.hpp"
#include "parisian/errors.hpp"
#include "parisian/levy_model.hpp"
#include "parisian/quadrature.hpp"
#include "parisian/special_functions.hpp"

namespace parisian {

enum class ScaleMethod { closed_form, laplace_inversion };

inline std::string to_string(ScaleMethod m) {
    return m == ScaleMethod::closed_form ? "closed_form" : "laplace_inversion";
}

// Fixed-Talbot inversion of a Laplace transform F at t > 0 with M nodes:
//   f(t) ~ (r/M) [ F(r) e^{rt}/2 + sum_{k=1}^{M-1} Re( e^{t s_k} F(s_k) (1 + i sigma_k) ) ],
//   theta_k = k pi / M, s_k = r theta_k (cot theta_k + i),
//   sigma_k = theta_k + (theta_k cot theta_k - 1) cot theta_k, r = 2M / (5t).
// Evaluated in long double: the e^{rt} = e^{0.4 M} factor amplifies rounding, which is what
// caps the usable node count.
template <class F>
long double talbot_invert(const F& transform, long double t, int nodes) {
    using C = std::complex<long double>;
    const long double pi = std::numbers::pi_v<long double>;
    const long double r = 2.0L * nodes / (5.0L * t);
    long double sum = 0.5L * std::exp(r * t) * std::real(transform(C(r, 0.0L)));
    for (int k = 1; k < nodes; ++k) {
        const long double theta = k * pi / nodes;
        const long double cot = std::cos(theta) / std::sin(theta);
        const C s(r * theta * cot, r * theta);
        const long double sigma = theta + (theta * cot - 1.0L) * cot;
        sum += std::real(std::exp(t * s) * transform(s) * C(1.0L, sigma));
    }
    return r / nodes * sum;
}

// Scale function W of a spectrally negative Levy process: int_0^inf e^{-theta x} W(x) dx =
// 1/psi(theta), W = 0 on (-inf, 0). Immutable; safe for concurrent evaluation.
class ScaleFunction {
public:
    ScaleFunction(LevyModel model, ScaleMethod method, NumericsConfig cfg = {})
        : model_(std::move(model)), method_(method), cfg_(cfg) {
        cfg_.validate();
        if (method_ == ScaleMethod::closed_form && !has_closed_form())
            throw model_error("no closed-form scale function for model kind " +
                              to_string(model_.kind()));
        at_zero_ = compute_at_zero();
    }

    // Closed form when the model has one, otherwise Laplace inversion.
    static ScaleFunction for_model(LevyModel model, NumericsConfig cfg = {}) {
        const bool closed = model.kind() != ModelKind::generic;
        return ScaleFunction(std::move(model), closed ? ScaleMethod::closed_form
                                                      : ScaleMethod::laplace_inversion,
                             cfg);
    }

    const LevyModel& model() const { return model_; }
    ScaleMethod method() const { return method_; }
    int inversion_nodes() const { return cfg_.inversion_nodes; }
    bool has_closed_form() const { return model_.kind() != ModelKind::generic; }

    // W(0): positive exactly for bounded-variation paths.
    double at_zero() const { return at_zero_; }

    double w(double x) const {
        if (x < 0.0) return 0.0;
        if (x == 0.0) return at_zero_;
        if (method_ == ScaleMethod::closed_form) return closed_w(x);
        return std::max(0.0, inverted_w(x));
    }

    // Density W' on (0, inf).
    double w_prime(double x) const {
        if (!(x > 0.0)) throw domain_error("w_prime: x must be > 0");
        if (method_ == ScaleMethod::closed_form) return closed_w_prime(x);
        const double h = std::min(1e-6 * std::max(1.0, x), 0.5 * x);
        return (w(x + h) - w(x - h)) / (2.0 * h);
    }

    // Numerically integrated int_0^inf e^{-theta x} W(x) dx, for comparison with 1/psi(theta).
    // Truncated where e^{-theta x} has fallen below 1e-16.
    double laplace_transform_check(double theta) const {
        if (!(theta > 0.0)) throw domain_error("laplace_transform_check: theta must be > 0");
        const double upper = std::log(1e16) / theta;
        auto f = [&](double x) { return std::exp(-theta * x) * w(x); };
        std::vector<double> pts{0.0};
        for (double p : {1e-3, 1e-1, 1.0, 10.0, 50.0})
            if (p < upper) pts.push_back(p);
        pts.push_back(upper);
        return quad::integrate_pieces(f, pts, 1e-15, 1e-12, 20000).value;
    }

    // Raw fixed-Talbot inversion of 1/psi at x > 0, with the node-count self-check.
    double inverted_w(double x) const {
        auto transform = [this](std::complex<long double> s) {
            return 1.0L / model_.laplace_exponent(s);
        };
        const long double v = talbot_invert(transform, x, cfg_.inversion_nodes);
        const long double check = talbot_invert(transform, x, cfg_.inversion_check_nodes);
        if (!std::isfinite(static_cast<double>(v)) ||
            std::abs(v - check) > cfg_.inversion_check_tol * std::max(std::abs(v), 1e-300L))
            throw numerics_error("scale function inversion lost precision at x = " +
                                 std::to_string(x));
        return static_cast<double>(v);
    }

private:
    double closed_w(double x) const {
        return std::visit(
            [x](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, BrownianDrift>) {
                    const double k = 2.0 * m.mu / (m.sigma * m.sigma);
                    if (m.mu == 0.0) return 2.0 * x / (m.sigma * m.sigma);
                    return -std::expm1(-k * x) / m.mu;
                } else if constexpr (std::is_same_v<T, CramerLundbergExp>) {
                    // W = (1/D)(1 - eta/(c alpha) e^{kx}), D = c - eta/alpha, k = eta/c - alpha,
                    // rewritten as 1/c + (eta/(c alpha)) (1 - e^{kx})/D with k = -alpha D / c.
                    const double d = m.c - m.eta / m.alpha;
                    const double k = m.eta / m.c - m.alpha;
                    const double growth = d == 0.0 ? m.alpha * x / m.c : -std::expm1(k * x) / d;
                    return 1.0 / m.c + m.eta / (m.c * m.alpha) * growth;
                } else if constexpr (std::is_same_v<T, StableDrift>) {
                    if (m.c == 0.0) return std::sqrt(x) / std::tgamma(1.5);
                    return (1.0 - special::mittag_leffler_half(-m.c * std::sqrt(x))) / m.c;
                } else {
                    throw model_error("no closed-form scale function for a generic model");
                }
            },
            model_.variant());
    }

    double closed_w_prime(double x) const {
        return std::visit(
            [x](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, BrownianDrift>) {
                    const double s2 = m.sigma * m.sigma;
                    return 2.0 / s2 * std::exp(-2.0 * m.mu * x / s2);
                } else if constexpr (std::is_same_v<T, CramerLundbergExp>) {
                    return m.eta / (m.c * m.c) * std::exp((m.eta / m.c - m.alpha) * x);
                } else if constexpr (std::is_same_v<T, StableDrift>) {
                    // d/dx of (1 - E(-c sqrt x))/c with E'(z) = 2 z E(z) + 2/sqrt(pi).
                    return 1.0 / std::sqrt(std::numbers::pi * x) -
                           m.c * special::mittag_leffler_half(-m.c * std::sqrt(x));
                } else {
                    throw model_error("no closed-form scale function for a generic model");
                }
            },
            model_.variant());
    }

    double compute_at_zero() const {
        switch (model_.kind()) {
            case ModelKind::brownian:
            case ModelKind::stable: return 0.0;
            case ModelKind::cramer_lundberg: return 1.0 / model_.as<CramerLundbergExp>()->c;
            case ModelKind::generic: {
                // W(0) = lim theta/psi(theta): a finite nonzero limit means bounded variation.
                const double a = 1e9 / model_.laplace_exponent(1e9);
                const double b = 1e12 / model_.laplace_exponent(1e12);
                if (b > 0.0 && std::abs(a - b) <= 1e-6 * b) return b;
                return 0.0;
            }
        }
        return 0.0;
    }

    LevyModel model_;
    ScaleMethod method_;
    NumericsConfig cfg_;
    double at_zero_ = 0.0;
};

}  // namespace parisian
