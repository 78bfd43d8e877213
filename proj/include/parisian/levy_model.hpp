#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "parisian/errors.hpp"

namespace parisian {

// X_t = mu t + sigma B_t.
struct BrownianDrift {
    double mu;
    double sigma;
};

// X_t = c t - sum_{i <= N_t} C_i, N Poisson(eta), C_i ~ Exp(alpha).
struct CramerLundbergExp {
    double c;
    double eta;
    double alpha;
};

// X_t = c t + Z_t, Z spectrally negative 3/2-stable with E[e^{theta Z_1}] = e^{theta^{3/2}}.
struct StableDrift {
    double c;
};

// User-supplied model. psi must be analytic on the right half-plane (it is evaluated on a
// Talbot contour for the scale function); psi_prime0 is E[X_1]. Ruin-formula quantities
// additionally need the density of X_r on (0, inf), optionally with an atom.
// The caller certifies that the paths are not monotone.
struct GenericPsi {
    std::function<std::complex<double>(std::complex<double>)> psi;
    double psi_prime0 = 0.0;
    std::function<double(double z, double r)> density;  // of X_r at z > 0; may be empty
    std::function<std::optional<std::pair<double, double>>(double r)> atom;  // (location, mass)
};

enum class ModelKind { brownian, cramer_lundberg, stable, generic };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::brownian: return "bm";
        case ModelKind::cramer_lundberg: return "cl-exp";
        case ModelKind::stable: return "stable32";
        case ModelKind::generic: return "generic";
    }
    return "unknown";
}

class LevyModel {
public:
    using Variant = std::variant<BrownianDrift, CramerLundbergExp, StableDrift, GenericPsi>;

    static LevyModel brownian(double mu, double sigma) { return LevyModel(BrownianDrift{mu, sigma}); }
    static LevyModel cramer_lundberg(double c, double eta, double alpha) {
        return LevyModel(CramerLundbergExp{c, eta, alpha});
    }
    static LevyModel stable(double c) { return LevyModel(StableDrift{c}); }
    static LevyModel generic(GenericPsi g) { return LevyModel(std::move(g)); }

    // Parameter positivity is enforced here. A non-positive drift is allowed at construction
    // so that callers can still ask for the (degenerate) ruin probability; mean_drift() throws.
    explicit LevyModel(Variant v) : v_(std::move(v)) {
        std::visit([](const auto& m) { check(m); }, v_);
    }

    ModelKind kind() const { return static_cast<ModelKind>(v_.index()); }
    const Variant& variant() const { return v_; }

    template <class T>
    const T* as() const { return std::get_if<T>(&v_); }

    // psi(theta) = log E[e^{theta X_1}], theta >= 0.
    double laplace_exponent(double theta) const {
        if (!(theta >= 0.0)) throw domain_error("laplace_exponent: theta must be >= 0");
        if (theta == 0.0) return 0.0;
        return std::visit(
            [theta](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, BrownianDrift>) {
                    return m.mu * theta + 0.5 * m.sigma * m.sigma * theta * theta;
                } else if constexpr (std::is_same_v<T, CramerLundbergExp>) {
                    // c theta - eta theta/(theta+alpha), the same as c theta - eta + eta alpha/(theta+alpha)
                    return m.c * theta - m.eta * theta / (theta + m.alpha);
                } else if constexpr (std::is_same_v<T, StableDrift>) {
                    return m.c * theta + theta * std::sqrt(theta);
                } else {
                    return m.psi(std::complex<double>(theta, 0.0)).real();
                }
            },
            v_);
    }

    // psi on the complex plane (principal branch for the stable power), used by Talbot inversion.
    std::complex<long double> laplace_exponent(std::complex<long double> s) const {
        return std::visit(
            [s](const auto& m) -> std::complex<long double> {
                using T = std::decay_t<decltype(m)>;
                using C = std::complex<long double>;
                if constexpr (std::is_same_v<T, BrownianDrift>) {
                    const long double mu = m.mu, sig = m.sigma;
                    return mu * s + 0.5L * sig * sig * s * s;
                } else if constexpr (std::is_same_v<T, CramerLundbergExp>) {
                    const long double c = m.c, eta = m.eta, alpha = m.alpha;
                    return c * s - eta * s / (s + C(alpha, 0.0L));
                } else if constexpr (std::is_same_v<T, StableDrift>) {
                    const long double c = m.c;
                    return c * s + s * std::sqrt(s);
                } else {
                    const auto v = m.psi(std::complex<double>(static_cast<double>(s.real()),
                                                              static_cast<double>(s.imag())));
                    return C(v.real(), v.imag());
                }
            },
            v_);
    }

    // psi'(0) = E[X_1] without the positivity check.
    double expected_increment() const {
        return std::visit(
            [](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, BrownianDrift>) return m.mu;
                else if constexpr (std::is_same_v<T, CramerLundbergExp>) return m.c - m.eta / m.alpha;
                else if constexpr (std::is_same_v<T, StableDrift>) return m.c;
                else return m.psi_prime0;
            },
            v_);
    }

    // E[X_1] = psi'(0); throws model_error when it is not positive.
    double mean_drift() const {
        const double d = expected_increment();
        if (!(d > 0.0)) throw model_error("model drift E[X_1] must be > 0, got " + std::to_string(d));
        return d;
    }

    // Right inverse Phi(q) = sup{lambda >= 0 : psi(lambda) = q}. With psi'(0) > 0, psi is
    // increasing on [0, inf) and Phi is its inverse. Bracket by doubling, then a safeguarded
    // secant (regula falsi with the Illinois modification) falling back to bisection.
    double phi(double q) const {
        if (!(q >= 0.0)) throw domain_error("phi: q must be >= 0");
        mean_drift();
        if (q == 0.0) return 0.0;
        auto f = [&](double lam) { return laplace_exponent(lam) - q; };
        double lo = 0.0, flo = -q;
        double hi = std::max(1.0, q / expected_increment());
        double fhi = f(hi);
        for (int i = 0; fhi < 0.0; ++i) {
            if (i > 1100 || !std::isfinite(fhi)) throw numerics_error("phi: could not bracket root");
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = f(hi);
        }
        const double tol = 1e-14 * q;
        int side = 0;
        double x = hi;
        for (int it = 0; it < 400; ++it) {
            x = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
            // Alternate with bisection every few steps so the bracket always shrinks.
            if (it % 4 == 3) x = 0.5 * (lo + hi);
            const double fx = f(x);
            if (std::abs(fx) <= tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
                return x;
            if (fx < 0.0) {
                lo = x;
                flo = fx;
                if (side == -1) fhi *= 0.5;
                side = -1;
            } else {
                hi = x;
                fhi = fx;
                if (side == 1) flo *= 0.5;
                side = 1;
            }
        }
        if (std::abs(f(x)) <= 1e3 * tol) return x;
        throw numerics_error("phi: root finding did not converge");
    }

private:
    static void check(const BrownianDrift& m) {
        if (!(m.sigma > 0.0)) throw model_error("bm: sigma must be > 0");
        if (!std::isfinite(m.mu)) throw model_error("bm: mu must be finite");
    }
    static void check(const CramerLundbergExp& m) {
        if (!(m.c > 0.0)) throw model_error("cl-exp: c must be > 0");
        if (!(m.eta > 0.0)) throw model_error("cl-exp: eta must be > 0");
        if (!(m.alpha > 0.0)) throw model_error("cl-exp: alpha must be > 0");
    }
    static void check(const StableDrift& m) {
        if (!std::isfinite(m.c)) throw model_error("stable32: c must be finite");
    }
    static void check(const GenericPsi& m) {
        if (!m.psi) throw model_error("generic: psi callback required");
        if (std::abs(m.psi(0.0)) > 1e-12) throw model_error("generic: psi(0) must be 0");
    }

    Variant v_;
};

}  // namespace parisian
