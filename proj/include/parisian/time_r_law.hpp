#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "parisian/config.hpp"
#include "parisian/errors.hpp"
#include "parisian/levy_model.hpp"
#include "parisian/quadrature.hpp"
#include "parisian/scale_function.hpp"
#include "parisian/special_functions.hpp"

namespace parisian {

struct Atom {
    double location;
    double mass;
};

// ---------------------------------------------------------------------------------------------
// Marginal densities

// Density of Z_r for the spectrally negative 3/2-stable process with E[e^{theta Z_1}] =
// e^{theta^{3/2}}, in Whittaker form:
//   y > 0:  sqrt(3/pi) y^{-1} e^{-u/2} W_{1/2,1/6}(u)
//   y < 0:  -(1/(2 sqrt(3 pi))) y^{-1} e^{u/2} W_{-1/2,1/6}(u)
// with u = (4/27)|y|^3 / r^2, i.e. the unit-time density rescaled by Z_r = r^{2/3} Z_1.
inline double stable32_density(double y, double r) {
    if (!(r > 0.0)) throw domain_error("stable32_density: r must be > 0");
    constexpr double sixth = 1.0 / 6.0;
    const double u = 4.0 / 27.0 * std::abs(y * y * y) / (r * r);
    // below u = 1e-30 the Whittaker route loses u to underflow; the limit is within 1e-10 there
    if (y == 0.0 || u < 1e-30) {
        // Both branches tend to sqrt(3/pi) (4/27)^{1/3} r^{-2/3} Gamma(1/3)/Gamma(1/6).
        return std::sqrt(3.0 / std::numbers::pi) * std::cbrt(4.0 / 27.0) * std::pow(r, -2.0 / 3.0) *
               std::tgamma(1.0 / 3.0) / std::tgamma(sixth);
    }
    if (!std::isfinite(u)) return 0.0;
    if (y > 0.0) {
        if (u > 745.0) return 0.0;
        return std::sqrt(3.0 / std::numbers::pi) / y * std::exp(-u) *
               special::whittaker_w_scaled(0.5, sixth, u);
    }
    return -1.0 / (2.0 * std::sqrt(3.0 * std::numbers::pi)) / y *
           special::whittaker_w_scaled(-0.5, sixth, u);
}

// Absolutely continuous part of the law of X_r for the Cramer-Lundberg model, at z < cr:
//   e^{-eta r} e^{-alpha y} sum_{m>=0} (alpha eta r)^{m+1} y^m / (m! (m+1)!),  y = cr - z.
// Summed in log space; the terms grow up to m ~ sqrt(alpha eta r y) before decaying.
inline double cramer_lundberg_density(const CramerLundbergExp& m, double r, double z,
                                      const SpecialFnConfig& cfg = {}) {
    const double y = m.c * r - z;
    if (!(y > 0.0)) return 0.0;
    const double a = m.alpha * m.eta * r;
    // sum_m (ay)^m/(m!(m+1)!) <= e^{2 sqrt(ay)}, so far in the tail the density underflows
    if (-m.eta * r - m.alpha * y + std::log(a) + 2.0 * std::sqrt(a * y) < -745.0) return 0.0;
    const double log_ay = std::log(a * y);
    const double mode = std::sqrt(a * y);
    // log of term m without the common factor e^{-eta r - alpha y} a
    double log_term = 0.0;
    double log_max = 0.0;
    double scaled_sum = 1.0;  // sum of exp(log_term - log_max)
    const int cap = static_cast<int>(mode) + 40 * cfg.max_terms;
    for (int k = 1; k <= cap; ++k) {
        log_term += log_ay - std::log(static_cast<double>(k)) - std::log(static_cast<double>(k + 1));
        if (log_term > log_max) {
            scaled_sum = scaled_sum * std::exp(log_max - log_term) + 1.0;
            log_max = log_term;
        } else {
            const double t = std::exp(log_term - log_max);
            scaled_sum += t;
            if (k > mode && t < 1e-17 * scaled_sum) {
                return std::exp(-m.eta * r - m.alpha * y + std::log(a) + log_max + std::log(scaled_sum));
            }
        }
    }
    throw numerics_error("cramer_lundberg_density: series did not converge");
}

inline double gaussian_density(double z, double mean, double sd) {
    return special::normal_pdf((z - mean) / sd) / sd;
}

// ---------------------------------------------------------------------------------------------
// PositiveLaw

// The law of X_r restricted to (0, inf): optional atom plus density, with an upper bound on
// the tail int_Z^inf z f(z) dz used to truncate z-integrals. Immutable.
class PositiveLaw {
public:
    PositiveLaw(double r, std::optional<Atom> atom, std::function<double(double)> density,
                std::function<double(double)> tail_bound, std::vector<double> breakpoints,
                std::optional<double> support_end = std::nullopt,
                std::optional<double> closed_partial_mean = std::nullopt)
        : r_(r),
          atom_(atom),
          density_(std::move(density)),
          tail_bound_(std::move(tail_bound)),
          breakpoints_(std::move(breakpoints)),
          support_end_(support_end),
          closed_partial_mean_(closed_partial_mean) {
        if (!(r_ > 0.0)) throw domain_error("delay r must be > 0");
        if (atom_ && !(atom_->mass > 0.0 && atom_->mass <= 1.0 && atom_->location > 0.0))
            throw domain_error("atom must have positive location and mass in (0, 1]");
    }

    double r() const { return r_; }
    const std::optional<Atom>& atom() const { return atom_; }
    std::optional<double> closed_partial_mean() const { return closed_partial_mean_; }

    // Density of X_r at z; zero for z <= 0.
    double density(double z) const { return z > 0.0 ? std::max(0.0, density_(z)) : 0.0; }

    double tail_bound(double z) const { return tail_bound_(z); }

    // Smallest tried Z with tail_bound(Z) <= tol (doubling search), or the end of the support.
    double truncation_point(double tol) const {
        if (support_end_) return *support_end_;
        double z = breakpoints_.empty() ? 1.0 : std::max(1.0, breakpoints_.back());
        for (int i = 0; i < 200 && tail_bound_(z) > tol; ++i) z *= 1.25;
        return z;
    }

    // Sorted integration nodes 0 = p_0 < ... < p_n = Z* for integrals of z f(z) g(z).
    std::vector<double> integration_nodes(double tol) const {
        const double upper = truncation_point(tol);
        std::vector<double> pts{0.0};
        for (double b : breakpoints_)
            if (b > 0.0 && b < upper) pts.push_back(b);
        // Geometric nodes out to Z*, so that no single panel spans a tail whose mass sits
        // near its left end (the 15-point rule can miss it entirely).
        double last = pts.back() > 0.0 ? pts.back() : std::min(1.0, upper);
        if (pts.back() == 0.0) pts.push_back(last);
        for (last *= 1.5; last < upper; last *= 1.5) pts.push_back(last);
        pts.push_back(upper);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

private:
    double r_;
    std::optional<Atom> atom_;
    std::function<double(double)> density_;
    std::function<double(double)> tail_bound_;
    std::vector<double> breakpoints_;
    std::optional<double> support_end_;
    std::optional<double> closed_partial_mean_;
};

namespace detail {

// Chernoff bound on int_Z^inf z f(z) dz for Z > 0, minimized over a few theta:
// z 1{z>Z} <= e^{theta(z-Z)} z^+ and z^+ e^{theta z} <= z e^{theta z} + 1/(e theta),
// with E[X_r e^{theta X_r}] = r psi'(theta) e^{r psi(theta)}.
inline double chernoff_tail(const LevyModel& model, double r, double z) {
    double best = HUGE_VAL;
    for (double theta : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double h = 1e-6 * theta;
        const double psi = model.laplace_exponent(theta);
        const double dpsi = (model.laplace_exponent(theta + h) - model.laplace_exponent(theta - h)) / (2 * h);
        const double log_bound = -theta * z + r * psi;
        const double moment = std::max(0.0, r * dpsi) + std::exp(-1.0 - r * psi) / theta;
        if (log_bound < 700.0) best = std::min(best, std::exp(log_bound) * moment);
    }
    return best;
}

// Poisson-weighted incomplete-gamma series for int_0^inf z P(X_r in dz), Cramer-Lundberg:
//   e^{-eta r} cr + sum_{m>=0} e^{-eta r}(eta r)^{m+1}/(m! (m+1)!) [cr g(m+1, x) - g(m+2, x)/alpha],
// x = c r alpha, g the lower incomplete gamma. Written with the regularized P(a, x) so that
// each term is a Poisson weight times a bounded bracket.
inline double cramer_lundberg_partial_mean(const CramerLundbergExp& m, double r,
                                           const SpecialFnConfig& cfg) {
    const double lam = m.eta * r;
    const double cr = m.c * r;
    const double x = cr * m.alpha;
    double sum = std::exp(-lam) * cr;
    double log_weight = -lam;  // log of e^{-lam} lam^k / k!, k = m + 1
    const int cap = static_cast<int>(lam + 40.0 * std::sqrt(lam + 1.0)) + cfg.max_terms;
    for (int k = 1; k <= cap; ++k) {
        log_weight += std::log(lam) - std::log(static_cast<double>(k));
        const double weight = std::exp(log_weight);
        const double bracket = cr * special::regularized_lower_gamma(k, x, cfg) -
                               k / m.alpha * special::regularized_lower_gamma(k + 1, x, cfg);
        const double term = weight * bracket;
        sum += term;
        if (k > lam && weight * (cr + k / m.alpha) < 1e-17 * std::abs(sum)) return sum;
    }
    throw numerics_error("cramer_lundberg_partial_mean: series did not converge");
}

}  // namespace detail

// Positive part of the law of X_r for the given model.
inline PositiveLaw positive_law(const LevyModel& model, double r, const NumericsConfig& cfg = {}) {
    if (!(r > 0.0)) throw domain_error("delay r must be > 0");
    switch (model.kind()) {
        case ModelKind::brownian: {
            const auto m = *model.as<BrownianDrift>();
            const double mean = m.mu * r;
            const double sd = m.sigma * std::sqrt(r);
            auto tail = [mean, sd](double z) {
                // exact: int_Z^inf z phi dz = sd phi(k) + mean (1 - N(k)), k = (Z - mean)/sd
                const double k = (z - mean) / sd;
                return sd * special::normal_pdf(k) + mean * special::normal_cdf(-k);
            };
            std::vector<double> bps;
            for (double k : {-4.0, -2.0, 0.0, 2.0, 4.0, 8.0})
                if (mean + k * sd > 0.0) bps.push_back(mean + k * sd);
            const double a = mean / sd;
            const double closed = sd * special::normal_pdf(a) + mean * special::normal_cdf(a);
            return PositiveLaw(
                r, std::nullopt, [mean, sd](double z) { return gaussian_density(z, mean, sd); },
                tail, bps, std::nullopt, closed);
        }
        case ModelKind::cramer_lundberg: {
            const auto m = *model.as<CramerLundbergExp>();
            const double cr = m.c * r;
            const auto special_cfg = cfg.special;
            auto density = [m, r, special_cfg](double z) {
                return cramer_lundberg_density(m, r, z, special_cfg);
            };
            auto tail = [cr](double z) { return z >= cr ? 0.0 : HUGE_VAL; };
            const double closed = detail::cramer_lundberg_partial_mean(m, r, cfg.special);
            const double mass = std::exp(-m.eta * r);
            std::optional<Atom> atom;
            if (mass > 0.0) atom = Atom{cr, mass};
            return PositiveLaw(r, atom, density, tail, {cr}, cr, closed);
        }
        case ModelKind::stable: {
            const double c = model.as<StableDrift>()->c;
            auto density = [c, r](double z) { return stable32_density(z - c * r, r); };
            auto tail = [model, r](double z) { return detail::chernoff_tail(model, r, z); };
            std::vector<double> bps;
            const double scale = std::pow(r, 2.0 / 3.0);
            for (double k : {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0})
                if (c * r + k * scale > 0.0) bps.push_back(c * r + k * scale);
            return PositiveLaw(r, std::nullopt, density, tail, bps);
        }
        case ModelKind::generic: {
            const auto& g = *model.as<GenericPsi>();
            if (!g.density)
                throw model_error("generic model needs a density callback for the law of X_r");
            std::optional<Atom> atom;
            if (g.atom) {
                if (auto a = g.atom(r)) atom = Atom{a->first, a->second};
            }
            auto density = [f = g.density, r](double z) { return f(z, r); };
            auto tail = [model, r](double z) { return detail::chernoff_tail(model, r, z); };
            std::vector<double> bps{std::max(1e-3, r * std::abs(g.psi_prime0))};
            if (atom) bps.push_back(atom->location);
            return PositiveLaw(r, atom, density, tail, bps);
        }
    }
    throw model_error("unknown model kind");
}

namespace detail {

inline double truncation_tolerance(const PositiveLaw& law, const NumericsConfig& cfg, double drift) {
    return cfg.truncation_tol * std::max(law.r() * std::abs(drift), 1e-12);
}

template <class G>
quad::Result integrate_against_law(const PositiveLaw& law, const std::vector<double>& nodes,
                                   const G& weight, const NumericsConfig& cfg) {
    auto f = [&](double z) { return z * weight(z) * law.density(z); };
    return quad::integrate_pieces(f, nodes, cfg.quad_abs_tol, cfg.quad_rel_tol, cfg.quad_max_panels);
}

}  // namespace detail

// int_0^inf z P(X_r in dz) by quadrature (atom included), ignoring any closed form.
inline double partial_mean_quadrature(const PositiveLaw& law, const NumericsConfig& cfg,
                                      double drift_scale = 1.0) {
    const auto nodes = law.integration_nodes(detail::truncation_tolerance(law, cfg, drift_scale));
    double value = detail::integrate_against_law(law, nodes, [](double) { return 1.0; }, cfg).value;
    if (law.atom()) value += law.atom()->location * law.atom()->mass;
    return value;
}

// int_0^inf z P(X_r in dz): closed form for Brownian and Cramer-Lundberg, quadrature otherwise.
inline double partial_mean(const PositiveLaw& law, const NumericsConfig& cfg = {}) {
    if (auto closed = law.closed_partial_mean()) return *closed;
    return partial_mean_quadrature(law, cfg);
}

// int_y^inf z P(X_r in dz) for y >= 0 (the inner integral of the Laplace identity for Kendall).
inline double partial_mean_above(const PositiveLaw& law, double y, const NumericsConfig& cfg,
                                 double drift_scale = 1.0) {
    auto nodes = law.integration_nodes(detail::truncation_tolerance(law, cfg, drift_scale));
    std::vector<double> pts{y};
    for (double p : nodes)
        if (p > y) pts.push_back(p);
    double value = 0.0;
    if (pts.size() > 1)
        value = detail::integrate_against_law(law, pts, [](double) { return 1.0; }, cfg).value;
    if (law.atom() && law.atom()->location > y) value += law.atom()->location * law.atom()->mass;
    return value;
}

// int_0^inf W(x+z) z P(X_r in dz), truncated at the same Z* as partial_mean_quadrature.
inline double weighted_scale_integral(const PositiveLaw& law, const ScaleFunction& sf, double x,
                                      const NumericsConfig& cfg = {}) {
    if (!(x >= 0.0)) throw domain_error("weighted_scale_integral: x must be >= 0");
    const double drift = sf.model().expected_increment();
    const auto nodes = law.integration_nodes(detail::truncation_tolerance(law, cfg, drift));
    double value =
        detail::integrate_against_law(law, nodes, [&](double z) { return sf.w(x + z); }, cfg).value;
    if (law.atom()) {
        const auto& a = *law.atom();
        value += sf.w(x + a.location) * a.location * a.mass;
    }
    return value;
}

// ---------------------------------------------------------------------------------------------
// First passage

enum class PassageMethod { automatic, closed_form, kendall_quadrature };

// P(tau_depth^+ <= r) for X started at 0, equivalently P_{-depth}(tau_0^+ <= r).
// Kendall's identity turns it into int_0^r (depth/s) P(X_s in d depth) ds, where the measure
// in s carries an atom at s = depth/c of mass e^{-eta depth/c} for Cramer-Lundberg.
// Brownian motion uses the inverse-Gaussian CDF unless kendall_quadrature is requested.
inline double first_passage_cdf(const LevyModel& model, double depth, double r,
                                PassageMethod method = PassageMethod::automatic,
                                const NumericsConfig& cfg = {}) {
    if (!(depth > 0.0)) throw domain_error("first_passage_cdf: depth must be > 0");
    if (!(r > 0.0)) throw domain_error("delay r must be > 0");

    if (model.kind() == ModelKind::brownian && method != PassageMethod::kendall_quadrature) {
        const auto m = *model.as<BrownianDrift>();
        const double sd = m.sigma * std::sqrt(r);
        const double a = (m.mu * r - depth) / sd;
        const double b = (m.mu * r + depth) / sd;
        // e^{2 mu d / sigma^2} N(-b) = 0.5 erfcx(b/sqrt2) e^{2 mu d/sigma^2 - b^2/2} for b > 0
        double reflected;
        const double log_shift = 2.0 * m.mu * depth / (m.sigma * m.sigma);
        if (b > 0.0)
            reflected = 0.5 * special::erfcx(b / std::numbers::sqrt2) * std::exp(log_shift - 0.5 * b * b);
        else
            reflected = std::exp(log_shift) * special::normal_cdf(-b);
        return std::clamp(special::normal_cdf(a) + reflected, 0.0, 1.0);
    }
    if (method == PassageMethod::closed_form)
        throw model_error("first_passage_cdf: closed form available for Brownian motion only");

    const double abs_tol = 1e-13, rel_tol = 1e-11;
    switch (model.kind()) {
        case ModelKind::brownian: {
            const auto m = *model.as<BrownianDrift>();
            auto f = [&](double s) {
                return s > 0.0 ? depth / s * gaussian_density(depth, m.mu * s, m.sigma * std::sqrt(s)) : 0.0;
            };
            return std::clamp(quad::integrate(f, 0.0, r, abs_tol, rel_tol).value, 0.0, 1.0);
        }
        case ModelKind::cramer_lundberg: {
            const auto m = *model.as<CramerLundbergExp>();
            const double s0 = depth / m.c;
            if (r < s0) return 0.0;
            auto f = [&](double s) {
                return depth / s * cramer_lundberg_density(m, s, depth, cfg.special);
            };
            const double cont = quad::integrate(f, s0, r, abs_tol, rel_tol).value;
            return std::clamp(std::exp(-m.eta * s0) + cont, 0.0, 1.0);
        }
        case ModelKind::stable: {
            const double c = model.as<StableDrift>()->c;
            auto f = [&](double s) {
                return s > 0.0 ? depth / s * stable32_density(depth - c * s, s) : 0.0;
            };
            std::vector<double> pts{0.0};
            if (c > 0.0 && depth / c < r) pts.push_back(depth / c);
            pts.push_back(r);
            return std::clamp(quad::integrate_pieces(f, pts, abs_tol, rel_tol).value, 0.0, 1.0);
        }
        case ModelKind::generic: {
            const auto& g = *model.as<GenericPsi>();
            if (!g.density) throw model_error("generic model needs a density callback");
            if (g.atom) throw model_error("first_passage_cdf: generic models with atoms are not supported");
            auto f = [&](double s) { return s > 0.0 ? depth / s * g.density(depth, s) : 0.0; };
            return std::clamp(quad::integrate(f, 0.0, r, abs_tol, rel_tol).value, 0.0, 1.0);
        }
    }
    throw model_error("unknown model kind");
}

}  // namespace parisian
