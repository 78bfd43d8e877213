#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "parisian/config.hpp"
#include "parisian/errors.hpp"
#include "parisian/levy_model.hpp"
#include "parisian/monte_carlo.hpp"
#include "parisian/quadrature.hpp"
#include "parisian/scale_function.hpp"
#include "parisian/special_functions.hpp"
#include "parisian/time_r_law.hpp"

namespace parisian {

enum class RuinMethod { automatic, theorem1_quadrature, closed_form, monte_carlo };

inline std::string to_string(RuinMethod m) {
    switch (m) {
        case RuinMethod::automatic: return "auto";
        case RuinMethod::theorem1_quadrature: return "theorem1_quadrature";
        case RuinMethod::closed_form: return "closed_form";
        case RuinMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

struct RuinQuery {
    LevyModel model;
    double x = 0.0;
    double r = 1.0;
    RuinMethod method = RuinMethod::automatic;
};

struct RuinResult {
    double probability = 0.0;
    std::string method;
    double error_estimate = 0.0;
    std::map<std::string, double> diagnostics;
};

// P_x(tau_0^- < inf) = 1 - E[X_1] W(x).
inline double classical_ruin(const LevyModel& model, double x, const NumericsConfig& cfg = {}) {
    const double drift = model.mean_drift();
    if (!(x >= 0.0)) throw domain_error("classical_ruin: x must be >= 0");
    const ScaleFunction sf = ScaleFunction::for_model(model, cfg);
    return std::clamp(1.0 - drift * sf.w(x), 0.0, 1.0);
}

namespace detail {

// 1 - a R(a) with R(a) = N(-a)/phi(a) the Mills ratio. For a >= 3 the continued fraction
// R = 1/(a + 1/(a + 2/(a + 3/(a + ...)))) gives 1 - a R = T/(a + T) with T the tail
// 1/(a + 2/(a + 3/(a + ...))), free of the cancellation in the direct form.
inline double one_minus_a_mills(double a) {
    if (a < 3.0) return 1.0 - a * special::normal_cdf(-a) / special::normal_pdf(a);
    double t = 0.0;
    for (int k = 400; k >= 2; --k) t = k / (a + t);
    const double tail = 1.0 / (a + t);
    return tail / (a + tail);
}

inline RuinResult make_result(double value, double err, const std::string& method) {
    const double slack = err + 1e-14;
    if (value < -slack || value > 1.0 + slack)
        throw numerics_error("ruin probability " + std::to_string(value) +
                             " lies outside [0, 1] by more than its error estimate");
    RuinResult res;
    res.probability = std::clamp(value, 0.0, 1.0);
    res.error_estimate = err;
    res.method = method;
    return res;
}

}  // namespace detail

// Brownian motion closed form:
//   e^{-2 mu x / sigma^2} [s phi(a) - mu r N(-a)] / [s phi(a) + mu r N(a)],  s = sigma sqrt r,
//   a = mu sqrt(r) / sigma.  (The common factor s cancels.)
inline double parisian_ruin_bm_closed(double mu, double sigma, double x, double r) {
    if (!(mu > 0.0)) throw domain_error("parisian_ruin_bm_closed: mu must be > 0");
    if (!(sigma > 0.0)) throw domain_error("parisian_ruin_bm_closed: sigma must be > 0");
    if (!(x >= 0.0)) throw domain_error("parisian_ruin_bm_closed: x must be >= 0");
    if (!(r > 0.0)) throw domain_error("delay r must be > 0");
    const double a = mu * std::sqrt(r) / sigma;
    const double pdf = special::normal_pdf(a);
    const double numerator = pdf * detail::one_minus_a_mills(a);
    const double denominator = pdf + a * special::normal_cdf(a);
    return std::exp(-2.0 * mu * x / (sigma * sigma)) * numerator / denominator;
}

// Cramer-Lundberg closed form e^{(eta/c - alpha) x} (1 - r E[X_1] / m(r)), where m(r) is the
// incomplete-gamma series for int_0^inf z P(X_r in dz).
inline double parisian_ruin_cl_closed(double c, double eta, double alpha, double x, double r,
                                      const SpecialFnConfig& cfg = {}) {
    if (!(c > 0.0 && eta > 0.0 && alpha > 0.0))
        throw domain_error("parisian_ruin_cl_closed: c, eta, alpha must be > 0");
    if (!(c > eta / alpha)) throw domain_error("parisian_ruin_cl_closed: needs c > eta/alpha");
    if (!(x >= 0.0)) throw domain_error("parisian_ruin_cl_closed: x must be >= 0");
    if (!(r > 0.0)) throw domain_error("delay r must be > 0");
    const CramerLundbergExp m{c, eta, alpha};
    const double pm = detail::cramer_lundberg_partial_mean(m, r, cfg);
    const double drift = c - eta / alpha;
    return std::exp((eta / c - alpha) * x) * (1.0 - r * drift / pm);
}

namespace detail {

struct FormulaParts {
    double numerator;
    double partial_mean;
};

inline FormulaParts formula_parts(const LevyModel& model, double x, double r,
                                    const NumericsConfig& cfg) {
    const ScaleFunction sf = ScaleFunction::for_model(model, cfg);
    const PositiveLaw law = positive_law(model, r, cfg);
    return {weighted_scale_integral(law, sf, x, cfg),
            partial_mean_quadrature(law, cfg, model.expected_increment())};
}

inline RuinResult closed_form_ruin(const LevyModel& model, double x, double r,
                                   const NumericsConfig& cfg) {
    const double drift = model.mean_drift();
    RuinResult res;
    double value = 0.0;
    if (const auto* bm = model.as<BrownianDrift>()) {
        if (x >= 0.0) {
            value = parisian_ruin_bm_closed(bm->mu, bm->sigma, x, r);
        } else {
            const double pm = positive_law(model, r, cfg).closed_partial_mean().value();
            const double passage = first_passage_cdf(model, -x, r, PassageMethod::closed_form, cfg);
            value = 1.0 - r * drift * passage / pm;
            res.diagnostics["first_passage"] = passage;
            res.diagnostics["partial_mean"] = pm;
        }
    } else if (const auto* cl = model.as<CramerLundbergExp>()) {
        if (x < 0.0)
            throw model_error("closed form for Cramer-Lundberg needs x >= 0; use theorem1_quadrature");
        value = parisian_ruin_cl_closed(cl->c, cl->eta, cl->alpha, x, r, cfg.special);
        res.diagnostics["partial_mean"] = detail::cramer_lundberg_partial_mean(*cl, r, cfg.special);
    } else {
        throw model_error("no closed form for model kind " + to_string(model.kind()));
    }
    auto out = make_result(value, 1e-13, "closed_form");
    out.diagnostics = res.diagnostics;
    out.diagnostics["mean_drift"] = drift;
    return out;
}

inline RuinResult quadrature_ruin(const LevyModel& model, double x, double r, const NumericsConfig& cfg) {
    const double drift = model.mean_drift();
    const NumericsConfig fine = cfg.refined();
    std::map<std::string, double> diag;
    double base = 0.0, refined = 0.0;
    if (x >= 0.0) {
        const auto p0 = formula_parts(model, x, r, cfg);
        const auto p1 = formula_parts(model, x, r, fine);
        base = 1.0 - drift * p0.numerator / p0.partial_mean;
        refined = 1.0 - drift * p1.numerator / p1.partial_mean;
        diag["numerator"] = p1.numerator;
        diag["partial_mean"] = p1.partial_mean;
    } else {
        // P_x = 1 - P_x(tau_0^+ <= r) (1 - P_0), and 1 - P_0 = r E[X_1] / int z P(X_r in dz)
        // because int W(z) z P(X_r in dz) = r.
        auto value = [&](const NumericsConfig& c, bool record) {
            const PositiveLaw law = positive_law(model, r, c);
            const double pm = partial_mean_quadrature(law, c, drift);
            const double passage = first_passage_cdf(model, -x, r, PassageMethod::kendall_quadrature, c);
            if (record) {
                diag["partial_mean"] = pm;
                diag["first_passage"] = passage;
            }
            return 1.0 - r * drift * passage / pm;
        };
        base = value(cfg, false);
        refined = value(fine, true);
    }
    const double err = std::abs(refined - base);
    if (err > cfg.refinement_tol)
        throw numerics_error("ruin-formula quadrature did not stabilize under refinement (change " +
                             std::to_string(err) + ")");
    auto res = make_result(refined, err, "theorem1_quadrature");
    res.diagnostics = diag;
    res.diagnostics["mean_drift"] = drift;
    return res;
}

}  // namespace detail

// Parisian ruin probability P_x(kappa_r < inf). A model without positive drift returns 1
// (method "degenerate-drift"). method=auto uses the closed form for Brownian motion and,
// for x >= 0, Cramer-Lundberg; quadrature otherwise. Monte Carlo only when requested.
inline RuinResult parisian_ruin(const RuinQuery& q, const NumericsConfig& cfg = {},
                                const SimConfig& sim = {}) {
    if (!(q.r > 0.0)) throw domain_error("delay r must be > 0");
    if (!std::isfinite(q.x)) throw domain_error("initial capital x must be finite");
    cfg.validate();
    if (!(q.model.expected_increment() > 0.0)) {
        RuinResult res;
        res.probability = 1.0;
        res.method = "degenerate-drift";
        res.diagnostics["mean_drift"] = q.model.expected_increment();
        return res;
    }
    RuinMethod method = q.method;
    if (method == RuinMethod::automatic) {
        const bool closed = q.model.kind() == ModelKind::brownian ||
                            (q.model.kind() == ModelKind::cramer_lundberg && q.x >= 0.0);
        method = closed ? RuinMethod::closed_form : RuinMethod::theorem1_quadrature;
    }
    switch (method) {
        case RuinMethod::closed_form: return detail::closed_form_ruin(q.model, q.x, q.r, cfg);
        case RuinMethod::theorem1_quadrature: return detail::quadrature_ruin(q.model, q.x, q.r, cfg);
        case RuinMethod::monte_carlo: {
            const auto est = simulate_parisian(q.model, q.x, q.r, sim);
            RuinResult res;
            res.probability = est.p_hat;
            res.method = "monte_carlo";
            res.error_estimate = est.half_width;
            res.diagnostics["n_paths"] = static_cast<double>(est.n_paths);
            res.diagnostics["mean_drift"] = q.model.mean_drift();
            return res;
        }
        case RuinMethod::automatic: break;
    }
    throw config_error("unknown ruin method");
}

// ---------------------------------------------------------------------------------------------
// Identity checks

struct IdentityCheck {
    std::string identity;  // "kendall", "laplace_passage", "ibp"
    std::string point;     // parameters, e.g. "r=1"
    double residual;
    double tolerance;
    bool passed;
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;
    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
    }
};

namespace detail {

inline std::string fmt_point(std::initializer_list<std::pair<const char*, double>> items) {
    std::string out;
    for (const auto& [k, v] : items) {
        if (!out.empty()) out += ",";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s=%g", k, v);
        out += buf;
    }
    return out;
}

// int_0^inf e^{-theta r} (1/r) int_y^inf z P(X_r in dz) dr, with r = s^2 to absorb the 1/sqrt(r)
// behaviour at 0 when y = 0. Truncated where e^{-theta r} has dropped below 1e-14 relative.
inline double laplace_passage_lhs(const LevyModel& model, double theta, double y, const NumericsConfig& cfg) {
    const double drift = model.expected_increment();
    auto inner = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double r = s * s;
        const PositiveLaw law = positive_law(model, r, cfg);
        const double above = y > 0.0 ? partial_mean_above(law, y, cfg, drift)
                                     : partial_mean(law, cfg);
        return 2.0 * std::exp(-theta * r) * above / s;
    };
    const double r_max = (33.0 + std::log1p(1.0 / theta)) / theta;
    std::vector<double> pts{0.0};
    for (double r : {0.01, 0.25, 1.0, 4.0, 16.0})
        if (r < r_max) pts.push_back(std::sqrt(r));
    pts.push_back(std::sqrt(r_max));
    return quad::integrate_pieces(inner, pts, 1e-11, 1e-10, 4000).value;
}

// Both sides of (theta/Phi) int e^{-Phi y} W'(x+y) dy = theta int e^{-Phi y} W(x+y) dy - (theta/Phi) W(x).
inline std::pair<double, double> ibp_sides(const ScaleFunction& sf, double theta, double x) {
    const double phi = sf.model().phi(theta);
    const double y_max = 40.0 / phi;
    // y = s^2 handles the W'(y) ~ y^{-1/2} singularity at x = 0 for unbounded variation.
    auto left = [&](double s) {
        const double y = s * s;
        if (x + y <= 0.0) return 0.0;
        return 2.0 * s * std::exp(-phi * y) * sf.w_prime(x + y);
    };
    auto right = [&](double s) {
        const double y = s * s;
        return 2.0 * s * std::exp(-phi * y) * sf.w(x + y);
    };
    std::vector<double> pts{0.0};
    for (double y : {0.01, 1.0, 10.0})
        if (y < y_max) pts.push_back(std::sqrt(y));
    pts.push_back(std::sqrt(y_max));
    const double lhs = theta / phi * quad::integrate_pieces(left, pts, 1e-13, 1e-11, 8000).value;
    const double rhs = theta * quad::integrate_pieces(right, pts, 1e-13, 1e-11, 8000).value -
                       theta / phi * sf.w(x);
    return {lhs, rhs};
}

}  // namespace detail

// Residual report for the three identities behind the ruin formula:
//   kendall:          |int_0^inf W(z) (z/r) P(X_r in dz) - 1|                 for each r
//   laplace_passage:  |Phi int_0^inf e^{-theta r} (1/r) int_y^inf z P(X_r in dz) dr - e^{-Phi y}|
//                                                                         for each theta, y in ys
//   ibp:              integration by parts of int e^{-Phi y} W'(x+y) dy, relative residual,
//                                                                         for each theta, x in xs
// ys defaults to xs when empty.
inline IdentityReport verify_lemma_identities(const LevyModel& model, const std::vector<double>& thetas,
                                              const std::vector<double>& rs, const std::vector<double>& xs,
                                              const NumericsConfig& cfg = {}, double tolerance = 1e-6,
                                              std::vector<double> ys = {}) {
    if (thetas.empty() || rs.empty() || xs.empty())
        throw domain_error("verify_lemma_identities: parameter lists must be non-empty");
    model.mean_drift();
    if (ys.empty()) ys = xs;
    IdentityReport report;
    auto add = [&](const char* name, std::string point, double residual) {
        const bool ok = std::isfinite(residual) && residual <= tolerance;
        report.checks.push_back({name, std::move(point), residual, tolerance, ok});
    };
    auto guarded = [&](const char* name, std::string point, auto&& compute) {
        try {
            add(name, point, compute());
        } catch (const std::exception&) {
            add(name, point, HUGE_VAL);
        }
    };
    const ScaleFunction sf = ScaleFunction::for_model(model, cfg);
    for (double r : rs) {
        guarded("kendall", detail::fmt_point({{"r", r}}), [&] {
            const PositiveLaw law = positive_law(model, r, cfg);
            return std::abs(weighted_scale_integral(law, sf, 0.0, cfg) / r - 1.0);
        });
    }
    for (double theta : thetas) {
        for (double y : ys) {
            guarded("laplace_passage", detail::fmt_point({{"theta", theta}, {"y", y}}), [&] {
                const double phi = model.phi(theta);
                return std::abs(phi * detail::laplace_passage_lhs(model, theta, y, cfg) - std::exp(-phi * y));
            });
        }
    }
    for (double theta : thetas) {
        for (double x : xs) {
            guarded("ibp", detail::fmt_point({{"theta", theta}, {"x", x}}), [&] {
                const auto [lhs, rhs] = detail::ibp_sides(sf, theta, x);
                return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
            });
        }
    }
    return report;
}

}  // namespace parisian
