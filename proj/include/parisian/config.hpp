#pragma once

#include "parisian/errors.hpp"

namespace parisian {

// Tolerances for series and continued fractions in special_functions.hpp.
struct SpecialFnConfig {
    double series_tol = 1e-14;
    int max_terms = 500;
    double cf_tol = 1e-13;

    void validate() const {
        if (!(series_tol > 0.0 && series_tol <= 1e-6))
            throw config_error("series_tol must lie in (0, 1e-6]");
        if (max_terms < 50) throw config_error("max_terms must be >= 50");
        if (!(cf_tol > 0.0)) throw config_error("cf_tol must be > 0");
    }
};

struct NumericsConfig {
    // Adaptive Gauss-Kronrod tolerances for integrals over the law of X_r.
    double quad_abs_tol = 1e-10;
    double quad_rel_tol = 1e-9;
    int quad_max_panels = 4000;

    // Tail mass (in the sense of the integrand z f(z)) dropped by truncating z-integrals.
    double truncation_tol = 1e-12;

    // Fixed-Talbot node counts: the value and the self-check.
    int inversion_nodes = 32;
    int inversion_check_nodes = 24;
    double inversion_check_tol = 1e-6;

    // Tolerance for |refined - base| when the ruin-formula quadrature path refines itself.
    double refinement_tol = 1e-6;

    SpecialFnConfig special{};

    // Refined copy used for the one-level error estimate.
    NumericsConfig refined() const {
        NumericsConfig c = *this;
        c.quad_abs_tol *= 1e-2;
        c.quad_rel_tol *= 1e-2;
        c.truncation_tol *= 1e-2;
        c.quad_max_panels *= 2;
        return c;
    }

    void validate() const {
        if (!(quad_abs_tol > 0.0) || !(quad_rel_tol > 0.0))
            throw config_error("quadrature tolerances must be > 0");
        if (quad_max_panels < 10) throw config_error("quad_max_panels must be >= 10");
        if (!(truncation_tol > 0.0)) throw config_error("truncation_tol must be > 0");
        if (inversion_nodes < 8 || inversion_check_nodes < 8)
            throw config_error("Talbot node counts must be >= 8");
        special.validate();
    }
};

}  // namespace parisian
