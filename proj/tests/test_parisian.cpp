#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "parisian/parisian.hpp"

using namespace parisian;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const auto bm = LevyModel::brownian(1, 1);
const auto cl = LevyModel::cramer_lundberg(2, 1, 1);
const auto st = LevyModel::stable(1);

// The Cramer-Lundberg series evaluated literally, lower incomplete gammas from boost.
double cl_series(double c, double eta, double alpha, double x, double r) {
    double sum = 0;
    for (int m = 0; m < 200; ++m) {
        const double w = std::exp((m + 1) * std::log(eta * r) - std::lgamma(m + 1.0) - std::lgamma(m + 2.0));
        sum += w * (c * boost::math::tgamma_lower(m + 1.0, c * r * alpha) -
                    boost::math::tgamma_lower(m + 2.0, c * r * alpha) / (alpha * r));
    }
    return std::exp((eta / c - alpha) * x) * (1.0 - std::exp(eta * r) * (c - eta / alpha) / (c + sum));
}

double bm_reference(double mu, double sigma, double x, double r) {
    const boost::math::normal n;
    const double s = sigma * std::sqrt(r), a = mu * std::sqrt(r) / sigma;
    const double g = s / std::sqrt(2 * std::numbers::pi) * std::exp(-a * a / 2);
    return std::exp(-2 * mu * x / (sigma * sigma)) * (g - mu * r * boost::math::cdf(n, -a)) /
           (g + mu * r * boost::math::cdf(n, a));
}

}  // namespace

TEST_CASE("Brownian closed form") {
    CHECK_THAT(parisian_ruin_bm_closed(1, 1, 0, 1), WithinRel(0.076907856344457635, 1e-13));
    CHECK_THAT(parisian_ruin_bm_closed(1, 1, 0, 1), WithinAbs(0.0769, 5e-4));
    CHECK_THAT(parisian_ruin_bm_closed(1, 1, 1, 1), WithinRel(0.010408346521497894, 1e-13));
    CHECK_THAT(parisian_ruin_bm_closed(0.5, 2, 0.3, 2), WithinRel(0.38142628319228027, 1e-13));
    CHECK_THAT(parisian_ruin_bm_closed(3, 1, 0, 4), WithinRel(2.605949659883701e-11, 1e-10));
    CHECK(parisian_ruin_bm_closed(10, 1, 0, 10) < 1e-12);

    SECTION("matches the textbook expression on a moderate grid") {
        for (double mu : {0.2, 1.0, 2.0})
            for (double sigma : {0.5, 1.0, 3.0})
                for (double r : {0.1, 1.0, 3.0})
                    CHECK_THAT(parisian_ruin_bm_closed(mu, sigma, 0.4, r),
                               WithinRel(bm_reference(mu, sigma, 0.4, r), 1e-9));
    }
    SECTION("positive at x=0 and increasing in sigma") {
        for (double mu : {0.1, 1.0, 2.0})
            for (double r : {0.01, 1.0, 4.0}) {
                double prev = 0.0;
                for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0}) {
                    const double p = parisian_ruin_bm_closed(mu, sigma, 0.0, r);
                    CHECK(p > 0.0);
                    CHECK(p > prev);
                    prev = p;
                }
            }
    }
    CHECK_THROWS_AS(parisian_ruin_bm_closed(0, 1, 0, 1), domain_error);
    CHECK_THROWS_AS(parisian_ruin_bm_closed(1, 1, -1, 1), domain_error);
    CHECK_THROWS_AS(parisian_ruin_bm_closed(1, 1, 0, 0), domain_error);
}

TEST_CASE("Cramer-Lundberg closed form") {
    // mpmath evaluation of the series expression (frozen)
    CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 0, 0.5), WithinRel(0.3115366602410621, 1e-12));
    CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 0, 1), WithinRel(0.21110184658718783, 1e-12));
    CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 1, 1), WithinRel(0.12803974227708217, 1e-12));
    CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 0, 4), WithinRel(0.046585606292284667, 1e-12));
    CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 2, 0.25), WithinRel(0.14385952878926033, 1e-12));

    for (double r : {0.25, 1.0, 3.0})
        CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 0.7, r), WithinAbs(cl_series(2, 1, 1, 0.7, r), 1e-10));
    CHECK_THAT(parisian_ruin_cl_closed(2, 1, 1, 1, 1) / parisian_ruin_cl_closed(2, 1, 1, 0, 1),
               WithinRel(std::exp(-0.5), 1e-14));
    CHECK(std::abs(parisian_ruin_cl_closed(2, 1, 1, 0, 200)) < 1e-6);
    CHECK_THROWS_AS(parisian_ruin_cl_closed(1, 1, 1, 0, 1), domain_error);
}

TEST_CASE("classical ruin") {
    CHECK(classical_ruin(bm, 0) == 1.0);
    CHECK_THAT(classical_ruin(bm, 1), WithinRel(std::exp(-2.0), 1e-14));
    CHECK_THAT(classical_ruin(cl, 0), WithinRel(0.5, 1e-15));
    CHECK(classical_ruin(st, 0) == 1.0);
    CHECK(classical_ruin(cl, 100) < 1e-12);
    CHECK_THROWS_AS(classical_ruin(LevyModel::brownian(-1, 1), 1), model_error);
}

TEST_CASE("ruin-formula quadrature reproduces the closed forms") {
    for (const auto& m : {bm, cl})
        for (double x : {0.0, 0.5, 1.0, 2.0, 5.0})
            for (double r : {0.25, 1.0, 4.0}) {
                const auto a = parisian_ruin({m, x, r, RuinMethod::closed_form});
                const auto b = parisian_ruin({m, x, r, RuinMethod::theorem1_quadrature});
                CHECK_THAT(a.probability, WithinAbs(b.probability, 1e-8));
                CHECK(b.error_estimate <= 1e-6);
                CHECK(b.diagnostics.count("partial_mean") == 1);
            }
}

TEST_CASE("method selection and degenerate drift") {
    CHECK(parisian_ruin({bm, 0, 1}).method == "closed_form");
    CHECK(parisian_ruin({cl, 0, 1}).method == "closed_form");
    CHECK(parisian_ruin({cl, -1, 1}).method == "theorem1_quadrature");
    CHECK(parisian_ruin({st, 0, 1}).method == "theorem1_quadrature");
    CHECK_THROWS_AS(parisian_ruin({st, 0, 1, RuinMethod::closed_form}), model_error);

    const auto d = parisian_ruin({LevyModel::cramer_lundberg(1, 1, 1), 3, 1});
    CHECK(d.probability == 1.0);
    CHECK(d.method == "degenerate-drift");
    CHECK_THROWS_AS(parisian_ruin({bm, 0, 0}), domain_error);
    CHECK_THROWS_AS(parisian_ruin({bm, 0, -1}), domain_error);
}

TEST_CASE("limits") {
    CHECK(parisian_ruin({bm, 200, 1}).probability <= 1e-8);
    CHECK(parisian_ruin({bm, 200, 1, RuinMethod::theorem1_quadrature}).probability <= 1e-8);
    CHECK_THAT(parisian_ruin({bm, 1, 1e-4}).probability, WithinAbs(classical_ruin(bm, 1), 1e-2));
    CHECK_THAT(parisian_ruin({cl, 1, 1e-4}).probability, WithinAbs(classical_ruin(cl, 1), 1e-2));
}

TEST_CASE("negative initial capital") {
    const auto closed = parisian_ruin({bm, -0.5, 1, RuinMethod::closed_form});
    const auto kendall = parisian_ruin({bm, -0.5, 1, RuinMethod::theorem1_quadrature});
    CHECK_THAT(closed.probability, WithinAbs(kendall.probability, 1e-5));
    CHECK(closed.probability > parisian_ruin({bm, 0, 1}).probability);
    CHECK_THAT(parisian_ruin({bm, -1e-4, 1}).probability, WithinAbs(parisian_ruin({bm, 0, 1}).probability, 1e-4));

    SECTION("more negative is worse; below depth c r the CL ruin is certain") {
        for (const auto& m : {bm, cl, st}) {
            double prev = parisian_ruin({m, 0, 1}).probability;
            for (double x : {-0.1, -0.5, -1.0, -1.9}) {
                const double p = parisian_ruin({m, x, 1}).probability;
                CHECK(p >= prev - 1e-9);
                prev = p;
            }
        }
        CHECK(parisian_ruin({cl, -2.5, 1}).probability == 1.0);
    }
    SECTION("the x<0 formula carries the factor r") {
        // P_x = 1 - P_x(tau_0^+ <= r) (1 - P_0), by the strong Markov property at tau_0^+.
        for (double r : {0.5, 2.0}) {
            const double p0 = parisian_ruin({bm, 0, r}).probability;
            const double pass = first_passage_cdf(bm, 0.5, r);
            CHECK_THAT(parisian_ruin({bm, -0.5, r}).probability, WithinAbs(1 - pass * (1 - p0), 1e-12));
        }
    }
}

TEST_CASE("sandwich and monotonicity on grids") {
    for (const auto& m : {bm, cl, st}) {
        const ScaleFunction sf = ScaleFunction::for_model(m);
        const double drift = m.mean_drift();
        std::vector<double> xs, rs;
        for (int i = 0; i < 8; ++i) xs.push_back(0.4 * i);
        for (int j = 1; j <= 5; ++j) rs.push_back(0.3 * j * j);
        std::vector<std::vector<double>> p(xs.size(), std::vector<double>(rs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < rs.size(); ++j) {
                p[i][j] = parisian_ruin({m, xs[i], rs[j]}).probability;
                CHECK(p[i][j] >= 0.0);
                CHECK(p[i][j] <= 1.0 - drift * sf.w(xs[i]) + 1e-8);
                if (i > 0) CHECK(p[i][j] <= p[i - 1][j] + 1e-9);
                if (j > 0) CHECK(p[i][j] <= p[i][j - 1] + 1e-9);
            }
    }
}

TEST_CASE("generic model through user callbacks matches Brownian motion") {
    GenericPsi g;
    g.psi = [](std::complex<double> s) { return s + 0.5 * s * s; };
    g.psi_prime0 = 1.0;
    g.density = [](double z, double r) {
        return special::normal_pdf((z - r) / std::sqrt(r)) / std::sqrt(r);
    };
    const auto gm = LevyModel::generic(g);
    for (double x : {0.0, 1.0})
        CHECK_THAT(parisian_ruin({gm, x, 1}).probability, WithinAbs(parisian_ruin_bm_closed(1, 1, x, 1), 1e-7));
    CHECK_THAT(parisian_ruin({gm, -0.5, 1}).probability,
               WithinAbs(parisian_ruin({bm, -0.5, 1}).probability, 1e-7));
}

TEST_CASE("identity report") {
    for (const auto& m : {bm, cl}) {
        const auto rep = verify_lemma_identities(m, {0.5, 1, 2}, {0.1, 0.5, 1, 2, 5}, {0, 0.5, 1});
        CHECK(rep.all_passed());
        CHECK(rep.checks.size() == 5 + 9 + 9);
        for (const auto& c : rep.checks) CHECK(c.residual <= 1e-6);
    }
    const auto strict = verify_lemma_identities(bm, {1}, {1}, {1}, NumericsConfig{}, 0.0);
    CHECK_FALSE(strict.all_passed());
    CHECK_THROWS_AS(verify_lemma_identities(bm, {}, {1}, {1}), domain_error);
}
