#include <catch2/catch_amalgamated.hpp>

#include "parisian/monte_carlo.hpp"
#include "parisian/parisian.hpp"

using namespace parisian;
using Catch::Matchers::WithinAbs;

namespace {

const auto bm = LevyModel::brownian(1, 1);
const auto cl = LevyModel::cramer_lundberg(2, 1, 1);

SimConfig small(std::size_t n, std::uint64_t seed = 7) {
    SimConfig c;
    c.n_paths = n;
    c.seed = seed;
    c.step = 1e-2;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    SimConfig c = small(999);
    CHECK_THROWS_AS(simulate_parisian(cl, 0, 1, c), config_error);
    c = small(1000);
    c.step = 0.02;
    CHECK_THROWS_AS(simulate_parisian(bm, 0, 1, c), config_error);
    c = small(1000);
    c.barrier = 1.0;  // 1 - W(1) = e^{-2} > 1e-4
    CHECK_THROWS_AS(simulate_parisian(bm, 0, 1, c), config_error);
    c = small(1000);
    c.confidence = 1.0;
    CHECK_THROWS_AS(simulate_classical(bm, 0, c), config_error);
    CHECK_THROWS_AS(simulate_parisian(LevyModel::brownian(-1, 1), 0, 1, small(1000)), model_error);
    CHECK_THROWS_AS(simulate_parisian(cl, 0, 0, small(1000)), domain_error);
}

TEST_CASE("estimate fields") {
    const auto e = simulate_parisian(cl, 0, 1, small(20000));
    CHECK(e.n_paths == 20000);
    CHECK(e.p_hat >= 0.0);
    CHECK(e.p_hat <= 1.0);
    CHECK_THAT(e.half_width, WithinAbs(1.959963984540054 * std::sqrt(e.p_hat * (1 - e.p_hat) / 20000), 1e-12));
    CHECK(e.bias_note.find("exact") != std::string::npos);
}

TEST_CASE("reproducible and independent of the worker count") {
    SimConfig a = small(20000, 11);
    a.threads = 1;
    SimConfig b = a;
    b.threads = 3;
    for (const auto& m : {cl, bm}) {
        const auto x = simulate_parisian(m, 0.5, 1, a);
        const auto y = simulate_parisian(m, 0.5, 1, b);
        CHECK(x.p_hat == y.p_hat);
        CHECK(x.half_width == y.half_width);
    }
}

TEST_CASE("different seeds agree within the combined interval") {
    const auto a = simulate_parisian(cl, 0, 1, small(50000, 1));
    const auto b = simulate_parisian(cl, 0, 1, small(50000, 2));
    CHECK(a.p_hat != b.p_hat);
    CHECK(std::abs(a.p_hat - b.p_hat) <= 3 * std::hypot(a.half_width, b.half_width));
}

TEST_CASE("Cramer-Lundberg exact simulation matches the closed forms") {
    for (double x : {0.0, 1.0}) {
        const auto e = simulate_parisian(cl, x, 1, small(100000, 3));
        CHECK_THAT(e.p_hat, WithinAbs(parisian_ruin_cl_closed(2, 1, 1, x, 1), 3 * e.half_width));
        const auto c = simulate_classical(cl, x, small(100000, 4));
        CHECK_THAT(c.p_hat, WithinAbs(classical_ruin(cl, x), 3 * c.half_width));
    }
    const auto neg = simulate_parisian(cl, -0.5, 1, small(100000, 5));
    CHECK_THAT(neg.p_hat, WithinAbs(parisian_ruin({cl, -0.5, 1}).probability, 3 * neg.half_width));
}

TEST_CASE("Brownian grid simulation") {
    SimConfig c = small(40000, 9);
    c.step = 2e-3;
    const auto e = simulate_parisian(bm, 0, 1, c);
    CHECK_THAT(e.p_hat, WithinAbs(parisian_ruin_bm_closed(1, 1, 0, 1), std::max(3 * e.half_width, 0.01)));
    const auto k = simulate_classical(bm, 1, small(40000, 10));
    CHECK_THAT(k.p_hat, WithinAbs(std::exp(-2.0), std::max(3 * k.half_width, 0.01)));
    CHECK(e.bias_note.find("bridge") != std::string::npos);
}

TEST_CASE("stable grid simulation tracks the ruin formula") {
    SimConfig c = small(4000, 12);
    c.max_barrier_bias = 0.05;
    c.barrier = 130.0;  // 1 - W(130) = E_{1/2}(-sqrt(130)) ~ 0.049
    const auto st = LevyModel::stable(1);
    const auto e = simulate_parisian(st, 0, 1, c);
    const double ref = parisian_ruin({st, 0, 1}).probability;
    // barrier bias is one-sided (it can only lower p_hat) and bounded by 0.05
    CHECK(e.p_hat >= ref - 3 * e.half_width - 0.05 - 0.02);
    CHECK(e.p_hat <= ref + 3 * e.half_width + 0.02);
}

TEST_CASE("Parisian ruin implies classical ruin") {
    const auto p = simulate_parisian(cl, 5, 1, small(50000, 13));
    const auto q = simulate_classical(cl, 5, small(50000, 13));
    CHECK(p.p_hat <= q.p_hat);
}

TEST_CASE("pathwise nesting in r on common paths") {
    const SimConfig c = small(1000, 21);
    for (std::uint64_t i = 0; i < 3000; ++i) {
        bool prev = true;
        for (double r : {0.1, 0.3, 0.7, 1.5, 3.0}) {
            const bool ruined = simulate_parisian_path(cl, 0.2, r, c, i);
            CHECK((!ruined || prev));
            prev = ruined;
        }
    }
}

TEST_CASE("survival barrier: doubling b changes little") {
    SimConfig a = small(100000, 31);
    a.barrier = 20.0;
    SimConfig b = a;
    b.barrier = 40.0;
    const auto x = simulate_parisian(cl, 0, 1, a);
    const auto y = simulate_parisian(cl, 0, 1, b);
    CHECK(std::abs(x.p_hat - y.p_hat) < 1e-3 + 3 * std::hypot(x.half_width, y.half_width));
    // starting just under the barrier: classical ruin is small
    const auto z = simulate_classical(cl, 39.9, b);
    CHECK(z.p_hat <= 1e-3);
}

TEST_CASE("stable sampler has the right Laplace transform") {
    mc_detail::StableSampler s;
    auto eng = mc_detail::path_engine(5, 0);
    const int n = 400000;
    double acc = 0, mean = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s(eng);
        acc += std::exp(0.5 * z);
        mean += z;
    }
    CHECK_THAT(acc / n, WithinAbs(std::exp(std::pow(0.5, 1.5)), 5e-3));
    CHECK_THAT(mean / n, WithinAbs(0.0, 0.03));
}
