#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <random>

#include "parisian/errors.hpp"
#include "parisian/levy_model.hpp"
#include "parisian/scale_function.hpp"

namespace parisian {

struct SimConfig {
    std::size_t n_paths = 100000;
    // Survival barrier b. Empty: the smallest b = 2^k with 1 - E[X_1] W(b) <= barrier_bias / 10.
    std::optional<double> barrier;
    // Largest accepted survival-truncation bias 1 - E[X_1] W(b).
    double max_barrier_bias = 1e-4;
    // Grid step for Brownian and stable paths; must be <= r/100 for Parisian runs.
    double step = 1e-3;
    std::uint64_t seed = 0x5eed5eedULL;
    double confidence = 0.95;
    // Brownian only: sample zero crossings of the Brownian bridge inside each grid step.
    bool bridge_correction = true;
    // Worker count; 0 reads PARISIAN_THREADS, then falls back to hardware_concurrency.
    unsigned threads = 0;
};

struct McEstimate {
    double p_hat = 0.0;
    double half_width = 0.0;
    std::size_t n_paths = 0;
    std::string bias_note;
};

namespace mc_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One independent stream per path, derived from (seed, path index) only.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632be59bd9b4e019ULL)));
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PARISIAN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// 1 - E[X_1] W(b): the probability of ever going below 0 from b.
inline double barrier_bias(const ScaleFunction& sf, double b) {
    return std::max(0.0, 1.0 - sf.model().expected_increment() * sf.w(b));
}

// Spectrally negative 3/2-stable draw with E[e^{theta Z}] = e^{theta^{3/2}} by
// Chambers-Mallows-Stuck with beta = -1 and scale 2^{-1/3}.
class StableSampler {
public:
    template <class Engine>
    double operator()(Engine& eng) {
        const double v = std::numbers::pi * (uniform_(eng) - 0.5);
        double w = exp_(eng);
        if (w <= 0.0) w = std::numeric_limits<double>::min();
        const double av = alpha_ * (v + b_);
        const double x = s_ * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha_) *
                         std::pow(std::cos(v - av) / w, (1.0 - alpha_) / alpha_);
        return scale_ * x;
    }

private:
    static constexpr double alpha_ = 1.5;
    // beta = -1: tan(pi alpha / 2) = -1, so B = arctan(1)/alpha and S = 2^{1/(2 alpha)}.
    const double b_ = std::atan(1.0) / alpha_;
    const double s_ = std::pow(2.0, 1.0 / (2.0 * alpha_));
    const double scale_ = std::pow(2.0, -1.0 / 3.0);
    boost::random::uniform_01<double> uniform_;
    boost::random::exponential_distribution<double> exp_{1.0};
};

struct PathSetup {
    LevyModel model;
    double x;
    double r;  // +inf for classical ruin
    double barrier;
    double step;
    bool bridge;
    std::uint64_t seed;
};

// Cramer-Lundberg, exact: jumps at Poisson epochs, straight lines of slope c in between.
// Draws (inter-arrival, claim) come in fixed pairs, so the draw sequence does not depend on r.
inline bool cl_path_ruined(const PathSetup& s, std::uint64_t path) {
    const auto m = *s.model.as<CramerLundbergExp>();
    auto eng = path_engine(s.seed, path);
    boost::random::exponential_distribution<double> wait(m.eta), claim(m.alpha);
    const bool classical = !std::isfinite(s.r);
    double level = s.x;
    double elapsed = 0.0;  // time since the current excursion below 0 started
    if (level < 0.0 && classical) return true;
    for (std::size_t event = 0; event < 100000000; ++event) {
        const double tau = wait(eng);
        const double jump = claim(eng);
        if (level >= 0.0) {
            const double top = level + m.c * tau;
            if (top >= s.barrier) return false;
            level = top - jump;
            if (level < 0.0) {
                if (classical) return true;
                elapsed = 0.0;
            }
            continue;
        }
        const double to_zero = -level / m.c;
        if (to_zero <= tau) {
            if (elapsed + to_zero > s.r) return true;
            const double top = m.c * (tau - to_zero);
            if (top >= s.barrier) return false;
            level = top - jump;
            if (level < 0.0) elapsed = 0.0;
        } else {
            elapsed += tau;
            if (elapsed > s.r) return true;
            level += m.c * tau - jump;
        }
    }
    throw numerics_error("simulation: path did not terminate");
}

// Brownian motion on a grid of step h. Within an excursion, a step that starts and ends below
// 0 is treated as having touched 0 with the bridge probability exp(-2 a b / (sigma^2 h)); the
// excursion then restarts. Crossing times inside a step are linearly interpolated.
inline bool bm_path_ruined(const PathSetup& s, std::uint64_t path) {
    const auto m = *s.model.as<BrownianDrift>();
    auto eng = path_engine(s.seed, path);
    boost::random::normal_distribution<double> normal;
    boost::random::uniform_01<double> uniform;
    const bool classical = !std::isfinite(s.r);
    const double h = s.step;
    const double drift = m.mu * h;
    const double sd = m.sigma * std::sqrt(h);
    const double bridge_scale = 2.0 / (m.sigma * m.sigma * h);
    double level = s.x;
    double elapsed = 0.0;
    if (level < 0.0 && classical) return true;
    for (std::size_t k = 0; k < 4000000000ULL; ++k) {
        const double next = level + drift + sd * normal(eng);
        if (level >= 0.0) {
            if (next >= 0.0) {
                if (classical && s.bridge && level * next * bridge_scale < 40.0 &&
                    uniform(eng) < std::exp(-level * next * bridge_scale))
                    return true;
                if (next >= s.barrier) return false;
            } else {
                if (classical) return true;
                elapsed = h * next / (next - level);  // time below 0 within this step
                if (elapsed > s.r) return true;
            }
        } else {
            if (next >= 0.0) {
                const double below = h * level / (level - next);
                if (elapsed + below > s.r) return true;
            } else {
                if (s.bridge && level * next * bridge_scale < 40.0 &&
                    uniform(eng) < std::exp(-level * next * bridge_scale)) {
                    elapsed = h * next / (next + level);
                } else {
                    elapsed += h;
                }
                if (elapsed > s.r) return true;
            }
        }
        level = next;
    }
    throw numerics_error("simulation: path did not terminate");
}

// Drifted 3/2-stable process on a grid: increments c h + h^{2/3} Z with Z ~ Z_1 (exact in law).
// No upward jumps, so up-crossings of 0 are continuous and the return time is interpolated.
inline bool stable_path_ruined(const PathSetup& s, std::uint64_t path) {
    const double c = s.model.as<StableDrift>()->c;
    auto eng = path_engine(s.seed, path);
    StableSampler sampler;
    const bool classical = !std::isfinite(s.r);
    const double h = s.step;
    const double scale = std::pow(h, 2.0 / 3.0);
    double level = s.x;
    double elapsed = 0.0;
    if (level < 0.0 && classical) return true;
    for (std::size_t k = 0; k < 4000000000ULL; ++k) {
        const double next = level + c * h + scale * sampler(eng);
        if (level >= 0.0) {
            if (next >= 0.0) {
                if (next >= s.barrier) return false;
            } else {
                if (classical) return true;
                elapsed = 0.0;
            }
        } else {
            if (next >= 0.0) {
                const double below = h * level / (level - next);
                if (elapsed + below > s.r) return true;
            } else {
                elapsed += h;
                if (elapsed > s.r) return true;
            }
        }
        level = next;
    }
    throw numerics_error("simulation: path did not terminate");
}

inline bool path_ruined(const PathSetup& s, std::uint64_t path) {
    switch (s.model.kind()) {
        case ModelKind::cramer_lundberg: return cl_path_ruined(s, path);
        case ModelKind::brownian: return bm_path_ruined(s, path);
        case ModelKind::stable: return stable_path_ruined(s, path);
        case ModelKind::generic: break;
    }
    throw model_error("simulation is not available for generic models");
}

inline double choose_barrier(const LevyModel& model, const SimConfig& cfg) {
    const ScaleFunction sf = ScaleFunction::for_model(model);
    if (cfg.barrier) {
        const double b = *cfg.barrier;
        if (!(b > 0.0)) throw config_error("barrier must be > 0");
        if (barrier_bias(sf, b) > cfg.max_barrier_bias)
            throw config_error("barrier too low: 1 - E[X_1] W(b) = " + std::to_string(barrier_bias(sf, b)) +
                               " exceeds max_barrier_bias");
        return b;
    }
    const double target = 0.1 * cfg.max_barrier_bias;
    double b = 1.0;
    for (int i = 0; i < 80 && barrier_bias(sf, b) > target; ++i) b *= 2.0;
    if (barrier_bias(sf, b) > target) throw config_error("no survival barrier found for max_barrier_bias");
    return b;
}

inline void validate(const LevyModel& model, const SimConfig& cfg, double r, bool check_paths = true) {
    if (model.kind() == ModelKind::generic) throw model_error("simulation is not available for generic models");
    model.mean_drift();
    if (check_paths && cfg.n_paths < 1000) throw config_error("n_paths must be >= 1000");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) throw config_error("confidence must lie in (0, 1)");
    if (!(cfg.max_barrier_bias > 0.0 && cfg.max_barrier_bias < 1.0))
        throw config_error("max_barrier_bias must lie in (0, 1)");
    if (model.kind() != ModelKind::cramer_lundberg) {
        if (!(cfg.step > 0.0)) throw config_error("step must be > 0");
        if (std::isfinite(r) && cfg.step > r / 100.0) throw config_error("step must be <= r/100");
    }
}

inline McEstimate run(const PathSetup& setup, const SimConfig& cfg) {
    const unsigned threads = std::min<std::size_t>(resolve_threads(cfg.threads), cfg.n_paths);
    std::vector<std::size_t> hits(threads, 0);
    std::atomic<std::size_t> next_block{0};
    constexpr std::size_t block = 4096;
    auto worker = [&](unsigned id) {
        std::size_t count = 0;
        for (;;) {
            const std::size_t start = next_block.fetch_add(block);
            if (start >= cfg.n_paths) break;
            const std::size_t end = std::min(cfg.n_paths, start + block);
            for (std::size_t i = start; i < end; ++i) count += path_ruined(setup, i) ? 1 : 0;
        }
        hits[id] = count;
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    worker(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    std::size_t total = 0;
    for (auto hcount : hits) total += hcount;

    McEstimate est;
    est.n_paths = cfg.n_paths;
    est.p_hat = static_cast<double>(total) / static_cast<double>(cfg.n_paths);
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * cfg.confidence);
    est.half_width = z * std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(cfg.n_paths));
    return est;
}

inline std::string format_bias_note(const LevyModel& model, const PathSetup& s, double bias) {
    std::string note = "survival barrier b=" + std::to_string(s.barrier) +
                       " (truncation bias <= " + std::to_string(bias) + ")";
    switch (model.kind()) {
        case ModelKind::cramer_lundberg: note += "; exact event-driven paths"; break;
        case ModelKind::brownian:
            note += "; grid step h=" + std::to_string(s.step) +
                    (s.bridge ? " with bridge zero-crossing correction" : ", O(sqrt(h)) grid bias");
            break;
        case ModelKind::stable:
            note += "; grid step h=" + std::to_string(s.step) + ", O(h^(2/3)) grid bias in excursion lengths";
            break;
        case ModelKind::generic: break;
    }
    return note;
}

inline PathSetup make_setup(const LevyModel& model, double x, double r, const SimConfig& cfg) {
    const double b = choose_barrier(model, cfg);
    if (model.kind() != ModelKind::cramer_lundberg && b / (model.mean_drift() * cfg.step) > 1e9)
        throw config_error("survival barrier b=" + std::to_string(b) +
                           " needs too many grid steps per path; raise max_barrier_bias or the step");
    return PathSetup{model, x, r, b, cfg.step, cfg.bridge_correction, cfg.seed};
}

}  // namespace mc_detail

// Monte Carlo estimate of P_x(kappa_r < inf).
inline McEstimate simulate_parisian(const LevyModel& model, double x, double r, const SimConfig& cfg = {}) {
    if (!(r > 0.0)) throw domain_error("delay r must be > 0");
    mc_detail::validate(model, cfg, r);
    const auto setup = mc_detail::make_setup(model, x, r, cfg);
    auto est = mc_detail::run(setup, cfg);
    const ScaleFunction sf = ScaleFunction::for_model(model);
    est.bias_note = mc_detail::format_bias_note(model, setup, mc_detail::barrier_bias(sf, setup.barrier));
    return est;
}

// Monte Carlo estimate of the classical ruin probability P_x(tau_0^- < inf).
inline McEstimate simulate_classical(const LevyModel& model, double x, const SimConfig& cfg = {}) {
    const double inf = std::numeric_limits<double>::infinity();
    mc_detail::validate(model, cfg, inf);
    const auto setup = mc_detail::make_setup(model, x, inf, cfg);
    auto est = mc_detail::run(setup, cfg);
    const ScaleFunction sf = ScaleFunction::for_model(model);
    est.bias_note = mc_detail::format_bias_note(model, setup, mc_detail::barrier_bias(sf, setup.barrier));
    return est;
}

// Parisian ruin indicator of a single simulated path; path i uses the same random stream for
// every r, which makes the indicators comparable across delays.
inline bool simulate_parisian_path(const LevyModel& model, double x, double r, const SimConfig& cfg,
                                   std::uint64_t path_index) {
    if (!(r > 0.0)) throw domain_error("delay r must be > 0");
    mc_detail::validate(model, cfg, r, false);
    return mc_detail::path_ruined(mc_detail::make_setup(model, x, r, cfg), path_index);
}

}  // namespace parisian
