// Command-line front end: ruin, scale-fn, law, simulate, verify, compare.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parisian/parisian.hpp"

using json = nlohmann::json;
using namespace parisian;

namespace {

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// "a:b:n" -> n evenly spaced points from a to b inclusive.
std::vector<double> parse_grid(const std::string& spec, const char* name) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw usage_error(std::string(name) + " must look like a:b:n");
    double a, b;
    long n;
    try {
        a = std::stod(parts[0]);
        b = std::stod(parts[1]);
        n = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw usage_error(std::string(name) + " must look like a:b:n");
    }
    if (n < 1) throw usage_error(std::string(name) + ": n must be >= 1");
    std::vector<double> out(n);
    for (long i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
    return out;
}

struct ModelOpts {
    std::string kind = "bm";
    double mu = 1.0, sigma = 1.0;
    double c = 2.0, eta = 1.0, alpha = 1.0;

    void attach(CLI::App* app) {
        app->add_option("--model", kind, "bm | cl-exp | stable32")
            ->check(CLI::IsMember({"bm", "cl-exp", "stable32"}));
        app->add_option("--mu", mu, "bm drift");
        app->add_option("--sigma", sigma, "bm volatility");
        app->add_option("--c", c, "premium rate (cl-exp) or drift (stable32)");
        app->add_option("--eta", eta, "claim arrival rate (cl-exp)");
        app->add_option("--alpha", alpha, "exponential claim parameter (cl-exp)");
    }

    LevyModel build(bool c_given) const {
        if (kind == "bm") return LevyModel::brownian(mu, sigma);
        if (kind == "cl-exp") return LevyModel::cramer_lundberg(c, eta, alpha);
        // stable32 defaults to drift 1 unless --c is given
        return LevyModel::stable(c_given ? c : 1.0);
    }
};

struct NumericsOpts {
    NumericsConfig cfg;
    void attach(CLI::App* app) {
        app->add_option("--quad-abs-tol", cfg.quad_abs_tol, "quadrature absolute tolerance")->capture_default_str();
        app->add_option("--quad-rel-tol", cfg.quad_rel_tol, "quadrature relative tolerance")->capture_default_str();
        app->add_option("--quad-max-panels", cfg.quad_max_panels, "quadrature panel cap")->capture_default_str();
        app->add_option("--truncation-tol", cfg.truncation_tol, "tail truncation tolerance")->capture_default_str();
        app->add_option("--inversion-nodes", cfg.inversion_nodes, "Talbot nodes")->capture_default_str();
        app->add_option("--inversion-check-nodes", cfg.inversion_check_nodes, "Talbot check nodes")
            ->capture_default_str();
        app->add_option("--inversion-check-tol", cfg.inversion_check_tol, "Talbot self-check tolerance")
            ->capture_default_str();
        app->add_option("--refinement-tol", cfg.refinement_tol, "ruin-formula refinement tolerance")
            ->capture_default_str();
    }
};

struct SimOpts {
    SimConfig cfg;
    double barrier = 0.0;
    bool no_bridge = false;
    void attach(CLI::App* app) {
        app->add_option("--paths", cfg.n_paths, "number of simulated paths")->capture_default_str();
        app->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
        app->add_option("--barrier", barrier, "survival barrier (default: automatic)");
        app->add_option("--max-barrier-bias", cfg.max_barrier_bias, "largest accepted 1 - E[X_1] W(b)")
            ->capture_default_str();
        app->add_option("--step", cfg.step, "grid step for bm and stable32")->capture_default_str();
        app->add_option("--confidence", cfg.confidence, "confidence level")->capture_default_str();
        app->add_flag("--no-bridge", no_bridge, "disable the Brownian bridge crossing correction");
        app->add_option("--threads", cfg.threads, "worker threads (0: PARISIAN_THREADS or all cores)");
    }
    SimConfig build() const {
        SimConfig out = cfg;
        if (barrier > 0.0) out.barrier = barrier;
        out.bridge_correction = !no_bridge;
        return out;
    }
};

RuinMethod parse_method(const std::string& m) {
    if (m == "auto") return RuinMethod::automatic;
    if (m == "theorem1_quadrature" || m == "quadrature") return RuinMethod::theorem1_quadrature;
    if (m == "closed_form" || m == "closed") return RuinMethod::closed_form;
    if (m == "monte_carlo" || m == "mc") return RuinMethod::monte_carlo;
    throw usage_error("unknown method " + m);
}

unsigned worker_count() {
    if (const char* env = std::getenv("PARISIAN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates f(i) for i < n on worker threads; results are stored by index so the output
// order does not depend on scheduling. The first exception (lowest index) is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F f) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned k = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

json ruin_json(double x, double r, const RuinResult& res) {
    json j;
    j["x"] = x;
    j["r"] = r;
    j["probability"] = res.probability;
    j["method"] = res.method;
    j["error_estimate"] = res.error_estimate;
    j["diagnostics"] = res.diagnostics;
    return j;
}

// Reads key=value lines ('#' comments); keys may use the dotted model.* form.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "model.kind") key = "model";
        else if (key.rfind("model.", 0) == 0) key = key.substr(6);
        std::replace(key.begin(), key.end(), '_', '-');
        out.emplace_back(key, value);
    }
    return out;
}

// Splices config-file entries into argv right after the subcommand, skipping keys that are
// already given as flags, so that flags override the file. Unknown keys then fail parsing.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::size_t sub = 1;
    while (sub < args.size() && args[sub].rfind("-", 0) == 0) sub += args[sub] == "--config" ? 2 : 1;
    if (sub >= args.size()) return args;
    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(path))
        if (!given(key)) injected.push_back("--" + key + "=" + value);
    args.insert(args.begin() + static_cast<long>(sub) + 1, injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parisian ruin probabilities for spectrally negative Levy processes"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_format;
    bool quiet = false;
    app.add_option("--config", config_path, "key=value file; command-line flags take precedence");
    app.add_option("--out-format", out_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--quiet", quiet, "suppress informational messages on stderr");

    // ruin
    auto* ruin = app.add_subcommand("ruin", "Parisian ruin probability");
    ModelOpts ruin_model;
    NumericsOpts ruin_num;
    SimOpts ruin_sim;
    double ruin_x = 0.0, ruin_r = 1.0;
    std::string ruin_xgrid, ruin_rgrid, ruin_method = "auto";
    ruin_model.attach(ruin);
    ruin_num.attach(ruin);
    ruin_sim.attach(ruin);
    ruin->add_option("--x", ruin_x, "initial capital")->capture_default_str();
    ruin->add_option("--r", ruin_r, "delay")->capture_default_str();
    ruin->add_option("--x-grid", ruin_xgrid, "a:b:n grid of x");
    ruin->add_option("--r-grid", ruin_rgrid, "a:b:n grid of r");
    ruin->add_option("--method", ruin_method, "auto | theorem1_quadrature | closed_form | monte_carlo")
        ->capture_default_str();
    ruin->add_option("--out", out_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    // scale-fn
    auto* scale = app.add_subcommand("scale-fn", "scale function W and W'");
    ModelOpts scale_model;
    NumericsOpts scale_num;
    double scale_x = 1.0;
    std::string scale_grid, scale_method = "auto";
    scale_model.attach(scale);
    scale_num.attach(scale);
    scale->add_option("--x", scale_x, "argument")->capture_default_str();
    scale->add_option("--x-grid", scale_grid, "a:b:n grid of x");
    scale->add_option("--method", scale_method, "auto | closed_form | laplace_inversion")
        ->check(CLI::IsMember({"auto", "closed_form", "laplace_inversion"}));

    // law
    auto* law_cmd = app.add_subcommand("law", "positive part of the law of X_r");
    ModelOpts law_model;
    NumericsOpts law_num;
    double law_r = 1.0;
    std::string law_grid;
    law_model.attach(law_cmd);
    law_num.attach(law_cmd);
    law_cmd->add_option("--r", law_r, "time")->capture_default_str();
    law_cmd->add_option("--z-grid", law_grid, "a:b:n grid of z (default: 200 points up to the truncation point)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate");
    ModelOpts sim_model;
    SimOpts sim_opts;
    double sim_x = 0.0, sim_r = 1.0;
    bool sim_classical = false;
    sim_model.attach(sim);
    sim_opts.attach(sim);
    sim->add_option("--x", sim_x, "initial capital")->capture_default_str();
    sim->add_option("--r", sim_r, "delay")->capture_default_str();
    sim->add_flag("--classical", sim_classical, "estimate classical ruin instead");

    // verify
    auto* verify = app.add_subcommand("verify", "identity residual report");
    ModelOpts ver_model;
    NumericsOpts ver_num;
    std::vector<double> ver_thetas{0.5, 1.0, 2.0}, ver_rs{0.1, 0.5, 1.0, 2.0, 5.0}, ver_xs{0.0, 0.5, 1.0};
    double ver_tol = 1e-6;
    ver_model.attach(verify);
    ver_num.attach(verify);
    verify->add_option("--thetas", ver_thetas, "theta values")->delimiter(',')->capture_default_str();
    verify->add_option("--rs", ver_rs, "r values")->delimiter(',')->capture_default_str();
    verify->add_option("--xs", ver_xs, "x (and y) values")->delimiter(',')->capture_default_str();
    verify->add_option("--tol", ver_tol, "residual tolerance")->capture_default_str();

    // compare
    auto* cmp = app.add_subcommand("compare", "closed form vs quadrature vs Monte Carlo");
    ModelOpts cmp_model;
    NumericsOpts cmp_num;
    SimOpts cmp_sim;
    double cmp_x = 0.0, cmp_r = 1.0;
    bool cmp_mc = false;
    cmp_model.attach(cmp);
    cmp_num.attach(cmp);
    cmp_sim.attach(cmp);
    cmp->add_option("--x", cmp_x, "initial capital")->capture_default_str();
    cmp->add_option("--r", cmp_r, "delay")->capture_default_str();
    cmp->add_flag("--mc", cmp_mc, "include the Monte Carlo row");

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = apply_config(args);
        std::vector<const char*> cargs;
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    auto note = [&](const std::string& msg) {
        if (!quiet) std::cerr << msg << "\n";
    };
    auto c_given = [](CLI::App* a) { return a->count("--c") > 0; };

    try {
        if (*ruin) {
            const LevyModel model = ruin_model.build(c_given(ruin));
            const RuinMethod method = parse_method(ruin_method);
            const bool grid = !ruin_xgrid.empty() || !ruin_rgrid.empty();
            const auto xs = ruin_xgrid.empty() ? std::vector<double>{ruin_x} : parse_grid(ruin_xgrid, "--x-grid");
            const auto rs = ruin_rgrid.empty() ? std::vector<double>{ruin_r} : parse_grid(ruin_rgrid, "--r-grid");
            for (double r : rs)
                if (!(r > 0.0)) throw domain_error("delay r must be > 0");
            ruin_num.cfg.validate();
            const SimConfig simcfg = ruin_sim.build();
            std::vector<std::pair<double, double>> points;
            for (double x : xs)
                for (double r : rs) points.emplace_back(x, r);
            auto results = parallel_map<RuinResult>(points.size(), [&](std::size_t i) {
                return parisian_ruin(RuinQuery{model, points[i].first, points[i].second, method}, ruin_num.cfg,
                                     simcfg);
            });
            const std::string fmt = out_format.empty() ? (grid ? "csv" : "json") : out_format;
            if (fmt == "csv") {
                std::cout << "x,r,probability,method,error_estimate\n";
                for (std::size_t i = 0; i < points.size(); ++i)
                    std::cout << num(points[i].first) << "," << num(points[i].second) << ","
                              << num(results[i].probability) << "," << results[i].method << ","
                              << num(results[i].error_estimate) << "\n";
            } else if (!grid) {
                std::cout << ruin_json(points[0].first, points[0].second, results[0]).dump(2) << "\n";
            } else {
                json arr = json::array();
                for (std::size_t i = 0; i < points.size(); ++i)
                    arr.push_back(ruin_json(points[i].first, points[i].second, results[i]));
                std::cout << arr.dump(2) << "\n";
            }
            return 0;
        }

        if (*scale) {
            const LevyModel model = scale_model.build(c_given(scale));
            const ScaleFunction sf =
                scale_method == "auto" ? ScaleFunction::for_model(model, scale_num.cfg)
                : ScaleFunction(model,
                                scale_method == "closed_form" ? ScaleMethod::closed_form : ScaleMethod::laplace_inversion,
                                scale_num.cfg);
            const bool grid = !scale_grid.empty();
            const auto xs = grid ? parse_grid(scale_grid, "--x-grid") : std::vector<double>{scale_x};
            auto wp = [&](double x) { return x > 0.0 ? sf.w_prime(x) : std::numeric_limits<double>::quiet_NaN(); };
            const std::string fmt = out_format.empty() ? (grid ? "csv" : "json") : out_format;
            if (fmt == "csv") {
                std::cout << "x,W,W_prime\n";
                for (double x : xs) std::cout << num(x) << "," << num(sf.w(x)) << "," << num(wp(x)) << "\n";
            } else {
                json arr = json::array();
                for (double x : xs) {
                    json j{{"x", x}, {"W", sf.w(x)}, {"method", to_string(sf.method())}};
                    if (x > 0.0) j["W_prime"] = sf.w_prime(x);
                    arr.push_back(j);
                }
                std::cout << (grid ? arr : arr[0]).dump(2) << "\n";
            }
            return 0;
        }

        if (*law_cmd) {
            const LevyModel model = law_model.build(c_given(law_cmd));
            const PositiveLaw law = positive_law(model, law_r, law_num.cfg);
            json header;
            header["r"] = law_r;
            header["model"] = to_string(model.kind());
            if (law.atom()) header["atom"] = {{"location", law.atom()->location}, {"mass", law.atom()->mass}};
            else header["atom"] = nullptr;
            header["partial_mean"] = partial_mean(law, law_num.cfg);
            std::vector<double> zs;
            if (law_grid.empty()) {
                const double top = law.truncation_point(1e-12);
                for (int i = 1; i <= 200; ++i) zs.push_back(top * i / 200.0);
            } else {
                zs = parse_grid(law_grid, "--z-grid");
            }
            std::cout << header.dump() << "\n" << "z,density\n";
            for (double z : zs) std::cout << num(z) << "," << num(law.density(z)) << "\n";
            return 0;
        }

        if (*sim) {
            const LevyModel model = sim_model.build(c_given(sim));
            const SimConfig cfg = sim_opts.build();
            const McEstimate est =
                sim_classical ? simulate_classical(model, sim_x, cfg) : simulate_parisian(model, sim_x, sim_r, cfg);
            json j{{"p_hat", est.p_hat},
                   {"half_width", est.half_width},
                   {"n_paths", est.n_paths},
                   {"bias_note", est.bias_note}};
            if (out_format == "csv") {
                std::cout << "p_hat,half_width,n_paths,bias_note\n"
                          << num(est.p_hat) << "," << num(est.half_width) << "," << est.n_paths << ",\""
                          << est.bias_note << "\"\n";
            } else {
                std::cout << j.dump(2) << "\n";
            }
            return 0;
        }

        if (*verify) {
            const LevyModel model = ver_model.build(c_given(verify));
            const auto report = verify_lemma_identities(model, ver_thetas, ver_rs, ver_xs, ver_num.cfg, ver_tol);
            if (out_format == "json") {
                json arr = json::array();
                for (const auto& c : report.checks)
                    arr.push_back({{"identity", c.identity},
                                   {"point", c.point},
                                   {"residual", c.residual},
                                   {"tolerance", c.tolerance},
                                   {"passed", c.passed}});
                std::cout << json{{"all_passed", report.all_passed()}, {"checks", arr}}.dump(2) << "\n";
            } else {
                std::cout << "identity,point,residual,tolerance,passed\n";
                for (const auto& c : report.checks)
                    std::cout << c.identity << ",\"" << c.point << "\"," << num(c.residual) << ","
                              << num(c.tolerance) << "," << (c.passed ? "true" : "false") << "\n";
            }
            if (!report.all_passed()) {
                note("verify: some identity residuals exceed the tolerance");
                return 1;
            }
            return 0;
        }

        if (*cmp) {
            const LevyModel model = cmp_model.build(c_given(cmp));
            if (!(cmp_r > 0.0)) throw domain_error("delay r must be > 0");
            struct Row {
                std::string method;
                std::optional<RuinResult> result;
                std::string note;
            };
            std::vector<Row> rows;
            for (RuinMethod m : {RuinMethod::closed_form, RuinMethod::theorem1_quadrature, RuinMethod::monte_carlo}) {
                Row row{to_string(m), std::nullopt, ""};
                if (m == RuinMethod::monte_carlo && !cmp_mc) {
                    row.note = "skipped (pass --mc)";
                } else {
                    try {
                        row.result = parisian_ruin(RuinQuery{model, cmp_x, cmp_r, m}, cmp_num.cfg, cmp_sim.build());
                    } catch (const model_error& e) {
                        row.note = e.what();
                    }
                }
                rows.push_back(row);
            }
            if (out_format == "json") {
                json arr = json::array();
                for (const auto& row : rows) {
                    json j{{"method", row.method}};
                    if (row.result) {
                        j["probability"] = row.result->probability;
                        j["error_estimate"] = row.result->error_estimate;
                    } else {
                        j["probability"] = nullptr;
                        j["note"] = row.note;
                    }
                    arr.push_back(j);
                }
                std::cout << arr.dump(2) << "\n";
            } else {
                std::cout << "method,probability,error_estimate,note\n";
                for (const auto& row : rows) {
                    std::cout << row.method << ",";
                    if (row.result) std::cout << num(row.result->probability) << "," << num(row.result->error_estimate) << ",";
                    else std::cout << ",,";
                    std::cout << "\"" << row.note << "\"\n";
                }
            }
            return 0;
        }
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numerics_error& e) {
        std::cerr << "numerics error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        // domain_error, model_error, config_error
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerics error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
