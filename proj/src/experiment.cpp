#include "gp_pricer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <thread>

#include <json.hpp>

#include "gp_pricer/csv.hpp"
#include "gp_pricer/errors.hpp"
#include "gp_pricer/finite.hpp"
#include "gp_pricer/infinite.hpp"
#include "gp_pricer/log.hpp"
#include "gp_pricer/oracle.hpp"
#include "gp_pricer/rng.hpp"
#include "gp_pricer/timing.hpp"

#ifndef GP_PRICER_VERSION
#define GP_PRICER_VERSION "0.0.0"
#endif

namespace gp_pricer {

using nlohmann::ordered_json;

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers) : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                fn(i);
            }
        });
    }
}

namespace {

const char* link_name(Link link) {
    switch (link) {
        case Link::identity:
            return "identity";
        case Link::exp:
            return "exp";
        case Link::logistic:
            return "logistic";
    }
    return "?";
}

ordered_json config_echo(const ExperimentConfig& cfg) {
    ordered_json env;
    env["name"] = cfg.environment.name;
    ordered_json params = ordered_json::object();
    if (cfg.environment.name == "polynomial") {
        params["coefficients"] = cfg.environment.coefficients;
        params["coefficient_order"] = cfg.environment.descending ? "descending" : "ascending";
        params["noise_scale"] = cfg.environment.noise_scale;
    } else if (cfg.environment.name.starts_with("moment_")) {
        if (cfg.environment.a0) params["a0"] = *cfg.environment.a0;
        if (cfg.environment.a1) params["a1"] = *cfg.environment.a1;
        if (cfg.environment.sigma) params["sigma"] = *cfg.environment.sigma;
        if (cfg.environment.link) params["link"] = link_name(*cfg.environment.link);
    } else if (cfg.environment.name == "poisson_wtp") {
        params["arrival_rate"] = cfg.environment.arrival_rate;
        params["sigma"] = cfg.environment.wtp_sigma;
    }
    env["params"] = params;

    const AlgorithmSpec& a = cfg.algorithm;
    ordered_json alg;
    alg["name"] = a.name;
    alg["params"] = {
        {"refit_every", a.refit_every},
        {"restarts", a.restarts},
        {"bucket_width", a.bucket_width},
        {"bucket_representative",
         a.bucket_representative == BucketRepresentative::midpoint ? "midpoint" : "centroid"},
        {"kappa_mode", a.kappa.mode == KappaConfig::Mode::constant ? "constant" : "schedule"},
        {"kappa", a.kappa.constant_value},
        {"kappa_scale", a.kappa.schedule_scale},
        {"finite_kappa", a.finite_kappa},
        {"decay", a.decay},
        {"hyper_refit_every", a.hyper_refit_every},
        {"refresh_within_season", a.refresh_within_season},
    };
    if (a.noise_floor) alg["params"]["noise_floor"] = *a.noise_floor;
    if (a.initial_price) alg["params"]["initial_price"] = *a.initial_price;

    ordered_json out;
    out["mode"] = to_string(cfg.mode);
    out["environment"] = env;
    out["algorithm"] = alg;
    out["horizon"] = cfg.horizon;
    out["seasons"] = cfg.seasons;
    out["inventory"] = cfg.inventory;
    out["price_low"] = cfg.price_low;
    out["price_high"] = cfg.price_high;
    out["grid_size"] = cfg.grid_size;
    out["replications"] = cfg.replications;
    out["master_seed"] = cfg.master_seed;
    out["output"] = cfg.output;
    out["workers"] = cfg.workers;
    out["mc_replications"] = cfg.mc_replications;
    if (cfg.mode == Mode::bench) {
        ordered_json settings = ordered_json::array();
        for (const auto& [c, t] : cfg.bench.settings) {
            settings.push_back({c, t});
        }
        out["bench"] = {{"settings", settings},
                        {"seasons", cfg.bench.seasons},
                        {"warmup_seasons", cfg.bench.warmup_seasons}};
    }
    return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return out;
}

struct Manifest {
    ordered_json doc;
    PhaseTimes phases;
    Stopwatch wall;

    explicit Manifest(const ExperimentConfig& cfg) {
        doc["software"] = {{"name", "gp_pricer"}, {"version", GP_PRICER_VERSION}};
        doc["config"] = config_echo(cfg);
        ordered_json seeds = ordered_json::array();
        for (int i = 0; i < cfg.replications; ++i) {
            seeds.push_back(split_seed(cfg.master_seed, static_cast<std::uint64_t>(i)));
        }
        doc["seeds"] = seeds;
        doc["seed_derivation"] = "seed_i = splitmix64(splitmix64(master_seed) ^ splitmix64(i + 0x632be59bd9b4e019))";
        doc["runs"] = ordered_json::array();
    }

    void run(std::size_t id, std::uint64_t seed, const std::optional<std::string>& error, const PhaseTimes& t) {
        ordered_json r{{"run_id", id}, {"seed", seed}, {"status", error ? "failed" : "ok"}};
        if (error) {
            r["error"] = *error;
        }
        r["seconds"] = {{"fit", t.fit}, {"plan", t.plan}, {"act", t.act}};
        doc["runs"].push_back(r);
        phases += t;
    }

    void write(const std::filesystem::path& dir) {
        doc["phase_seconds"] = {
            {"fit", phases.fit}, {"plan", phases.plan}, {"act", phases.act}, {"wall_clock", wall.lap()}};
        auto out = open_output(dir / "manifest.json");
        out << doc.dump(2) << '\n';
    }
};

void summary_columns(CsvWriter& csv, const Aggregate& a) { csv.field(a.mean).field(a.variance); }

// ---------------------------------------------------------------------------

InfiniteRunConfig infinite_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    InfiniteRunConfig run;
    run.horizon = cfg.horizon;
    run.price_low = cfg.price_low;
    run.price_high = cfg.price_high;
    run.grid_size = cfg.grid_size;
    run.kappa = cfg.algorithm.kappa;
    run.refit_every = cfg.algorithm.refit_every;
    run.restarts = cfg.algorithm.restarts;
    run.initial_price = cfg.algorithm.initial_price;
    run.noise_floor = cfg.algorithm.noise_floor;
    run.seed = seed;
    return run;
}

int run_infinite(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& manifest) {
    const auto env = make_environment(cfg.environment, cfg.price_low, cfg.price_high);
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<std::optional<InfiniteTrace>> traces(n);
    std::vector<std::optional<std::string>> errors(n);

    parallel_for(n, cfg.workers, [&](std::size_t i) {
        const InfiniteRunConfig run = infinite_config(cfg, split_seed(cfg.master_seed, i));
        try {
            traces[i] = cfg.algorithm.name == "lightweight_bo_inf"
                            ? run_lightweight_bo_inf(*env, run, cfg.algorithm.bucket_width,
                                                     cfg.algorithm.bucket_representative)
                            : run_bo_inf(*env, run);
        } catch (const RunAborted<InfiniteTrace>& e) {
            traces[i] = e.partial();
            errors[i] = e.what();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    {
        auto out = open_output(dir / "trace.csv");
        CsvWriter csv(out, {"run_id", "t", "price", "demand", "revenue", "inst_regret", "cum_regret", "best_till_now"});
        for (std::size_t i = 0; i < n; ++i) {
            if (!traces[i]) {
                continue;
            }
            for (const InfiniteStep& s : traces[i]->steps) {
                csv.field(i).field(s.t).field(s.price).field(s.demand).field(s.revenue);
                csv.field(s.inst_regret).field(s.cum_regret).field(s.best_till_now).end_row();
            }
        }
    }

    // Summary over replications that finished.
    std::vector<std::vector<double>> price, revenue, inst, cum, btn, rel;
    std::optional<RevenueOptimum> reference;
    for (std::size_t i = 0; i < n; ++i) {
        manifest.run(i, split_seed(cfg.master_seed, i), errors[i], traces[i] ? traces[i]->times : PhaseTimes{});
        if (!traces[i] || errors[i]) {
            continue;
        }
        const InfiniteTrace& tr = *traces[i];
        reference = RevenueOptimum{tr.optimal_price, tr.optimal_revenue};
        auto column = [&](auto member) {
            std::vector<double> v;
            for (const InfiniteStep& s : tr.steps) {
                v.push_back(s.*member);
            }
            return v;
        };
        price.push_back(column(&InfiniteStep::price));
        revenue.push_back(column(&InfiniteStep::revenue));
        inst.push_back(column(&InfiniteStep::inst_regret));
        cum.push_back(column(&InfiniteStep::cum_regret));
        btn.push_back(column(&InfiniteStep::best_till_now));
        if (tr.optimal_revenue > 0.0) {
            rel.push_back(relative_regret(tr, *env));
        }
    }
    if (!price.empty()) {
        const auto a_price = aggregate_series(price);
        const auto a_rev = aggregate_series(revenue);
        const auto a_inst = aggregate_series(inst);
        const auto a_cum = aggregate_series(cum);
        const auto a_btn = aggregate_series(btn);
        const auto a_rel = aggregate_series(rel);
        auto out = open_output(dir / "summary.csv");
        CsvWriter csv(out, {"t", "price_mean", "price_var", "revenue_mean", "revenue_var", "inst_regret_mean",
                            "inst_regret_var", "cum_regret_mean", "cum_regret_var", "best_till_now_mean",
                            "best_till_now_var", "relative_regret_mean", "relative_regret_var"});
        for (std::size_t t = 0; t < a_price.size(); ++t) {
            csv.field(t + 1);
            summary_columns(csv, a_price[t]);
            summary_columns(csv, a_rev[t]);
            summary_columns(csv, a_inst[t]);
            summary_columns(csv, a_cum[t]);
            summary_columns(csv, a_btn[t]);
            if (a_rel.empty()) {
                csv.empty().empty();
            } else {
                summary_columns(csv, a_rel[t]);
            }
            csv.end_row();
        }
    }
    if (reference) {
        manifest.doc["regret_reference"] = {
            {"price", reference->price},
            {"expected_revenue", reference->revenue},
            {"note", "maximum of expected revenue over the price grid and the initial price, not the continuous "
                     "optimum; the gap is bounded by the grid spacing"}};
    }
    return std::ranges::any_of(errors, [](const auto& e) { return e.has_value(); }) ? 1 : 0;
}

// ---------------------------------------------------------------------------

FiniteRunConfig finite_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    FiniteRunConfig run;
    run.seasons = cfg.seasons;
    run.horizon = cfg.horizon;
    run.inventory = cfg.inventory;
    run.price_low = cfg.price_low;
    run.price_high = cfg.price_high;
    run.grid_size = cfg.grid_size;
    run.kappa = cfg.algorithm.finite_kappa;
    run.decay = cfg.algorithm.decay;
    run.hyper_refit_every = cfg.algorithm.hyper_refit_every;
    run.restarts = cfg.algorithm.restarts;
    run.refresh_within_season = cfg.algorithm.refresh_within_season;
    run.initial_price = cfg.algorithm.initial_price;
    run.noise_floor = cfg.algorithm.noise_floor;
    run.seed = seed;
    return run;
}

FiniteRunResult run_finite_algorithm(const std::string& name, const DemandEnvironment& env, const FiniteRunConfig& run) {
    return name == "bo_fin_heuristic" ? run_bo_fin_heuristic(env, run) : run_gp_fin_model_based(env, run);
}

int run_finite(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& manifest) {
    const auto env = make_environment(cfg.environment, cfg.price_low, cfg.price_high);
    const PriceGrid grid(cfg.price_low, cfg.price_high, cfg.grid_size);
    const OracleSolution oracle = solve_oracle(*env, cfg.inventory, cfg.horizon, grid.points());
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<std::optional<FiniteRunResult>> results(n);
    std::vector<std::optional<std::string>> errors(n);

    parallel_for(n, cfg.workers, [&](std::size_t i) {
        try {
            results[i] = run_finite_algorithm(cfg.algorithm.name, *env, finite_config(cfg, split_seed(cfg.master_seed, i)));
        } catch (const RunAborted<FiniteRunResult>& e) {
            results[i] = e.partial();
            errors[i] = e.what();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    {
        auto out = open_output(dir / "trace.csv");
        CsvWriter csv(out, {"run_id", "season", "t", "inventory", "price", "latent_demand", "sale", "revenue"});
        for (std::size_t i = 0; i < n; ++i) {
            if (!results[i]) {
                continue;
            }
            for (const SeasonTrace& season : results[i]->seasons) {
                for (const SeasonStep& s : season.steps) {
                    csv.field(i).field(s.season).field(s.t).field(s.inventory).field(s.price);
                    csv.field(s.latent_demand).field(s.sale).field(s.revenue).end_row();
                }
            }
        }
    }

    std::vector<std::vector<double>> revenue, expected, regret, error, error_excl;
    {
        auto out = open_output(dir / "seasons.csv");
        CsvWriter csv(out, {"run_id", "season", "revenue", "expected_revenue", "mc_expected_revenue", "cum_regret",
                            "policy_error", "policy_error_excl_s1", "depletion_t"});
        for (std::size_t i = 0; i < n; ++i) {
            PhaseTimes times;
            if (results[i]) {
                for (const SeasonTrace& s : results[i]->seasons) {
                    times += s.times;
                }
            }
            manifest.run(i, split_seed(cfg.master_seed, i), errors[i], times);
            if (!results[i]) {
                continue;
            }
            const FiniteRunResult& r = *results[i];
            const auto cum = cumulative_regret(r.seasons, oracle);
            std::vector<double> rev, exp, err, err1;
            for (std::size_t k = 0; k < r.seasons.size(); ++k) {
                const SeasonTrace& s = r.seasons[k];
                const PolicyMatrix& psi = r.policies.at(k);
                const double e = policy_expected_revenue(*env, psi);
                const double d = policy_error_norm(psi, oracle.policy);
                const double d1 = policy_error_norm(psi, oracle.policy, {1});
                csv.field(i).field(s.season).field(s.revenue).field(e);
                if (cfg.mc_replications > 0) {
                    const std::uint64_t mc_seed = split_seed(split_seed(cfg.master_seed, i), 1000 + k);
                    csv.field(policy_revenue_monte_carlo(*env, psi, cfg.mc_replications, mc_seed).mean);
                } else {
                    csv.empty();
                }
                csv.field(cum[k]).field(d).field(d1);
                if (s.depletion_time) {
                    csv.field(*s.depletion_time);
                } else {
                    csv.empty();
                }
                csv.end_row();
                rev.push_back(s.revenue);
                exp.push_back(e);
                err.push_back(d);
                err1.push_back(d1);
            }
            if (!errors[i]) {
                revenue.push_back(std::move(rev));
                expected.push_back(std::move(exp));
                regret.push_back(cum);
                error.push_back(std::move(err));
                error_excl.push_back(std::move(err1));
            }
        }
    }

    if (!revenue.empty()) {
        const auto a_rev = aggregate_series(revenue);
        const auto a_exp = aggregate_series(expected);
        const auto a_reg = aggregate_series(regret);
        const auto a_err = aggregate_series(error);
        const auto a_err1 = aggregate_series(error_excl);
        auto out = open_output(dir / "summary.csv");
        CsvWriter csv(out, {"season", "revenue_mean", "revenue_var", "expected_revenue_mean", "expected_revenue_var",
                            "cum_regret_mean", "cum_regret_var", "policy_error_mean", "policy_error_var",
                            "policy_error_excl_s1_mean", "policy_error_excl_s1_var"});
        for (std::size_t k = 0; k < a_rev.size(); ++k) {
            csv.field(k + 1);
            summary_columns(csv, a_rev[k]);
            summary_columns(csv, a_exp[k]);
            summary_columns(csv, a_reg[k]);
            summary_columns(csv, a_err[k]);
            summary_columns(csv, a_err1[k]);
            csv.end_row();
        }
    }
    manifest.doc["oracle"] = {{"optimal_season_value", oracle.optimal_value}};
    return std::ranges::any_of(errors, [](const auto& e) { return e.has_value(); }) ? 1 : 0;
}

// ---------------------------------------------------------------------------

int run_oracle_mode(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& manifest) {
    const auto env = make_environment(cfg.environment, cfg.price_low, cfg.price_high);
    const PriceGrid grid(cfg.price_low, cfg.price_high, cfg.grid_size);
    Stopwatch clock;
    const OracleSolution oracle = solve_oracle(*env, cfg.inventory, cfg.horizon, grid.points());
    PhaseTimes times;
    times.plan = clock.lap();
    auto out = open_output(dir / "trace.csv");
    CsvWriter csv(out, {"s", "t", "value", "policy_price"});
    for (int s = 0; s <= cfg.inventory; ++s) {
        for (int t = 1; t <= cfg.horizon; ++t) {
            csv.field(s).field(t).field(oracle.value(s, t)).field(oracle.policy(s, t)).end_row();
        }
    }
    manifest.run(0, cfg.master_seed, std::nullopt, times);
    manifest.doc["oracle"] = {{"optimal_season_value", oracle.optimal_value}};
    return 0;
}

int run_bench_mode(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& manifest) {
    const auto rows = run_bench(cfg);
    auto out = open_output(dir / "trace.csv");
    CsvWriter csv(out, {"C", "T", "heuristic_s", "model_based_s", "pct_increase"});
    for (const BenchRow& r : rows) {
        csv.field(r.inventory).field(r.horizon).field(r.heuristic_s).field(r.model_based_s).field(r.pct_increase);
        csv.end_row();
    }
    manifest.doc["note"] = "bench timings are wall-clock and vary between runs";
    return 0;
}

}  // namespace

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg) {
    const auto env = make_environment(cfg.environment, cfg.price_low, cfg.price_high);
    std::vector<BenchRow> rows;
    for (const auto& [c, t] : cfg.bench.settings) {
        double heuristic = 0.0;
        double model = 0.0;
        for (int rep = 0; rep < cfg.replications; ++rep) {
            FiniteRunConfig run = finite_config(cfg, split_seed(cfg.master_seed, static_cast<std::uint64_t>(rep)));
            run.inventory = c;
            run.horizon = t;
            run.seasons = cfg.bench.warmup_seasons + cfg.bench.seasons;
            run.hyper_refit_every = std::numeric_limits<int>::max();
            run.record_policies = false;
            auto timed_mean = [&](const FiniteRunResult& r) {
                double total = 0.0;
                for (std::size_t k = static_cast<std::size_t>(cfg.bench.warmup_seasons); k < r.seasons.size(); ++k) {
                    total += r.seasons[k].times.total();
                }
                return total / cfg.bench.seasons;
            };
            heuristic += timed_mean(run_bo_fin_heuristic(*env, run));
            model += timed_mean(run_gp_fin_model_based(*env, run));
        }
        BenchRow row;
        row.inventory = c;
        row.horizon = t;
        row.heuristic_s = heuristic / cfg.replications;
        row.model_based_s = model / cfg.replications;
        row.pct_increase = (row.model_based_s - row.heuristic_s) / row.heuristic_s * 100.0;
        rows.push_back(row);
        log::info("bench C=" + std::to_string(c) + " T=" + std::to_string(t) + " done");
    }
    return rows;
}

int run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    Manifest manifest(cfg);
    int status = 1;
    try {
        switch (cfg.mode) {
            case Mode::infinite:
                status = run_infinite(cfg, dir, manifest);
                break;
            case Mode::finite:
                status = run_finite(cfg, dir, manifest);
                break;
            case Mode::oracle:
                status = run_oracle_mode(cfg, dir, manifest);
                break;
            case Mode::bench:
                status = run_bench_mode(cfg, dir, manifest);
                break;
        }
    } catch (const std::exception& e) {
        manifest.doc["error"] = e.what();
        manifest.write(dir);
        throw;
    }
    manifest.write(dir);
    if (status != 0) {
        log::error("one or more replications failed; see manifest.json");
    }
    return status;
}

}  // namespace gp_pricer
