#include "gp_pricer/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <yaml-cpp/yaml.h>

#include "gp_pricer/errors.hpp"

namespace gp_pricer {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::infinite:
            return "infinite";
        case Mode::finite:
            return "finite";
        case Mode::oracle:
            return "oracle";
        case Mode::bench:
            return "bench";
    }
    return "?";
}

std::optional<Mode> parse_mode(const std::string& s) {
    for (Mode m : {Mode::infinite, Mode::finite, Mode::oracle, Mode::bench}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    return std::nullopt;
}

namespace {

const std::set<std::string> kEnvironments = {
    "polynomial",      "moment_normal",          "moment_poisson",        "moment_bernoulli", "bernoulli_logit",
    "bernoulli_step_misspec", "bernoulli_log_complex", "poisson_wtp", "scarcity"};

const std::set<std::string> kContinuousEnvironments = {"polynomial", "moment_normal"};

bool is_infinite_algorithm(const std::string& name) { return name == "bo_inf" || name == "lightweight_bo_inf"; }
bool is_finite_algorithm(const std::string& name) {
    return name == "gp_fin_model_based" || name == "bo_fin_heuristic";
}

std::string default_algorithm(Mode mode) {
    switch (mode) {
        case Mode::infinite:
            return "bo_inf";
        case Mode::finite:
            return "gp_fin_model_based";
        default:
            return "";
    }
}

std::string default_environment(Mode mode) {
    switch (mode) {
        case Mode::infinite:
            return "polynomial";
        case Mode::bench:
            return "poisson_wtp";
        default:
            return "bernoulli_logit";
    }
}

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

template <typename T>
T scalar(const YAML::Node& n, const std::string& key, const char* expected) {
    if (!n.IsScalar()) {
        throw ConfigError(key + ": expected " + expected, line_of(n));
    }
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(key + ": expected " + expected + ", got '" + n.Scalar() + "'", line_of(n));
    }
}

double real(const YAML::Node& n, const std::string& key) {
    const double v = scalar<double>(n, key, "a number");
    if (!std::isfinite(v)) {
        throw ConfigError(key + ": must be finite", line_of(n));
    }
    return v;
}

double positive(const YAML::Node& n, const std::string& key) {
    const double v = real(n, key);
    if (!(v > 0.0)) {
        throw ConfigError(key + ": must be > 0", line_of(n));
    }
    return v;
}

double nonnegative(const YAML::Node& n, const std::string& key) {
    const double v = real(n, key);
    if (!(v >= 0.0)) {
        throw ConfigError(key + ": must be >= 0", line_of(n));
    }
    return v;
}

int count(const YAML::Node& n, const std::string& key, int minimum = 1) {
    const long long v = scalar<long long>(n, key, "an integer");
    if (v < minimum || v > 1'000'000'000LL) {
        throw ConfigError(key + ": must be an integer >= " + std::to_string(minimum), line_of(n));
    }
    return static_cast<int>(v);
}

std::string word(const YAML::Node& n, const std::string& key) { return scalar<std::string>(n, key, "a string"); }

// Top-level mapping keyed by name, rejecting unknown and duplicate keys.
std::map<std::string, YAML::Node> mapping(const YAML::Node& n, const std::string& where,
                                          const std::set<std::string>& allowed) {
    if (!n.IsMap()) {
        throw ConfigError(where + ": expected a mapping", line_of(n));
    }
    std::map<std::string, YAML::Node> out;
    for (auto it = n.begin(); it != n.end(); ++it) {
        const std::string key = it->first.as<std::string>();
        const std::string path = where.empty() ? key : where + "." + key;
        if (!allowed.contains(key)) {
            throw ConfigError("unknown key '" + path + "'", line_of(it->first));
        }
        if (!out.emplace(key, it->second).second) {
            throw ConfigError("duplicate key '" + path + "'", line_of(it->first));
        }
    }
    return out;
}

Link parse_link(const YAML::Node& n, const std::string& key) {
    const std::string s = word(n, key);
    if (s == "identity") return Link::identity;
    if (s == "exp") return Link::exp;
    if (s == "logistic") return Link::logistic;
    throw ConfigError(key + ": unknown link '" + s + "' (identity, exp, logistic)", line_of(n));
}

std::set<std::string> environment_params(const std::string& name) {
    if (name == "polynomial") return {"coefficients", "coefficient_order", "noise_scale"};
    if (name.starts_with("moment_")) return {"a0", "a1", "sigma", "link"};
    if (name == "poisson_wtp") return {"arrival_rate", "sigma"};
    return {};
}

void parse_environment(const YAML::Node& node, EnvironmentSpec& env) {
    auto keys = mapping(node, "environment", {"name", "params"});
    if (!keys.contains("name")) {
        throw ConfigError("environment.name is required", line_of(node));
    }
    env.name = word(keys["name"], "environment.name");
    if (!kEnvironments.contains(env.name)) {
        throw ConfigError("unknown environment '" + env.name + "'", line_of(keys["name"]));
    }
    if (!keys.contains("params")) {
        return;
    }
    auto params = mapping(keys["params"], "environment.params", environment_params(env.name));
    for (auto& [key, value] : params) {
        const std::string path = "environment.params." + key;
        if (key == "coefficients") {
            if (!value.IsSequence() || value.size() == 0) {
                throw ConfigError(path + ": expected a nonempty list of numbers", line_of(value));
            }
            env.coefficients.clear();
            for (const auto& c : value) {
                env.coefficients.push_back(real(c, path));
            }
        } else if (key == "coefficient_order") {
            const std::string order = word(value, path);
            if (order != "ascending" && order != "descending") {
                throw ConfigError(path + ": expected ascending or descending", line_of(value));
            }
            env.descending = order == "descending";
        } else if (key == "noise_scale") {
            env.noise_scale = nonnegative(value, path);
            if (env.noise_scale > 1.0) {
                throw ConfigError(path + ": must lie in [0, 1]", line_of(value));
            }
        } else if (key == "a0") {
            env.a0 = real(value, path);
        } else if (key == "a1") {
            env.a1 = real(value, path);
        } else if (key == "sigma") {
            if (env.name == "poisson_wtp") {
                env.wtp_sigma = positive(value, path);
            } else {
                env.sigma = nonnegative(value, path);
            }
        } else if (key == "link") {
            env.link = parse_link(value, path);
        } else if (key == "arrival_rate") {
            env.arrival_rate = positive(value, path);
        }
    }
}

void parse_algorithm(const YAML::Node& node, AlgorithmSpec& alg) {
    auto keys = mapping(node, "algorithm", {"name", "params"});
    if (keys.contains("name")) {
        alg.name = word(keys["name"], "algorithm.name");
        if (!is_infinite_algorithm(alg.name) && !is_finite_algorithm(alg.name)) {
            throw ConfigError("unknown algorithm '" + alg.name + "'", line_of(keys["name"]));
        }
    }
    if (!keys.contains("params")) {
        return;
    }
    auto params = mapping(keys["params"], "algorithm.params",
                          {"refit_every", "restarts", "bucket_width", "bucket_representative", "kappa", "kappa_mode", "kappa_scale", "decay",
                           "hyper_refit_every", "refresh_within_season", "noise_floor", "initial_price"});
    for (auto& [key, value] : params) {
        const std::string path = "algorithm.params." + key;
        if (key == "refit_every") {
            alg.refit_every = count(value, path);
        } else if (key == "restarts") {
            alg.restarts = count(value, path);
        } else if (key == "bucket_width") {
            alg.bucket_width = positive(value, path);
        } else if (key == "bucket_representative") {
            const std::string r = word(value, path);
            if (r == "midpoint") {
                alg.bucket_representative = BucketRepresentative::midpoint;
            } else if (r == "centroid") {
                alg.bucket_representative = BucketRepresentative::centroid;
            } else {
                throw ConfigError(path + ": expected midpoint or centroid", line_of(value));
            }
        } else if (key == "kappa") {
            alg.kappa.constant_value = nonnegative(value, path);
            alg.finite_kappa = alg.kappa.constant_value;
        } else if (key == "kappa_mode") {
            const std::string m = word(value, path);
            if (m == "constant") {
                alg.kappa.mode = KappaConfig::Mode::constant;
            } else if (m == "schedule") {
                alg.kappa.mode = KappaConfig::Mode::sqrt_log_schedule;
            } else {
                throw ConfigError(path + ": expected constant or schedule", line_of(value));
            }
        } else if (key == "kappa_scale") {
            alg.kappa.schedule_scale = positive(value, path);
        } else if (key == "decay") {
            alg.decay = nonnegative(value, path);
        } else if (key == "hyper_refit_every") {
            alg.hyper_refit_every = count(value, path);
        } else if (key == "refresh_within_season") {
            alg.refresh_within_season = scalar<bool>(value, path, "true or false");
        } else if (key == "noise_floor") {
            alg.noise_floor = positive(value, path);
        } else if (key == "initial_price") {
            alg.initial_price = real(value, path);
        }
    }
}

void parse_bench(const YAML::Node& node, BenchSpec& bench) {
    auto keys = mapping(node, "bench", {"settings", "seasons", "warmup_seasons"});
    if (keys.contains("settings")) {
        const YAML::Node& list = keys["settings"];
        if (!list.IsSequence() || list.size() == 0) {
            throw ConfigError("bench.settings: expected a nonempty list of [C, T] pairs", line_of(list));
        }
        bench.settings.clear();
        for (const auto& pair : list) {
            if (!pair.IsSequence() || pair.size() != 2) {
                throw ConfigError("bench.settings: each entry must be [C, T]", line_of(pair));
            }
            bench.settings.emplace_back(count(pair[0], "bench.settings C"), count(pair[1], "bench.settings T"));
        }
    }
    if (keys.contains("seasons")) {
        bench.seasons = count(keys["seasons"], "bench.seasons");
    }
    if (keys.contains("warmup_seasons")) {
        bench.warmup_seasons = count(keys["warmup_seasons"], "bench.warmup_seasons");
    }
}

void check(bool ok, const std::string& what, int line = 0) {
    if (!ok) {
        throw ConfigError(what, line);
    }
}

}  // namespace

std::pair<double, double> default_domain(const std::string& environment) {
    if (environment == "polynomial") return {1.0, 10.0};
    if (environment == "moment_normal") return {1.0, 15.0};
    if (environment == "bernoulli_log_complex") return {1.0, 19.9};
    if (environment == "moment_poisson" || environment == "poisson_wtp" || environment == "scarcity") {
        return {1.0, 100.0};
    }
    return {1.0, 20.0};
}

ExperimentConfig default_config(Mode mode) {
    ExperimentConfig cfg;
    cfg.mode = mode;
    cfg.environment.name = default_environment(mode);
    cfg.algorithm.name = default_algorithm(mode);
    std::tie(cfg.price_low, cfg.price_high) = default_domain(cfg.environment.name);
    if (mode != Mode::infinite) {
        cfg.horizon = 20;
        cfg.grid_size = 100;
    }
    return cfg;
}

void ExperimentConfig::validate() const {
    check(kEnvironments.contains(environment.name), "unknown environment '" + environment.name + "'");
    check(horizon >= 1 && seasons >= 1 && inventory >= 1, "horizon, seasons and inventory must be >= 1");
    check(replications >= 1, "replications must be >= 1");
    check(workers >= 0 && mc_replications >= 0, "workers and mc_replications must be >= 0");
    check(price_low > 0.0 && price_high > price_low, "price domain needs 0 < price_low < price_high");
    check(grid_size >= 2, "grid_size must be >= 2");
    check(!environment.coefficients.empty(), "polynomial coefficients must not be empty");
    switch (mode) {
        case Mode::infinite:
            check(is_infinite_algorithm(algorithm.name), "infinite mode needs algorithm bo_inf or lightweight_bo_inf");
            break;
        case Mode::finite:
            check(is_finite_algorithm(algorithm.name),
                  "finite mode needs algorithm gp_fin_model_based or bo_fin_heuristic");
            [[fallthrough]];
        case Mode::oracle:
        case Mode::bench:
            check(!kContinuousEnvironments.contains(environment.name),
                  "environment '" + environment.name + "' has continuous demand; " + to_string(mode) +
                      " mode needs integer demand");
            break;
    }
    if (algorithm.initial_price) {
        check(*algorithm.initial_price >= price_low && *algorithm.initial_price <= price_high,
              "initial_price must lie in [price_low, price_high]");
    }
    if (mode == Mode::bench) {
        check(!bench.settings.empty(), "bench.settings must not be empty");
    }
}

ExperimentConfig parse_config(const std::string& text, std::optional<Mode> mode) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("malformed YAML: " + e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
    }
    if (root.IsNull()) {
        root = YAML::Node(YAML::NodeType::Map);
    }
    auto keys = mapping(root, "", {"mode", "environment", "algorithm", "horizon", "seasons", "inventory", "price_low",
                                   "price_high", "grid_size", "replications", "master_seed", "output", "workers",
                                   "mc_replications", "bench"});

    if (keys.contains("mode")) {
        const std::string name = word(keys["mode"], "mode");
        const auto parsed = parse_mode(name);
        if (!parsed) {
            throw ConfigError("unknown mode '" + name + "'", line_of(keys["mode"]));
        }
        if (mode && *mode != *parsed) {
            throw ConfigError(std::string("config mode '") + name + "' conflicts with subcommand '" +
                                  to_string(*mode) + "'",
                              line_of(keys["mode"]));
        }
        mode = parsed;
    }
    if (!mode) {
        throw ConfigError("mode is required", 1);
    }

    ExperimentConfig cfg = default_config(*mode);
    if (keys.contains("environment")) {
        parse_environment(keys["environment"], cfg.environment);
        std::tie(cfg.price_low, cfg.price_high) = default_domain(cfg.environment.name);
    }
    if (keys.contains("algorithm")) {
        parse_algorithm(keys["algorithm"], cfg.algorithm);
    }
    if (keys.contains("bench")) {
        parse_bench(keys["bench"], cfg.bench);
    }

    auto line = [&](const char* key) { return keys.contains(key) ? line_of(keys[key]) : 0; };
    if (keys.contains("horizon")) cfg.horizon = count(keys["horizon"], "horizon");
    if (keys.contains("seasons")) cfg.seasons = count(keys["seasons"], "seasons");
    if (keys.contains("inventory")) cfg.inventory = count(keys["inventory"], "inventory");
    if (keys.contains("price_low")) cfg.price_low = positive(keys["price_low"], "price_low");
    if (keys.contains("price_high")) cfg.price_high = positive(keys["price_high"], "price_high");
    if (keys.contains("grid_size")) cfg.grid_size = static_cast<std::size_t>(count(keys["grid_size"], "grid_size", 2));
    if (keys.contains("replications")) cfg.replications = count(keys["replications"], "replications");
    if (keys.contains("master_seed")) {
        cfg.master_seed = scalar<std::uint64_t>(keys["master_seed"], "master_seed", "an unsigned 64-bit integer");
    }
    if (keys.contains("output")) cfg.output = word(keys["output"], "output");
    if (keys.contains("workers")) cfg.workers = count(keys["workers"], "workers", 0);
    if (keys.contains("mc_replications")) cfg.mc_replications = count(keys["mc_replications"], "mc_replications", 0);

    check(cfg.price_high > cfg.price_low, "price_high must exceed price_low",
          std::max(line("price_high"), line("price_low")));
    if (cfg.mode == Mode::infinite || cfg.mode == Mode::finite) {
        const int alg_line = keys.contains("algorithm") ? line_of(keys["algorithm"]) : 0;
        check(cfg.mode == Mode::infinite ? is_infinite_algorithm(cfg.algorithm.name)
                                         : is_finite_algorithm(cfg.algorithm.name),
              "algorithm '" + cfg.algorithm.name + "' cannot run in " + to_string(cfg.mode) + " mode", alg_line);
    }
    if (cfg.mode != Mode::infinite && kContinuousEnvironments.contains(cfg.environment.name)) {
        throw ConfigError("environment '" + cfg.environment.name + "' has continuous demand; " +
                              to_string(cfg.mode) + " mode needs integer demand",
                          line_of(keys["environment"]));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Mode> mode) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'", 0);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), mode);
}

std::unique_ptr<DemandEnvironment> make_environment(const EnvironmentSpec& spec, double price_low, double price_high) {
    const std::string& n = spec.name;
    if (n == "polynomial") {
        std::vector<double> coeffs = spec.coefficients;
        if (spec.descending) {
            std::reverse(coeffs.begin(), coeffs.end());
        }
        return std::make_unique<PolynomialDemand>(std::move(coeffs), spec.noise_scale, price_low, price_high);
    }
    if (n == "moment_normal") {
        return std::make_unique<MomentStructuredDemand>(DemandFamily::normal, spec.link.value_or(Link::identity),
                                                        spec.a0.value_or(20.0), spec.a1.value_or(-1.0),
                                                        spec.sigma.value_or(2.0));
    }
    if (n == "moment_poisson") {
        return std::make_unique<MomentStructuredDemand>(DemandFamily::poisson, spec.link.value_or(Link::exp),
                                                        spec.a0.value_or(3.0), spec.a1.value_or(-0.02));
    }
    if (n == "moment_bernoulli") {
        return std::make_unique<MomentStructuredDemand>(DemandFamily::bernoulli, spec.link.value_or(Link::logistic),
                                                        spec.a0.value_or(2.0), spec.a1.value_or(-0.4));
    }
    if (n == "bernoulli_logit") {
        return std::make_unique<FiniteBernoulliDemand>(FiniteBernoulliDemand::Variant::logit);
    }
    if (n == "bernoulli_step_misspec") {
        return std::make_unique<FiniteBernoulliDemand>(FiniteBernoulliDemand::Variant::step_misspec);
    }
    if (n == "bernoulli_log_complex") {
        return std::make_unique<FiniteBernoulliDemand>(FiniteBernoulliDemand::Variant::log_complex);
    }
    if (n == "poisson_wtp") {
        return std::make_unique<PoissonWtpDemand>(spec.arrival_rate, spec.wtp_sigma);
    }
    if (n == "scarcity") {
        return std::make_unique<ScarcityDemand>();
    }
    throw ConfigError("unknown environment '" + n + "'", 0);
}

}  // namespace gp_pricer
