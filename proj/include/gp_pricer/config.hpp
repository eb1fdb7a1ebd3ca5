#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gp_pricer/acquisition.hpp"
#include "gp_pricer/demand.hpp"
#include "gp_pricer/infinite.hpp"

namespace gp_pricer {

enum class Mode { infinite, finite, oracle, bench };

const char* to_string(Mode mode);
std::optional<Mode> parse_mode(const std::string& s);

struct EnvironmentSpec {
    /// polynomial, moment_normal, moment_poisson, moment_bernoulli,
    /// bernoulli_logit, bernoulli_step_misspec, bernoulli_log_complex,
    /// poisson_wtp or scarcity.
    std::string name = "polynomial";

    // polynomial
    std::vector<double> coefficients{-150.0, 480.0, -165.0, 22.0, -1.0};
    bool descending = false;  // coefficients listed from the highest power down
    double noise_scale = 0.05;

    // moment-structured; unset values take the family defaults
    std::optional<double> a0;
    std::optional<double> a1;
    std::optional<double> sigma;
    std::optional<Link> link;

    // poisson_wtp
    double arrival_rate = 5.0;
    double wtp_sigma = 30.0;
};

struct AlgorithmSpec {
    /// bo_inf, lightweight_bo_inf, gp_fin_model_based or bo_fin_heuristic.
    std::string name;

    int refit_every = 1;
    int restarts = 5;
    double bucket_width = 0.45;
    BucketRepresentative bucket_representative = BucketRepresentative::centroid;
    KappaConfig kappa;

    double finite_kappa = 2.0;
    double decay = 0.05;
    int hyper_refit_every = 1;
    bool refresh_within_season = false;

    std::optional<double> noise_floor;
    std::optional<double> initial_price;
};

struct BenchSpec {
    std::vector<std::pair<int, int>> settings{{5, 10}, {5, 40}, {10, 40}, {20, 40}};  // (C, T)
    int seasons = 10;         // timed seasons per algorithm
    int warmup_seasons = 1;   // untimed; hyperparameters are searched here only
};

struct ExperimentConfig {
    Mode mode = Mode::infinite;
    EnvironmentSpec environment;
    AlgorithmSpec algorithm;
    int horizon = 1000;
    int seasons = 50;
    int inventory = 10;
    double price_low = 1.0;
    double price_high = 10.0;
    std::size_t grid_size = 200;  // 100 outside infinite mode
    int replications = 1;
    std::uint64_t master_seed = 1;
    std::string output = "out";
    int workers = 0;           // 0: hardware concurrency
    int mc_replications = 0;   // Monte Carlo seasons per policy in finite mode; 0 disables
    BenchSpec bench;

    /// Throws ConfigError on out-of-range values or unknown names.
    void validate() const;
};

/// Mode defaults: environment, algorithm and price domain suited to the mode.
ExperimentConfig default_config(Mode mode);

/// Parses YAML text. Every key must be known; errors carry the 1-based line.
/// `mode` fixes the mode when the text does not name one and must agree with it
/// when it does.
ExperimentConfig parse_config(const std::string& text, std::optional<Mode> mode = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Mode> mode = std::nullopt);

std::unique_ptr<DemandEnvironment> make_environment(const EnvironmentSpec& spec, double price_low, double price_high);

/// Default price domain for an environment name.
std::pair<double, double> default_domain(const std::string& environment);

}  // namespace gp_pricer
