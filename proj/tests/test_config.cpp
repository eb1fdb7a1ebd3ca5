#include <string>

#include <gtest/gtest.h>

#include "gp_pricer/config.hpp"
#include "gp_pricer/errors.hpp"

using namespace gp_pricer;

namespace {

int error_line(const std::string& yaml, std::optional<Mode> mode = std::nullopt) {
    try {
        parse_config(yaml, mode);
    } catch (const ConfigError& e) {
        return e.line();
    }
    ADD_FAILURE() << "expected ConfigError for:\n" << yaml;
    return -1;
}

}  // namespace

TEST(Config, ModeDefaults) {
    const auto inf = default_config(Mode::infinite);
    EXPECT_EQ(inf.environment.name, "polynomial");
    EXPECT_EQ(inf.algorithm.name, "bo_inf");
    EXPECT_EQ(inf.price_low, 1.0);
    EXPECT_EQ(inf.price_high, 10.0);
    EXPECT_EQ(inf.grid_size, 200u);
    EXPECT_EQ(inf.algorithm.kappa.mode, KappaConfig::Mode::constant);
    EXPECT_EQ(inf.algorithm.kappa.constant_value, 2.0);
    inf.validate();

    const auto fin = default_config(Mode::finite);
    EXPECT_EQ(fin.environment.name, "bernoulli_logit");
    EXPECT_EQ(fin.algorithm.name, "gp_fin_model_based");
    EXPECT_EQ(fin.horizon, 20);
    EXPECT_EQ(fin.inventory, 10);
    EXPECT_EQ(fin.grid_size, 100u);
    EXPECT_EQ(fin.price_high, 20.0);
    fin.validate();

    default_config(Mode::oracle).validate();
    default_config(Mode::bench).validate();
}

TEST(Config, ParsesFullDocument) {
    const auto cfg = parse_config(R"(mode: infinite
environment:
  name: polynomial
  params:
    coefficients: [-1, 22, -165, 480, -150]
    coefficient_order: descending
    noise_scale: 0.1
algorithm:
  name: lightweight_bo_inf
  params:
    bucket_width: 0.9
    bucket_representative: midpoint
    refit_every: 10
    kappa_mode: schedule
    kappa_scale: 1.5
horizon: 300
replications: 4
master_seed: 18446744073709551615
output: results/run1
workers: 2
)");
    EXPECT_EQ(cfg.mode, Mode::infinite);
    EXPECT_TRUE(cfg.environment.descending);
    EXPECT_EQ(cfg.environment.coefficients.front(), -1.0);
    EXPECT_EQ(cfg.environment.noise_scale, 0.1);
    EXPECT_EQ(cfg.algorithm.name, "lightweight_bo_inf");
    EXPECT_EQ(cfg.algorithm.bucket_width, 0.9);
    EXPECT_EQ(cfg.algorithm.bucket_representative, BucketRepresentative::midpoint);
    EXPECT_EQ(cfg.algorithm.refit_every, 10);
    EXPECT_EQ(cfg.algorithm.kappa.mode, KappaConfig::Mode::sqrt_log_schedule);
    EXPECT_EQ(cfg.algorithm.kappa.schedule_scale, 1.5);
    EXPECT_EQ(cfg.horizon, 300);
    EXPECT_EQ(cfg.replications, 4);
    EXPECT_EQ(cfg.master_seed, 18446744073709551615ULL);
    EXPECT_EQ(cfg.output, "results/run1");
    EXPECT_EQ(cfg.workers, 2);

    // Descending order reproduces the ascending polynomial. The clamp at zero
    // lifts the mean by a few 1e-8 at this noise level.
    const auto env = make_environment(cfg.environment, cfg.price_low, cfg.price_high);
    EXPECT_NEAR(env->mean_demand(1.0), 186.0, 1e-6);
}

TEST(Config, EnvironmentSetsDomain) {
    const auto cfg = parse_config("environment:\n  name: moment_poisson\n", Mode::infinite);
    EXPECT_EQ(cfg.price_high, 100.0);
    const auto explicit_domain =
        parse_config("environment:\n  name: moment_poisson\nprice_low: 2\nprice_high: 50\n", Mode::infinite);
    EXPECT_EQ(explicit_domain.price_low, 2.0);
    EXPECT_EQ(explicit_domain.price_high, 50.0);
}

TEST(Config, SubcommandSuppliesMode) {
    EXPECT_EQ(parse_config("seasons: 3\n", Mode::finite).mode, Mode::finite);
    EXPECT_EQ(parse_config("", Mode::oracle).mode, Mode::oracle);
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("mode: infinite\nhorizon: 10\nbogus: 1\n"), 3);
    EXPECT_EQ(error_line("mode: infinite\nhorizon: -4\n"), 2);
    EXPECT_EQ(error_line("mode: infinite\nhorizon: ten\n"), 2);
    EXPECT_EQ(error_line("mode: infinite\nenvironment:\n  name: nowhere\n"), 3);
    EXPECT_EQ(error_line("mode: infinite\nalgorithm:\n  name: bo_inf\n  params:\n    kappa_mode: sometimes\n"), 5);
    EXPECT_EQ(error_line("mode: infinite\nalgorithm:\n  name: bo_inf\n  params:\n    refit: 3\n"), 5);
    EXPECT_EQ(error_line("mode: finite\nenvironment:\n  name: scarcity\n  params:\n    a0: 1\n"), 5);
    EXPECT_EQ(error_line("mode: infinite\nhorizon: 10\nhorizon: 20\n"), 3);
    EXPECT_EQ(error_line("mode: sideways\n"), 1);
    EXPECT_EQ(error_line("mode: infinite\nenvironment: [1, 2\n"), 3);
    EXPECT_EQ(error_line("mode: infinite\nprice_low: 5\nprice_high: 2\n"), 3);
    EXPECT_EQ(error_line("mode: finite\nalgorithm:\n  name: bo_inf\n"), 3);
    EXPECT_EQ(error_line("mode: finite\n", Mode::infinite), 1);
    EXPECT_EQ(error_line("bench:\n  settings: [[5]]\n", Mode::bench), 2);
}

TEST(Config, ModeIsRequiredWithoutSubcommand) {
    EXPECT_THROW(parse_config("horizon: 5\n"), ConfigError);
}

TEST(Config, ValidationRejectsContinuousDemandOutsideInfiniteMode) {
    auto cfg = default_config(Mode::finite);
    cfg.environment.name = "polynomial";
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = default_config(Mode::infinite);
    cfg.algorithm.initial_price = 50.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, LoadMissingFile) {
    EXPECT_THROW(load_config("/nonexistent/gp_pricer.yaml"), ConfigError);
}

TEST(Config, EnvironmentFactory) {
    EnvironmentSpec spec;
    spec.name = "moment_bernoulli";
    auto env = make_environment(spec, 1.0, 20.0);
    EXPECT_NEAR(env->mean_demand(5.0), 0.5, 1e-15);
    spec.name = "moment_normal";
    env = make_environment(spec, 1.0, 15.0);
    EXPECT_NEAR(env->mean_demand(10.0), 10.0, 1e-5);
    spec.name = "poisson_wtp";
    env = make_environment(spec, 1.0, 100.0);
    EXPECT_DOUBLE_EQ(env->mean_demand(0.0), 5.0);
    spec.name = "bernoulli_step_misspec";
    EXPECT_EQ(make_environment(spec, 1.0, 20.0)->mean_demand(10.0), 0.8);
    spec.name = "scarcity";
    EXPECT_NEAR(make_environment(spec, 1.0, 100.0)->mean_demand(60.0), 2.5, 1e-12);
}
