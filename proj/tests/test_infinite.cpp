#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gp_pricer/infinite.hpp"
#include "gp_pricer/oracle.hpp"

using namespace gp_pricer;

namespace {

const std::vector<double> kDegree4{-150.0, 480.0, -165.0, 22.0, -1.0};

InfiniteRunConfig short_run(int horizon, std::uint64_t seed = 3) {
    InfiniteRunConfig cfg;
    cfg.horizon = horizon;
    cfg.grid_size = 100;
    cfg.refit_every = 5;
    cfg.restarts = 3;
    cfg.seed = seed;
    return cfg;
}

void expect_trace_invariants(const InfiniteTrace& tr, const InfiniteRunConfig& cfg, const DemandEnvironment& env) {
    ASSERT_EQ(tr.steps.size(), static_cast<std::size_t>(cfg.horizon));
    double cum = 0.0;
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const auto& s = tr.steps[i];
        EXPECT_EQ(s.t, static_cast<int>(i) + 1);
        EXPECT_GE(s.price, cfg.price_low);
        EXPECT_LE(s.price, cfg.price_high);
        EXPECT_DOUBLE_EQ(s.revenue, s.price * s.demand);
        EXPECT_GE(s.inst_regret, 0.0);
        EXPECT_NEAR(s.inst_regret, tr.optimal_revenue - env.expected_revenue(s.price), 1e-9);
        cum += s.inst_regret;
        EXPECT_NEAR(s.cum_regret, cum, 1e-6);
        if (i > 0) {
            EXPECT_GE(s.cum_regret, tr.steps[i - 1].cum_regret);
            EXPECT_LE(s.best_till_now, tr.steps[i - 1].best_till_now);
        }
        EXPECT_GE(s.best_till_now, 0.0);
    }
}

}  // namespace

TEST(Buckets, CountAndIndex) {
    BucketTable table(1.0, 20.0, 2.0);
    EXPECT_EQ(table.bucket_count(), 10u);
    EXPECT_EQ(table.index(1.0), 0u);
    EXPECT_EQ(table.index(20.0), 9u);
    EXPECT_EQ(bucket_index(20.0, 1.0, 20.0, 2.0), 9u);
    EXPECT_EQ(bucket_index(1.0, 1.0, 20.0, 0.3), 0u);
    BucketTable single(1.0, 20.0, 20.0);
    EXPECT_EQ(single.bucket_count(), 1u);
    for (double p = 1.0; p <= 20.0; p += 0.5) EXPECT_EQ(single.index(p), 0u);
}

TEST(Buckets, AveragesAndRepresentatives) {
    BucketTable mid(1.0, 10.0, 2.0, BucketRepresentative::midpoint);
    mid.add(1.5, 10.0);
    mid.add(2.5, 20.0);
    mid.add(9.9, 4.0);
    EXPECT_EQ(mid.count(0), 2u);
    EXPECT_DOUBLE_EQ(mid.average(0), 15.0);
    EXPECT_DOUBLE_EQ(mid.representative(0), 2.0);
    // Bucket 4 spans [9, 11) but the domain stops at 10.
    EXPECT_DOUBLE_EQ(mid.representative(4), 9.5);
    EXPECT_THROW(mid.average(1), std::out_of_range);

    BucketTable cen(1.0, 10.0, 2.0, BucketRepresentative::centroid);
    cen.add(1.5, 10.0);
    cen.add(2.5, 20.0);
    EXPECT_DOUBLE_EQ(cen.representative(0), 2.0);
    cen.add(1.0, 0.0);
    EXPECT_DOUBLE_EQ(cen.representative(0), 5.0 / 3.0);
    const auto d = cen.training_set();
    ASSERT_EQ(d.size(), 1u);
    EXPECT_DOUBLE_EQ(d.targets()[0], 10.0);
}

TEST(RevenueOptimum, IncludesFirstPrice) {
    PolynomialDemand env(kDegree4, 0.0, 1.0, 10.0);
    InfiniteRunConfig cfg = short_run(10);
    const auto grid = cfg.grid();
    const auto best = grid_revenue_optimum(env, cfg);
    for (double p : grid.points()) EXPECT_LE(env.expected_revenue(p), best.revenue);
    EXPECT_GE(best.revenue, env.expected_revenue(cfg.first_price()));
}

TEST(BoInf, TraceInvariantsAndGrowth) {
    PolynomialDemand env(kDegree4, 0.05, 1.0, 10.0);
    const auto cfg = short_run(60);
    const auto tr = run_bo_inf(env, cfg);
    expect_trace_invariants(tr, cfg, env);
    EXPECT_EQ(tr.steps.front().price, 5.5);
    for (const auto& s : tr.steps) EXPECT_EQ(s.gp_points, static_cast<std::size_t>(s.t));
    const auto btn = best_till_now_regret(tr, env);
    for (std::size_t i = 0; i < btn.size(); ++i) EXPECT_NEAR(btn[i], tr.steps[i].best_till_now, 1e-12);
}

TEST(BoInf, SingleStepRunsInitialPriceOnly) {
    PolynomialDemand env(kDegree4, 0.05, 1.0, 10.0);
    auto cfg = short_run(1);
    cfg.initial_price = 4.0;
    const auto tr = run_bo_inf(env, cfg);
    ASSERT_EQ(tr.steps.size(), 1u);
    EXPECT_EQ(tr.steps[0].price, 4.0);
}

TEST(BoInf, SameSeedSameTrace) {
    PolynomialDemand env(kDegree4, 0.05, 1.0, 10.0);
    const auto cfg = short_run(40, 17);
    const auto a = run_bo_inf(env, cfg);
    const auto b = run_bo_inf(env, cfg);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        EXPECT_EQ(a.steps[i].price, b.steps[i].price);
        EXPECT_EQ(a.steps[i].demand, b.steps[i].demand);
    }
    EXPECT_EQ(a.final_price, b.final_price);
}

TEST(BoInf, NoiselessConvergesUnderSchedule) {
    PolynomialDemand env(kDegree4, 0.0, 1.0, 10.0);
    auto cfg = short_run(200);
    cfg.refit_every = 1;
    cfg.kappa.mode = KappaConfig::Mode::sqrt_log_schedule;
    const auto tr = run_bo_inf(env, cfg);
    EXPECT_LT(tr.steps.back().best_till_now, 0.02 * tr.optimal_revenue);
}

TEST(BoInf, RejectsBadConfig) {
    PolynomialDemand env(kDegree4, 0.05, 1.0, 10.0);
    auto cfg = short_run(10);
    cfg.refit_every = 0;
    EXPECT_THROW(run_bo_inf(env, cfg), std::invalid_argument);
    cfg = short_run(10);
    cfg.initial_price = 11.0;
    EXPECT_THROW(run_bo_inf(env, cfg), std::invalid_argument);
}

TEST(Lightweight, TrainingSetBoundedByBuckets) {
    PolynomialDemand env(kDegree4, 0.05, 1.0, 10.0);
    const auto cfg = short_run(80);
    const double width = 1.0;
    const auto tr = run_lightweight_bo_inf(env, cfg, width);
    expect_trace_invariants(tr, cfg, env);
    const std::size_t buckets = BucketTable(1.0, 10.0, width).bucket_count();
    for (const auto& s : tr.steps) {
        EXPECT_LE(s.gp_points, std::min<std::size_t>(static_cast<std::size_t>(s.t), buckets));
    }
}

TEST(Lightweight, SingleBucketHoldsRunningMean) {
    PolynomialDemand env(kDegree4, 0.05, 1.0, 10.0);
    const auto cfg = short_run(25);
    const auto tr = run_lightweight_bo_inf(env, cfg, 100.0);
    BucketTable table(1.0, 10.0, 100.0);
    double sum = 0.0;
    for (const auto& s : tr.steps) {
        EXPECT_EQ(s.gp_points, 1u);
        table.add(s.price, s.revenue);
        sum += s.revenue;
        EXPECT_NEAR(table.average(0), sum / s.t, 1e-9);
    }
}
