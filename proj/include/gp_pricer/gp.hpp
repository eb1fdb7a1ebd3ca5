#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace gp_pricer {

/// Squared-exponential kernel parameters: amplitude γ², lengthscale l, noise variance λ².
struct KernelHyperparams {
    double amplitude_sq = 1.0;
    double lengthscale = 1.0;
    double noise_var = 1e-2;

    /// Throws std::invalid_argument unless every field is finite and positive.
    void validate() const;

    friend bool operator==(const KernelHyperparams&, const KernelHyperparams&) = default;
};

/// γ²·exp(−(x1−x2)²/(2l²)).
double kernel(double x1, double x2, const KernelHyperparams& hp) noexcept;

/// Ordered (price, observation) pairs.
class TrainingSet {
public:
    TrainingSet() = default;
    TrainingSet(std::vector<double> inputs, std::vector<double> targets);

    /// Appends one pair. Non-finite values are rejected.
    void add(double input, double target);

    std::size_t size() const noexcept { return inputs_.size(); }
    bool empty() const noexcept { return inputs_.empty(); }
    std::span<const double> inputs() const noexcept { return inputs_; }
    std::span<const double> targets() const noexcept { return targets_; }

    double target_mean() const;

    /// Scale used for default bounds and the noise floor: sample variance of
    /// the targets, or max(1, mean²) when fewer than two distinct targets exist.
    double target_variance_estimate() const;

private:
    std::vector<double> inputs_;
    std::vector<double> targets_;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;

    double stddev() const noexcept;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct HyperparamBounds {
    Interval amplitude_sq;
    Interval lengthscale;
    Interval noise_var;

    void validate() const;
};

/// Scale-aware bounds: γ² ∈ [1e-4, 1e6]·v, l ∈ [1e-2, 1]·(p_h − p_l), λ² ∈ [1e-6, 1]·v
/// with v the target variance estimate.
HyperparamBounds default_bounds(const TrainingSet& data, double price_low, double price_high);

/// Geometric midpoint of each interval; used before the first optimization.
KernelHyperparams bounds_midpoint(const HyperparamBounds& bounds);

/// 1e-3·sqrt(target variance estimate).
double default_noise_floor(const TrainingSet& data);

struct HyperparamSearch {
    HyperparamBounds bounds;
    int restarts = 5;             // default init + (restarts − 1) log-uniform draws
    int max_iterations = 100;     // coordinate-ascent sweeps per start
    double initial_step = 1.0;    // log-space step
    double min_step = 1e-3;
    std::optional<double> noise_floor;  // lower bound on λ (a standard deviation)
    std::optional<KernelHyperparams> initial;
    std::uint64_t seed = 0x5eed;
};

/// Fitted posterior; immutable and safe to query from several threads.
///
/// Observations that share an input are held as (count, mean, within-group sum
/// of squares). Mean, variance and likelihood equal the dense n×n formulas.
class GpPosterior {
public:
    /// Factorizes K + (λ² + jitter)I. Jitter starts at 1e-8·γ² and grows ×10 up
    /// to 1e-2·γ²; throws FactorizationFailure past that.
    static GpPosterior fit(const TrainingSet& data, const KernelHyperparams& hp, double prior_mean);

    /// Latent posterior mean and variance; variance is clamped to [0, γ²].
    Prediction predict(double price) const;
    std::vector<Prediction> predict(std::span<const double> prices) const;

    /// Variance of a fresh noisy observation at `price`: latent variance + λ².
    double observation_variance(double price) const;

    const TrainingSet& training_set() const noexcept { return data_; }
    const KernelHyperparams& hyperparams() const noexcept { return hp_; }
    double prior_mean() const noexcept { return prior_mean_; }
    /// Diagonal jitter that was actually applied.
    double jitter() const noexcept { return jitter_; }
    std::size_t num_observations() const noexcept { return data_.size(); }
    std::size_t num_unique_inputs() const noexcept { return static_cast<std::size_t>(unique_.size()); }

private:
    GpPosterior() = default;

    TrainingSet data_;
    KernelHyperparams hp_;
    double prior_mean_ = 0.0;
    double jitter_ = 0.0;
    Eigen::VectorXd unique_;     // distinct inputs
    Eigen::VectorXd sqrt_count_; // sqrt of multiplicity
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd weights_;    // k_*ᵀ weights_ = mean − μ
};

/// −½(y−μ)ᵀ(K+λ²I)⁻¹(y−μ) − ½log|K+λ²I| − (n/2)log 2π, with the same jitter policy as fit.
double log_marginal_likelihood(const TrainingSet& data, const KernelHyperparams& hp, double prior_mean);

/// Multi-start coordinate ascent in log space maximizing the log marginal
/// likelihood with the prior mean fixed to the target mean. Candidates that
/// fail to factorize are skipped; throws OptimizationDegenerate if all fail.
KernelHyperparams optimize_hyperparams(const TrainingSet& data, const HyperparamSearch& search);
KernelHyperparams optimize_hyperparams(const TrainingSet& data, const HyperparamBounds& bounds, int restarts);

namespace detail {

/// Cholesky of `a` + jitter·I, escalating jitter from 1e-8·scale by ×10 up to
/// 1e-2·scale. Returns the applied jitter through `jitter`.
Eigen::LLT<Eigen::MatrixXd> factorize_with_jitter(const Eigen::MatrixXd& a, double scale, double& jitter);

}  // namespace detail

}  // namespace gp_pricer
