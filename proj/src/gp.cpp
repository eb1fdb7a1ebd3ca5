#include "gp_pricer/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gp_pricer/errors.hpp"
#include "gp_pricer/rng.hpp"

namespace gp_pricer {

namespace {

constexpr double kBaseJitter = 1e-8;
constexpr double kMaxJitter = 1e-2;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Observations sharing an input, reduced to sufficient statistics.
struct GroupedData {
    Eigen::VectorXd inputs;
    Eigen::VectorXd counts;
    Eigen::VectorXd means;
    double within_ss = 0.0;   // Σ_g Σ_i (y_gi − ȳ_g)²
    double total = 0.0;       // n
    double repeats = 0.0;     // n − (number of groups)
};

GroupedData group(const TrainingSet& data) {
    struct Acc {
        double count = 0.0;
        double mean = 0.0;
        double m2 = 0.0;
    };
    std::map<double, Acc> groups;
    auto xs = data.inputs();
    auto ys = data.targets();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Acc& a = groups[xs[i]];
        a.count += 1.0;
        const double delta = ys[i] - a.mean;
        a.mean += delta / a.count;
        a.m2 += delta * (ys[i] - a.mean);
    }
    GroupedData g;
    const auto m = static_cast<Eigen::Index>(groups.size());
    g.inputs.resize(m);
    g.counts.resize(m);
    g.means.resize(m);
    Eigen::Index j = 0;
    for (const auto& [x, a] : groups) {
        g.inputs[j] = x;
        g.counts[j] = a.count;
        g.means[j] = a.mean;
        g.within_ss += a.m2;
        ++j;
    }
    g.total = static_cast<double>(xs.size());
    g.repeats = g.total - static_cast<double>(m);
    return g;
}

// D^{1/2} K D^{1/2} + λ² I over the distinct inputs.
Eigen::MatrixXd scaled_kernel_matrix(const GroupedData& g, const KernelHyperparams& hp) {
    const Eigen::Index m = g.inputs.size();
    Eigen::MatrixXd a(m, m);
    const double inv_two_l2 = 1.0 / (2.0 * hp.lengthscale * hp.lengthscale);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double sj = std::sqrt(g.counts[j]);
        a(j, j) = hp.amplitude_sq * g.counts[j] + hp.noise_var;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double d = g.inputs[i] - g.inputs[j];
            const double v = hp.amplitude_sq * std::exp(-d * d * inv_two_l2) * sj * std::sqrt(g.counts[i]);
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

double grouped_lml(const GroupedData& g, const KernelHyperparams& hp, double prior_mean) {
    double jitter = 0.0;
    const auto llt = detail::factorize_with_jitter(scaled_kernel_matrix(g, hp), hp.amplitude_sq, jitter);
    const Eigen::VectorXd z =
        g.counts.cwiseSqrt().cwiseProduct((g.means.array() - prior_mean).matrix());
    const Eigen::VectorXd v = llt.matrixL().solve(z);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double nu = hp.noise_var + jitter;
    const double within = g.repeats * std::log(nu) + g.within_ss / nu;
    return -0.5 * v.squaredNorm() - 0.5 * log_det - 0.5 * within -
           0.5 * g.total * std::log(2.0 * std::numbers::pi);
}

struct LogPoint {
    double v[3];
};

KernelHyperparams from_log(const LogPoint& p, const Interval (&box)[3]) {
    KernelHyperparams hp;
    hp.amplitude_sq = std::clamp(std::exp(p.v[0]), box[0].lo, box[0].hi);
    hp.lengthscale = std::clamp(std::exp(p.v[1]), box[1].lo, box[1].hi);
    hp.noise_var = std::clamp(std::exp(p.v[2]), box[2].lo, box[2].hi);
    return hp;
}

}  // namespace

void KernelHyperparams::validate() const {
    if (!positive_finite(amplitude_sq) || !positive_finite(lengthscale) || !positive_finite(noise_var)) {
        throw std::invalid_argument("kernel hyperparameters must be finite and strictly positive");
    }
}

double kernel(double x1, double x2, const KernelHyperparams& hp) noexcept {
    const double d = x1 - x2;
    return hp.amplitude_sq * std::exp(-d * d / (2.0 * hp.lengthscale * hp.lengthscale));
}

TrainingSet::TrainingSet(std::vector<double> inputs, std::vector<double> targets) {
    if (inputs.size() != targets.size()) {
        throw std::invalid_argument("training inputs and targets differ in length");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!std::isfinite(inputs[i]) || !std::isfinite(targets[i])) {
            throw std::invalid_argument("training data must be finite");
        }
    }
    inputs_ = std::move(inputs);
    targets_ = std::move(targets);
}

void TrainingSet::add(double input, double target) {
    if (!std::isfinite(input) || !std::isfinite(target)) {
        throw std::invalid_argument("training data must be finite");
    }
    inputs_.push_back(input);
    targets_.push_back(target);
}

double TrainingSet::target_mean() const {
    if (targets_.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double y : targets_) {
        sum += y;
    }
    return sum / static_cast<double>(targets_.size());
}

double TrainingSet::target_variance_estimate() const {
    const double mean = target_mean();
    if (targets_.size() >= 2) {
        double ss = 0.0;
        for (double y : targets_) {
            ss += (y - mean) * (y - mean);
        }
        const double var = ss / static_cast<double>(targets_.size() - 1);
        if (var > 1e-12 * (1.0 + mean * mean)) {
            return var;
        }
    }
    return std::max(1.0, mean * mean);
}

double Prediction::stddev() const noexcept { return std::sqrt(std::max(variance, 0.0)); }

void HyperparamBounds::validate() const {
    for (const Interval* iv : {&amplitude_sq, &lengthscale, &noise_var}) {
        if (!positive_finite(iv->lo) || !positive_finite(iv->hi) || iv->lo > iv->hi) {
            throw std::invalid_argument("hyperparameter bounds must be positive intervals with lo <= hi");
        }
    }
}

HyperparamBounds default_bounds(const TrainingSet& data, double price_low, double price_high) {
    if (!(price_high > price_low)) {
        throw std::invalid_argument("price domain must satisfy low < high");
    }
    const double v = data.target_variance_estimate();
    const double width = price_high - price_low;
    return HyperparamBounds{{1e-4 * v, 1e6 * v}, {1e-2 * width, width}, {1e-6 * v, v}};
}

KernelHyperparams bounds_midpoint(const HyperparamBounds& b) {
    return KernelHyperparams{std::sqrt(b.amplitude_sq.lo * b.amplitude_sq.hi),
                             std::sqrt(b.lengthscale.lo * b.lengthscale.hi),
                             std::sqrt(b.noise_var.lo * b.noise_var.hi)};
}

double default_noise_floor(const TrainingSet& data) { return 1e-3 * std::sqrt(data.target_variance_estimate()); }

namespace detail {

Eigen::LLT<Eigen::MatrixXd> factorize_with_jitter(const Eigen::MatrixXd& a, double scale, double& jitter) {
    for (double rel = kBaseJitter; rel <= kMaxJitter * (1.0 + 1e-9); rel *= 10.0) {
        const double j = rel * scale;
        Eigen::MatrixXd shifted = a;
        shifted.diagonal().array() += j;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite() &&
            (llt.matrixLLT().diagonal().array() > 0.0).all()) {
            jitter = j;
            return llt;
        }
    }
    throw FactorizationFailure("kernel matrix not positive definite after jitter " +
                               std::to_string(kMaxJitter * scale));
}

}  // namespace detail

GpPosterior GpPosterior::fit(const TrainingSet& data, const KernelHyperparams& hp, double prior_mean) {
    if (data.empty()) {
        throw std::invalid_argument("cannot fit a GP on an empty training set");
    }
    hp.validate();
    const GroupedData g = group(data);

    GpPosterior post;
    post.data_ = data;
    post.hp_ = hp;
    post.prior_mean_ = prior_mean;
    post.llt_ = detail::factorize_with_jitter(scaled_kernel_matrix(g, hp), hp.amplitude_sq, post.jitter_);
    post.unique_ = g.inputs;
    post.sqrt_count_ = g.counts.cwiseSqrt();
    const Eigen::VectorXd z = post.sqrt_count_.cwiseProduct((g.means.array() - prior_mean).matrix());
    post.weights_ = post.sqrt_count_.cwiseProduct(post.llt_.solve(z));
    return post;
}

Prediction GpPosterior::predict(double price) const {
    const Eigen::Index m = unique_.size();
    Eigen::VectorXd k(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        k[i] = kernel(price, unique_[i], hp_);
    }
    const Eigen::VectorXd v = llt_.matrixL().solve(sqrt_count_.cwiseProduct(k));
    const double var = std::clamp(hp_.amplitude_sq - v.squaredNorm(), 0.0, hp_.amplitude_sq);
    return {prior_mean_ + k.dot(weights_), var};
}

std::vector<Prediction> GpPosterior::predict(std::span<const double> prices) const {
    const Eigen::Index m = unique_.size();
    const auto q = static_cast<Eigen::Index>(prices.size());
    Eigen::MatrixXd k(m, q);
    for (Eigen::Index c = 0; c < q; ++c) {
        for (Eigen::Index i = 0; i < m; ++i) {
            k(i, c) = kernel(prices[static_cast<std::size_t>(c)], unique_[i], hp_);
        }
    }
    const Eigen::VectorXd means = k.transpose() * weights_;
    Eigen::MatrixXd v = sqrt_count_.asDiagonal() * k;
    llt_.matrixL().solveInPlace(v);
    std::vector<Prediction> out(prices.size());
    for (Eigen::Index c = 0; c < q; ++c) {
        const double var = std::clamp(hp_.amplitude_sq - v.col(c).squaredNorm(), 0.0, hp_.amplitude_sq);
        out[static_cast<std::size_t>(c)] = {prior_mean_ + means[c], var};
    }
    return out;
}

double GpPosterior::observation_variance(double price) const { return predict(price).variance + hp_.noise_var; }

double log_marginal_likelihood(const TrainingSet& data, const KernelHyperparams& hp, double prior_mean) {
    if (data.empty()) {
        throw std::invalid_argument("log marginal likelihood needs at least one observation");
    }
    hp.validate();
    return grouped_lml(group(data), hp, prior_mean);
}

KernelHyperparams optimize_hyperparams(const TrainingSet& data, const HyperparamSearch& search) {
    if (data.empty()) {
        throw std::invalid_argument("cannot optimize hyperparameters without data");
    }
    if (search.restarts < 1) {
        throw std::invalid_argument("restarts must be >= 1");
    }
    search.bounds.validate();

    Interval box[3] = {search.bounds.amplitude_sq, search.bounds.lengthscale, search.bounds.noise_var};
    if (search.noise_floor) {
        const double floor_var = (*search.noise_floor) * (*search.noise_floor);
        box[2].lo = std::max(box[2].lo, floor_var);
        box[2].hi = std::max(box[2].hi, box[2].lo);
    }
    double log_lo[3];
    double log_hi[3];
    for (int i = 0; i < 3; ++i) {
        log_lo[i] = std::log(box[i].lo);
        log_hi[i] = std::log(box[i].hi);
    }

    const GroupedData g = group(data);
    const double mu = data.target_mean();
    auto evaluate = [&](const LogPoint& p) {
        try {
            const double v = grouped_lml(g, from_log(p, box), mu);
            return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        } catch (const FactorizationFailure&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    auto clamp_point = [&](LogPoint p) {
        for (int i = 0; i < 3; ++i) {
            p.v[i] = std::clamp(p.v[i], log_lo[i], log_hi[i]);
        }
        return p;
    };

    std::vector<LogPoint> starts;
    const KernelHyperparams init = search.initial.value_or(bounds_midpoint(search.bounds));
    starts.push_back(clamp_point({{std::log(init.amplitude_sq), std::log(init.lengthscale), std::log(init.noise_var)}}));
    Rng rng(search.seed);
    for (int r = 1; r < search.restarts; ++r) {
        LogPoint p{};
        for (int i = 0; i < 3; ++i) {
            p.v[i] = std::uniform_real_distribution<double>(log_lo[i], log_hi[i])(rng);
        }
        starts.push_back(p);
    }

    LogPoint best{};
    double best_value = -std::numeric_limits<double>::infinity();
    for (const LogPoint& start : starts) {
        LogPoint cur = start;
        double cur_value = evaluate(cur);
        if (!std::isfinite(cur_value)) {
            continue;
        }
        double step = search.initial_step;
        for (int it = 0; it < search.max_iterations && step >= search.min_step; ++it) {
            bool moved = false;
            for (int i = 0; i < 3; ++i) {
                if (log_lo[i] == log_hi[i]) {
                    continue;
                }
                for (double dir : {1.0, -1.0}) {
                    LogPoint cand = cur;
                    cand.v[i] = std::clamp(cur.v[i] + dir * step, log_lo[i], log_hi[i]);
                    if (cand.v[i] == cur.v[i]) {
                        continue;
                    }
                    const double v = evaluate(cand);
                    if (v > cur_value) {
                        cur = cand;
                        cur_value = v;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) {
                step *= 0.5;
            }
        }
        if (cur_value > best_value) {
            best_value = cur_value;
            best = cur;
        }
    }
    if (!std::isfinite(best_value)) {
        throw OptimizationDegenerate("every hyperparameter candidate failed to factorize");
    }
    return from_log(best, box);
}

KernelHyperparams optimize_hyperparams(const TrainingSet& data, const HyperparamBounds& bounds, int restarts) {
    HyperparamSearch search;
    search.bounds = bounds;
    search.restarts = restarts;
    return optimize_hyperparams(data, search);
}

}  // namespace gp_pricer
