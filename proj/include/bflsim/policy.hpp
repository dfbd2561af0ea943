#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bflsim/params.hpp"
#include "bflsim/rng.hpp"
#include "bflsim/vec.hpp"

namespace bflsim::drl {

// Fully-connected net with tanh hidden layers and linear outputs; parameters
// live in an external flat vector (per-layer W row-major then bias).
struct Mlp {
    std::vector<std::size_t> sizes;

    explicit Mlp(std::vector<std::size_t> layer_sizes = {}) : sizes(std::move(layer_sizes)) {}

    std::size_t param_count() const;

    struct Cache {
        std::vector<Vec> acts;  // acts[0] = input, acts.back() = output
    };

    Vec forward(const double* theta, const Vec& x, Cache* cache = nullptr) const;
    // Accumulates dL/dtheta given dL/doutput; returns dL/dinput when
    // dinput != nullptr.
    void backward(const double* theta, const Cache& cache, const Vec& dout, double* dtheta,
                  Vec* dinput = nullptr) const;

    // Batched variants over row-major inputs (one sample per row); the KL
    // machinery evaluates every (md, choice) pair at once through these.
    struct BatchCache {
        std::vector<Mat> acts;
    };
    Mat forward_batch(const double* theta, const Mat& x, BatchCache* cache = nullptr) const;
    void backward_batch(const double* theta, const BatchCache& cache, const Mat& dout,
                        double* dtheta) const;
};

// Continuous channels per MD, in this order.
enum ContDim : std::size_t {
    cont_power = 0,
    cont_bandwidth = 1,
    cont_cpu = 2,
    cont_hash = 3,
    kContDims = 4,
};

// Offload mode samples (power, bandwidth, hash); local samples (cpu, hash).
const std::array<std::size_t, 3>& offload_dims();
const std::array<std::size_t, 2>& local_dims();

// KL(p || q) for categoricals, exact.
double categorical_kl(const Vec& p_old, const Vec& p_new);
// KL(N(mu_old, sd_old^2) || N(mu_new, sd_new^2)), analytic; squashing by an
// invertible map leaves the KL unchanged, so this is also the squashed KL.
double gaussian_kl(double mu_old, double sd_old, double mu_new, double sd_new);

struct SampledStep {
    Vec obs;
    std::vector<std::size_t> choices;                 // per MD
    std::vector<std::array<double, kContDims>> cont;  // physical values, unused dims 0
    double reward = 0.0;
    double v_s = 0.0;
    double v_next = 0.0;  // 0 on terminal transitions
    double logp_old = 0.0;
    double advantage = 0.0;
};

using Trajectory = std::vector<SampledStep>;

// Distribution snapshot at a fixed parameter vector, used as the frozen
// "old" side of ratios and KL terms.
struct DistCache {
    // probs[t]: N x A discrete distributions.
    std::vector<Mat> probs;
    // means[t][n]: A x 4 raw (pre-squash) means per candidate choice.
    std::vector<std::vector<Mat>> means;
    std::array<double, kContDims> sigma{};
};

// Parameterized policy: a discrete offloading head (softmax per MD over
// 1 + M*G choices) and a choice-conditioned continuous head emitting raw
// means for a tanh-squashed Gaussian over the box (1e-6*cap, cap], with
// learnable per-dimension log-std.
class PolicyNets {
public:
    PolicyNets(std::size_t obs_dim, const SystemParams& params, std::uint64_t init_seed);

    std::size_t obs_dim() const { return obs_dim_; }
    std::size_t num_md() const { return num_md_; }
    std::size_t num_choices() const { return num_choices_; }
    std::size_t param_count() const { return theta_.size(); }

    const Vec& theta() const { return theta_; }
    void set_theta(const Vec& t);

    // Per-MD discrete distributions at the current parameters.
    Mat discrete_probs(const Vec& obs) const;
    // Raw means for (md, choice).
    Vec cont_means(const Vec& obs, std::size_t md, std::size_t choice) const;
    double sigma(std::size_t dim) const;

    struct Sample {
        std::vector<std::size_t> choices;
        std::vector<std::array<double, kContDims>> cont;
        double logp = 0.0;
    };
    // a ~ categorical, c ~ squashed Gaussian given (s, a); deterministic mode
    // takes the mode of both distributions.
    Sample sample_action(const Vec& obs, Rng& rng, bool deterministic = false) const;

    ParamAction to_param_action(const Sample& s) const;

    // Joint log pi(a, c | s) of a recorded step; factorizes exactly as the
    // discrete log-prob plus the squash-corrected continuous log-prob.
    double log_prob(const SampledStep& step) const;
    double log_prob_discrete(const SampledStep& step) const;
    double log_prob_continuous(const SampledStep& step) const;
    // grad += coef * d log pi / d theta.
    void log_prob_grad(const SampledStep& step, double coef, Vec& grad) const;

    DistCache dist_cache(const Trajectory& traj) const;

    enum class KlWeighting { variance_reduced, exact };

    // Mean over states of KL(old || new) for the parameterized joint policy:
    // per-MD categorical KL plus weighted per-choice Gaussian KLs, with
    // weight -log pi_old (variance_reduced) or pi_old (exact).
    double kl(const DistCache& old_cache, const Trajectory& traj,
              KlWeighting weighting = KlWeighting::variance_reduced) const;
    Vec kl_grad(const DistCache& old_cache, const Trajectory& traj,
                KlWeighting weighting = KlWeighting::variance_reduced) const;

    double bound_lo(std::size_t md, std::size_t dim) const { return 1e-6 * caps_[md][dim]; }
    double bound_hi(std::size_t md, std::size_t dim) const { return caps_[md][dim]; }

    static constexpr double kLogStdMin = -5.0;
    static constexpr double kLogStdMax = 2.0;

private:
    Vec cont_input(const Vec& obs, std::size_t md, std::size_t choice) const;
    Mat cont_batch_input(const Vec& obs) const;

    std::size_t obs_dim_ = 0;
    std::size_t num_md_ = 0;
    std::size_t num_choices_ = 0;  // 1 + M*G
    Mlp discrete_net_;
    Mlp cont_net_;
    std::size_t discrete_offset_ = 0;
    std::size_t cont_offset_ = 0;
    std::size_t log_std_offset_ = 0;
    Vec theta_;
    std::vector<std::array<double, kContDims>> caps_;  // per MD: P_n, W, F_n, hash cap
};

// Elementwise scale applied to raw environment states before they reach the
// nets, so inputs sit near unit magnitude.
struct ObsScaler {
    Vec scale;

    Vec apply(const Vec& raw) const;
    static ObsScaler for_params(const SystemParams& params);
};

}  // namespace bflsim::drl
