#pragma once

#include <cstdint>
#include <vector>

#include "bflsim/policy.hpp"
#include "bflsim/vec.hpp"

namespace bflsim::drl {

// State-value approximator.  The MLP mode (hidden 200 -> 100) is the training
// default; the linear mode over an explicit feature map is kept because the
// projected-Bellman-error loss and its Lipschitz constant are only defined
// there.
class Critic {
public:
    enum class Mode { linear, mlp };

    static Critic make_linear(std::size_t feat_dim);
    static Critic make_mlp(std::size_t state_dim, std::uint64_t init_seed,
                           std::size_t h1 = 200, std::size_t h2 = 100);

    Mode mode() const { return mode_; }
    const Vec& params() const { return params_; }
    void set_params(const Vec& p);

    double value(const Vec& feat_or_state) const;
    Vec grad_value(const Vec& feat_or_state) const;

    // omega <- omega + rate * advantage * grad V(s).
    void td_update(double advantage, const Vec& feat_or_state, double rate);

private:
    Mode mode_ = Mode::linear;
    Vec params_;
    Mlp net_;
};

// Empirical MDP statistics over a finite probe state set, accumulated from
// observed (state, reward, next_state) transitions.
struct TabularBatch {
    Mat features;    // S x i feature matrix (row s = feat(s))
    Vec state_dist;  // empirical d(s)
    Vec mean_reward; // rbar(s)
    Mat transition;  // P(s'|s)

    static TabularBatch from_transitions(
        const std::vector<std::tuple<std::size_t, double, std::size_t>>& transitions,
        const Mat& features);
};

// 1/2 || Pi (V_omega - B V_omega) ||^2_H  with the H-orthogonal projector
// Pi onto span(features); throws when the feature Gram matrix is singular.
double mspbe_loss(const Vec& omega, const TabularBatch& batch, double gamma);

Vec mspbe_grad(const Vec& omega, const TabularBatch& batch, double gamma);

// Lemma bound: the MSPBE gradient is l-Lipschitz with
// l = (1 + gamma)^2 * max_s ||feat(s)||^2.
double lipschitz_constant(double gamma, const Vec& feature_sq_norms);

}  // namespace bflsim::drl
