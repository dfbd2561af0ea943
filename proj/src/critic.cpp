#include "bflsim/critic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace bflsim::drl {

Critic Critic::make_linear(std::size_t feat_dim) {
    Critic c;
    c.mode_ = Mode::linear;
    c.params_.assign(feat_dim, 0.0);
    return c;
}

Critic Critic::make_mlp(std::size_t state_dim, std::uint64_t init_seed, std::size_t h1,
                        std::size_t h2) {
    Critic c;
    c.mode_ = Mode::mlp;
    c.net_ = Mlp({state_dim, h1, h2, 1});
    c.params_.assign(c.net_.param_count(), 0.0);
    Rng rng = Rng::stream(init_seed, 0, 0, "critic-init");
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < c.net_.sizes.size(); ++l) {
        const std::size_t in = c.net_.sizes[l];
        const std::size_t out = c.net_.sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < in * out; ++i) c.params_[off + i] = rng.uniform(-bound, bound);
        off += in * out + out;
    }
    return c;
}

void Critic::set_params(const Vec& p) {
    if (p.size() != params_.size()) throw std::invalid_argument("Critic::set_params: size mismatch");
    params_ = p;
}

double Critic::value(const Vec& x) const {
    if (mode_ == Mode::linear) return dot(params_, x);
    return net_.forward(params_.data(), x)[0];
}

Vec Critic::grad_value(const Vec& x) const {
    if (mode_ == Mode::linear) return x;
    Mlp::Cache cache;
    net_.forward(params_.data(), x, &cache);
    Vec grad(params_.size(), 0.0);
    net_.backward(params_.data(), cache, {1.0}, grad.data());
    return grad;
}

void Critic::td_update(double advantage, const Vec& x, double rate) {
    const Vec g = grad_value(x);
    axpy(rate * advantage, g, params_);
}

TabularBatch TabularBatch::from_transitions(
    const std::vector<std::tuple<std::size_t, double, std::size_t>>& transitions,
    const Mat& features) {
    const std::size_t s_count = features.rows;
    TabularBatch b;
    b.features = features;
    b.state_dist.assign(s_count, 0.0);
    b.mean_reward.assign(s_count, 0.0);
    b.transition = Mat(s_count, s_count, 0.0);
    Vec counts(s_count, 0.0);
    for (const auto& [s, r, sp] : transitions) {
        if (s >= s_count || sp >= s_count)
            throw std::invalid_argument("TabularBatch: state index out of range");
        counts[s] += 1.0;
        b.mean_reward[s] += r;
        b.transition.at(s, sp) += 1.0;
    }
    double total = 0.0;
    for (double c : counts) total += c;
    if (total == 0.0) throw std::invalid_argument("TabularBatch: no transitions");
    for (std::size_t s = 0; s < s_count; ++s) {
        b.state_dist[s] = counts[s] / total;
        if (counts[s] > 0.0) {
            b.mean_reward[s] /= counts[s];
            for (std::size_t sp = 0; sp < s_count; ++sp) b.transition.at(s, sp) /= counts[s];
        }
    }
    return b;
}

namespace {

// Residual r(omega) = (I - gamma P) Phi omega - rbar, and the H-weighted
// projection matrix state needed by both the loss and its gradient.
struct MspbeWork {
    Mat a;       // (I - gamma P) Phi, S x i
    Vec resid;   // A omega - rbar
    Vec proj;    // Pi resid in state space
    Mat gram;    // Phi^T H Phi
};

MspbeWork mspbe_work(const Vec& omega, const TabularBatch& batch, double gamma) {
    const std::size_t s_count = batch.features.rows;
    const std::size_t i_dim = batch.features.cols;
    if (omega.size() != i_dim) throw std::invalid_argument("mspbe: omega dimension mismatch");

    MspbeWork w;
    w.a = Mat(s_count, i_dim);
    for (std::size_t s = 0; s < s_count; ++s)
        for (std::size_t i = 0; i < i_dim; ++i) {
            double v = batch.features.at(s, i);
            for (std::size_t sp = 0; sp < s_count; ++sp)
                v -= gamma * batch.transition.at(s, sp) * batch.features.at(sp, i);
            w.a.at(s, i) = v;
        }
    w.resid = sub(matvec(w.a, omega), batch.mean_reward);

    // Gram = Phi^T H Phi; Pi x = Phi Gram^{-1} Phi^T H x.
    w.gram = Mat(i_dim, i_dim);
    for (std::size_t i = 0; i < i_dim; ++i)
        for (std::size_t j = 0; j < i_dim; ++j) {
            double v = 0.0;
            for (std::size_t s = 0; s < s_count; ++s)
                v += batch.features.at(s, i) * batch.state_dist[s] * batch.features.at(s, j);
            w.gram.at(i, j) = v;
        }

    Vec phth(i_dim, 0.0);
    for (std::size_t i = 0; i < i_dim; ++i)
        for (std::size_t s = 0; s < s_count; ++s)
            phth[i] += batch.features.at(s, i) * batch.state_dist[s] * w.resid[s];
    Vec coef;
    try {
        coef = solve_linear(w.gram, phth);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("mspbe: rank-deficient feature matrix");
    }
    w.proj = matvec(batch.features, coef);
    return w;
}

}  // namespace

double mspbe_loss(const Vec& omega, const TabularBatch& batch, double gamma) {
    const MspbeWork w = mspbe_work(omega, batch, gamma);
    double loss = 0.0;
    for (std::size_t s = 0; s < batch.features.rows; ++s)
        loss += batch.state_dist[s] * w.proj[s] * w.proj[s];
    return 0.5 * loss;
}

Vec mspbe_grad(const Vec& omega, const TabularBatch& batch, double gamma) {
    // E = 1/2 || Pi r ||^2_H with r linear in omega; Pi is H-self-adjoint and
    // idempotent, so dE/domega = A^T H Pi r.
    const MspbeWork w = mspbe_work(omega, batch, gamma);
    Vec grad(omega.size(), 0.0);
    for (std::size_t i = 0; i < omega.size(); ++i)
        for (std::size_t s = 0; s < batch.features.rows; ++s)
            grad[i] += w.a.at(s, i) * batch.state_dist[s] * w.proj[s];
    return grad;
}

double lipschitz_constant(double gamma, const Vec& feature_sq_norms) {
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("lipschitz_constant: gamma in [0, 1] required");
    double mx = 0.0;
    for (double v : feature_sq_norms) mx = std::max(mx, v);
    return (1.0 + gamma) * (1.0 + gamma) * mx;
}

}  // namespace bflsim::drl
