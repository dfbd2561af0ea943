#pragma once

#include <functional>

#include "bflsim/policy.hpp"
#include "bflsim/vec.hpp"

namespace bflsim::drl {

struct TrpoConfig {
    double eps_kl = 0.01;
    std::size_t cg_iters = 10;
    double cg_tol = 1e-10;
    double damping = 0.1;       // added to the curvature operator
    double hvp_eps = 1e-5;      // central-difference perturbation
    double backtrack_factor = 0.5;
    std::size_t max_backtracks = 10;
    double actor_rate = 0.003;  // lower cutoff of the backtracking coefficient
    double critic_rate = 0.02;

    void validate() const;
};

// A = r + gamma * V(s') - V(s); terminal transitions carry V(s') = 0.
double advantage(double r, double gamma, double v_s, double v_next);

struct SurrogateResult {
    double value = 0.0;
    bool clamped = false;  // a probability ratio exponent hit +-20
};

// Mean over the trajectory of exp(logpi_new - logpi_old) * A, the ratio
// exponent clamped to +-20.
SurrogateResult surrogate_objective(const PolicyNets& nets_new, const Trajectory& traj);

using GradFn = std::function<Vec(const Vec&)>;
using HvpFn = std::function<Vec(const Vec&)>;

// Central finite difference of grad_fn around theta plus damping:
// (g(theta + eps v) - g(theta - eps v)) / (2 eps) + damping * v.
Vec hvp(const GradFn& grad_fn, const Vec& theta, const Vec& v, double eps, double damping);

// Standard CG for the SPD system H nu = g; returns the best iterate when the
// iteration budget runs out.
Vec conjugate_gradient(const HvpFn& hvp_fn, const Vec& g, std::size_t iters, double tol);

struct LineSearchResult {
    Vec theta;
    bool accepted = false;
    std::size_t backtracks = 0;
    double kl = 0.0;
    double surrogate = 0.0;
};

// Candidate steps theta + 0.5^j * sqrt(2 eps_kl / (nu^T H nu)) * nu; the
// first one that improves the surrogate while keeping KL(old||new) within
// eps_kl wins.  Exhaustion (or the coefficient dropping below actor_rate)
// returns the unchanged parameters.
LineSearchResult line_search_update(PolicyNets& nets, const Vec& direction, const HvpFn& hvp_fn,
                                    const Trajectory& traj, const DistCache& old_cache,
                                    const TrpoConfig& cfg);

}  // namespace bflsim::drl
