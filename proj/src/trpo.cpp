#include "bflsim/trpo.hpp"

#include <cmath>
#include <stdexcept>

namespace bflsim::drl {

void TrpoConfig::validate() const {
    if (!(eps_kl > 0.0) || !(cg_tol > 0.0) || !(damping > 0.0) || !(hvp_eps > 0.0) ||
        !(backtrack_factor > 0.0) || backtrack_factor >= 1.0 || cg_iters == 0 ||
        !(actor_rate > 0.0) || !(critic_rate > 0.0))
        throw std::invalid_argument("TrpoConfig: all fields must be positive (backtrack < 1)");
}

double advantage(double r, double gamma, double v_s, double v_next) {
    if (!std::isfinite(r) || !std::isfinite(v_s) || !std::isfinite(v_next))
        throw std::invalid_argument("advantage: non-finite input");
    return r + gamma * v_next - v_s;
}

SurrogateResult surrogate_objective(const PolicyNets& nets_new, const Trajectory& traj) {
    if (traj.empty()) return {};
    SurrogateResult res;
    for (const auto& step : traj) {
        double logratio = nets_new.log_prob(step) - step.logp_old;
        if (logratio > 20.0 || logratio < -20.0) {
            logratio = logratio > 20.0 ? 20.0 : -20.0;
            res.clamped = true;
        }
        res.value += std::exp(logratio) * step.advantage;
    }
    res.value /= static_cast<double>(traj.size());
    return res;
}

Vec hvp(const GradFn& grad_fn, const Vec& theta, const Vec& v, double eps, double damping) {
    if (norm2(v) == 0.0) return Vec(v.size(), 0.0);
    Vec plus = theta;
    Vec minus = theta;
    axpy(eps, v, plus);
    axpy(-eps, v, minus);
    const Vec gp = grad_fn(plus);
    const Vec gm = grad_fn(minus);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = (gp[i] - gm[i]) / (2.0 * eps) + damping * v[i];
    return out;
}

Vec conjugate_gradient(const HvpFn& hvp_fn, const Vec& g, std::size_t iters, double tol) {
    Vec x(g.size(), 0.0);
    if (norm2(g) == 0.0) return x;
    Vec r = g;  // residual g - H x with x = 0
    Vec p = g;
    double rs = dot(r, r);
    const double target = tol * norm2(g);
    for (std::size_t it = 0; it < iters; ++it) {
        const Vec hp = hvp_fn(p);
        const double phP = dot(p, hp);
        if (phP <= 0.0) break;  // lost positive definiteness, keep best iterate
        const double alpha = rs / phP;
        axpy(alpha, p, x);
        axpy(-alpha, hp, r);
        const double rs_next = dot(r, r);
        if (std::sqrt(rs_next) <= target) break;
        const double beta = rs_next / rs;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rs = rs_next;
    }
    return x;
}

LineSearchResult line_search_update(PolicyNets& nets, const Vec& direction, const HvpFn& hvp_fn,
                                    const Trajectory& traj, const DistCache& old_cache,
                                    const TrpoConfig& cfg) {
    LineSearchResult res;
    res.theta = nets.theta();
    if (norm2(direction) == 0.0) return res;

    const Vec hv = hvp_fn(direction);
    const double quad = dot(direction, hv);  // nu^T H nu
    if (!(quad > 0.0)) return res;
    const double base_scale = std::sqrt(2.0 * cfg.eps_kl / quad);

    const Vec theta_old = nets.theta();
    const double surr_old = surrogate_objective(nets, traj).value;

    double coef = 1.0;
    for (std::size_t j = 0; j < cfg.max_backtracks && coef >= cfg.actor_rate;
         ++j, coef *= cfg.backtrack_factor) {
        Vec candidate = theta_old;
        axpy(coef * base_scale, direction, candidate);
        nets.set_theta(candidate);
        const double surr = surrogate_objective(nets, traj).value;
        const double kl = nets.kl(old_cache, traj);
        if (surr > surr_old && kl <= cfg.eps_kl) {
            res.theta = candidate;
            res.accepted = true;
            res.backtracks = j;
            res.kl = kl;
            res.surrogate = surr;
            return res;
        }
    }
    nets.set_theta(theta_old);
    return res;
}

}  // namespace bflsim::drl
