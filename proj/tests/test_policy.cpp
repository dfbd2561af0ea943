#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bflsim/policy.hpp"
#include "oracles.hpp"

using namespace bflsim;
using namespace bflsim::drl;

namespace {

SystemParams tiny_params() {
    SystemParams p;
    p.num_md = 2;
    p.num_es = 1;
    p.channels = 2;
    p.seed = 5;
    p.finalize();
    return p;
}

Vec random_obs(std::size_t dim, Rng& rng) {
    Vec obs(dim);
    for (auto& v : obs) v = rng.uniform(-1.0, 1.0);
    return obs;
}

SampledStep sample_step(const PolicyNets& nets, const Vec& obs, Rng& rng) {
    const auto s = nets.sample_action(obs, rng);
    SampledStep step;
    step.obs = obs;
    step.choices = s.choices;
    step.cont = s.cont;
    step.logp_old = s.logp;
    return step;
}

}  // namespace

TEST_CASE("mlp forward/backward against finite differences") {
    Mlp net({3, 5, 2});
    Rng rng(9);
    Vec theta(net.param_count());
    for (auto& v : theta) v = 0.4 * rng.normal();
    const Vec x = {0.3, -0.7, 1.1};
    const Vec w = {1.7, -0.4};  // scalar probe: w . output

    auto f = [&](const Vec& th) {
        const Vec out = net.forward(th.data(), x);
        return w[0] * out[0] + w[1] * out[1];
    };
    Vec analytic(theta.size(), 0.0);
    Mlp::Cache cache;
    net.forward(theta.data(), x, &cache);
    net.backward(theta.data(), cache, w, analytic.data());
    const Vec fd = oracles::fd_gradient(f, theta, 1e-6);
    CHECK(oracles::max_rel_error(analytic, fd) < 1e-5);
}

TEST_CASE("discrete probs: softmax normalization") {
    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng rng(1);
    const Vec obs = random_obs(6, rng);
    const Mat probs = nets.discrete_probs(obs);
    for (std::size_t n = 0; n < p.num_md; ++n) {
        double sum = 0.0;
        for (std::size_t a = 0; a < nets.num_choices(); ++a) {
            CHECK(probs.at(n, a) > 0.0);
            sum += probs.at(n, a);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sample_action: deterministic mode hits the squashed mean exactly") {
    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng rng(2);
    const Vec obs = random_obs(6, rng);
    const auto s = nets.sample_action(obs, rng, true);
    for (std::size_t n = 0; n < p.num_md; ++n) {
        const Vec means = nets.cont_means(obs, n, s.choices[n]);
        auto expect = [&](std::size_t dim) {
            const double lo = nets.bound_lo(n, dim);
            const double hi = nets.bound_hi(n, dim);
            const double want = lo + (hi - lo) * 0.5 * (std::tanh(means[dim]) + 1.0);
            CHECK(s.cont[n][dim] == doctest::Approx(want).epsilon(1e-12));
        };
        if (s.choices[n] == 0)
            for (auto dim : local_dims()) expect(dim);
        else
            for (auto dim : offload_dims()) expect(dim);
    }
}

TEST_CASE("sample_action: same seed, same action; concentrated policy returns its mode") {
    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng r1 = Rng::stream(7, 0, 0, "t");
    Rng r2 = Rng::stream(7, 0, 0, "t");
    Rng orng(3);
    const Vec obs = random_obs(6, orng);
    const auto a = nets.sample_action(obs, r1);
    const auto b = nets.sample_action(obs, r2);
    CHECK(a.choices == b.choices);
    CHECK(a.cont == b.cont);
    CHECK(a.logp == b.logp);

    // Push one discrete logit to near-certainty by biasing the output layer.
    Vec theta = nets.theta();
    // Locate the last-layer bias of the discrete head: final num_md * A biases.
    const std::size_t n_out = p.num_md * nets.num_choices();
    // Discrete head layout: [in*64 + 64] + [64*32 + 32] + [32*n_out + n_out].
    const std::size_t bias_start = (6 * 64 + 64) + (64 * 32 + 32) + 32 * n_out;
    theta[bias_start + 1] = 60.0;  // md0 choice 1
    nets.set_theta(theta);
    for (int i = 0; i < 20; ++i) {
        Rng rr(100 + i);
        CHECK(nets.sample_action(obs, rr).choices[0] == 1);
    }
}

TEST_CASE("joint log-probability factorizes exactly") {
    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng rng(4);
    for (int it = 0; it < 10; ++it) {
        const Vec obs = random_obs(6, rng);
        const auto step = sample_step(nets, obs, rng);
        CHECK(nets.log_prob(step) ==
              doctest::Approx(nets.log_prob_discrete(step) + nets.log_prob_continuous(step))
                  .epsilon(1e-15));
        // log_prob of the sampled action equals the sampling-time logp.
        CHECK(nets.log_prob(step) == doctest::Approx(step.logp_old).epsilon(1e-9));
    }
}

TEST_CASE("log-prob gradients match finite differences") {
    const auto p = tiny_params();
    PolicyNets base(6, p, 3);
    Rng rng(6);
    for (int probe = 0; probe < 6; ++probe) {
        const Vec obs = random_obs(6, rng);
        const auto step = sample_step(base, obs, rng);
        PolicyNets nets = base;
        Vec analytic(nets.param_count(), 0.0);
        nets.log_prob_grad(step, 1.0, analytic);

        auto f = [&](const Vec& th) {
            PolicyNets probe_nets = base;
            probe_nets.set_theta(th);
            return probe_nets.log_prob(step);
        };
        const Vec fd = oracles::fd_gradient(f, nets.theta(), 1e-5);
        CHECK(oracles::max_rel_error(analytic, fd) < 1e-4);
    }
}

TEST_CASE("kl helpers: analytic values") {
    CHECK(categorical_kl({0.5, 0.5}, {0.25, 0.75}) ==
          doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-12));
    CHECK(categorical_kl({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(0.0));
    CHECK(gaussian_kl(0.0, 1.0, 0.0, 2.0) ==
          doctest::Approx(std::log(2.0) + 1.0 / 8.0 - 0.5).epsilon(1e-12));
    CHECK(gaussian_kl(1.3, 0.7, 1.3, 0.7) == doctest::Approx(0.0));
}

TEST_CASE("parameterized kl: zero at equal parameters, positive otherwise") {
    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng rng(8);
    Trajectory traj;
    for (int t = 0; t < 3; ++t) traj.push_back(sample_step(nets, random_obs(6, rng), rng));
    const DistCache cache = nets.dist_cache(traj);

    CHECK(nets.kl(cache, traj) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(nets.kl(cache, traj, PolicyNets::KlWeighting::exact) ==
          doctest::Approx(0.0).epsilon(1e-12));

    Vec theta = nets.theta();
    Rng prng(77);
    for (auto& v : theta) v += 0.05 * prng.normal();
    nets.set_theta(theta);
    CHECK(nets.kl(cache, traj) > 0.0);
    CHECK(nets.kl(cache, traj, PolicyNets::KlWeighting::exact) > 0.0);
}

TEST_CASE("kl gradient matches finite differences (both weightings)") {
    const auto p = tiny_params();
    PolicyNets base(6, p, 3);
    Rng rng(10);
    Trajectory traj;
    for (int t = 0; t < 2; ++t) traj.push_back(sample_step(base, random_obs(6, rng), rng));
    const DistCache cache = base.dist_cache(traj);

    // Perturb so the KL is strictly positive at the probe point.
    PolicyNets nets = base;
    Vec theta = nets.theta();
    Rng prng(13);
    for (auto& v : theta) v += 0.03 * prng.normal();
    nets.set_theta(theta);

    for (auto weighting :
         {PolicyNets::KlWeighting::variance_reduced, PolicyNets::KlWeighting::exact}) {
        const Vec analytic = nets.kl_grad(cache, traj, weighting);
        auto f = [&](const Vec& th) {
            PolicyNets probe = base;
            probe.set_theta(th);
            return probe.kl(cache, traj, weighting);
        };
        const Vec fd = oracles::fd_gradient(f, theta, 1e-5);
        CHECK(oracles::max_rel_error(analytic, fd) < 1e-4);
    }
}
