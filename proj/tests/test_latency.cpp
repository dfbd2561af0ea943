#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bflsim/latency.hpp"

using namespace bflsim::latency;

TEST_CASE("transmission_rate: log2 plug-in and monotonicity") {
    // p*h/sigma^2 = 3 with no interference -> b * log2(4) = 2e6.
    CHECK(transmission_rate(1e6, 3.0, 1.0, 1.0, 0.0) == doctest::Approx(2e6));
    CHECK(transmission_rate(1e6, 1.0, 0.0, 1.0, 0.0) == 0.0);

    double prev = 1e300;
    for (double interference : {0.0, 0.5, 1.0, 2.0, 8.0}) {
        const double r = transmission_rate(1e6, 2.0, 1.5, 1.0, interference);
        CHECK(r < prev);
        prev = r;
    }
    prev = 0.0;
    for (double b : {1e5, 1e6, 5e6}) {
        const double r = transmission_rate(b, 2.0, 1.5, 1.0, 0.3);
        CHECK(r > prev);
        prev = r;
    }
    prev = 0.0;
    for (double p : {0.1, 0.5, 2.0}) {
        const double r = transmission_rate(1e6, p, 1.5, 1.0, 0.3);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("offload latency and energy") {
    CHECK(offload_latency(4e6, 2e6) == doctest::Approx(2.0));
    CHECK(energy_offload(0.1, 2.0) == doctest::Approx(0.2));
    CHECK_THROWS_AS((void)offload_latency(4e6, 0.0), std::invalid_argument);
}

TEST_CASE("exec and local latency") {
    CHECK(exec_latency(1000.0, 1000.0, 0.5, 2.0, 1e6) == doctest::Approx(1.0));
    CHECK(exec_latency(1000.0, 0.0, 0.5, 2.0, 1e6) == 0.0);
    CHECK(exec_latency(1000.0, 1000.0, 0.5, 2.0, 2e6) == doctest::Approx(0.5));
    CHECK(local_latency(1000.0, 1000.0, 0.5, 2.0, 1e6) == doctest::Approx(1.0));
    // kappa = 5e-27, f = 1e9, C = 1e9 -> 5 J.
    CHECK(energy_local(5e-27, 1e9, 1e9) == doctest::Approx(5.0));
}

TEST_CASE("upload latency") {
    CHECK(upload_latency(4e4, 2e6) == doctest::Approx(0.02));
    CHECK(upload_latency(4e4, 1e12) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK_THROWS_AS((void)upload_latency(4e4, 0.0), std::invalid_argument);
}

TEST_CASE("consensus latency: max of per-ES sums") {
    CHECK(consensus_latency({{0.1, 0.2}, {0.05, 0.1}}) == doctest::Approx(0.3));
    CHECK(consensus_latency({{}, {}}) == 0.0);
    CHECK(consensus_round_time(4e4, {1e5, 2e5}) == doctest::Approx(0.4));
}

TEST_CASE("mining latency") {
    const auto out = mine_latency(50e9, 1000e9, 0.0, 4e4, 3, 10, 1.0 / 600.0, 10.0, 3.0, 60.0);
    CHECK(out.t_gen == doctest::Approx(0.05));
    CHECK(out.p_fork == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
    CHECK(out.t_mine == doctest::Approx(3.0 * out.t_gen));

    const auto zero_tx = mine_latency(50e9, 1000e9, 0.0, 4e4, 3, 10, 1.0 / 600.0, 0.0, 3.0, 60.0);
    CHECK(zero_tx.p_fork == 0.0);

    // T_gen halves when the hash rate doubles; linear in the hash work.
    const auto a = mine_latency(50e9, 500e9, 1e-7, 4e4, 3, 10, 1.0 / 600.0, 5.0, 3.0, 60.0);
    const auto b = mine_latency(50e9, 1000e9, 1e-7, 4e4, 3, 10, 1.0 / 600.0, 5.0, 3.0, 60.0);
    CHECK(a.t_gen == doctest::Approx(2.0 * b.t_gen));
    const auto c = mine_latency(100e9, 500e9, 1e-7, 4e4, 3, 10, 1.0 / 600.0, 5.0, 3.0, 60.0);
    CHECK(c.t_gen == doctest::Approx(2.0 * a.t_gen));

    // P_fork stays in [0, 1) and grows with the transaction count.
    double prev = -1.0;
    for (double s : {0.0, 1.0, 5.0, 20.0, 50.0}) {
        const auto o = mine_latency(50e9, 1e12, 1e-7, 4e4, 3, 10, 1.0 / 600.0, s, 3.0, 60.0);
        CHECK(o.p_fork >= 0.0);
        CHECK(o.p_fork < 1.0);
        CHECK(o.p_fork >= prev);
        prev = o.p_fork;
    }

    CHECK(energy_mine(5e-8, 50e9) == doctest::Approx(2500.0));
    CHECK_THROWS_AS((void)mine_latency(50e9, 0.0, 0.0, 4e4, 3, 10, 1.0 / 600.0, 1.0, 3.0, 60.0),
                    std::invalid_argument);
}

TEST_CASE("total objective") {
    Breakdown round1;
    round1.t_learn = 1.0;
    round1.t_cons = 0.3;
    round1.t_mine = 0.15;
    CHECK(round1.objective() == doctest::Approx(1.45));
    Breakdown round2;
    round2.t_learn = 2.0;
    round2.t_cons = 0.35;
    round2.t_mine = 0.2;
    CHECK(total_objective({round1, round2}) == doctest::Approx(2.0));
    CHECK(total_objective({}) == 0.0);
    CHECK(total_objective({Breakdown{}}) == 0.0);
}
