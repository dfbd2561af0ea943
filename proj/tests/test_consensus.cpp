#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bflsim/consensus.hpp"
#include "bflsim/rng.hpp"
#include "oracles.hpp"

using namespace bflsim;
using namespace bflsim::consensus;

TEST_CASE("build_weights: complete graph M=3, d=0.2") {
    const auto cm = build_weights(Topology::complete(3), 0.2);
    for (std::size_t i = 0; i < 3; ++i) CHECK(cm.at(i, i) == doctest::Approx(0.6));
    CHECK(cm.at(0, 1) == doctest::Approx(0.2));
    CHECK(cm.at(1, 2) == doctest::Approx(0.2));
    CHECK(validate_weights(cm, Topology::complete(3)).all_ok());
}

TEST_CASE("build_weights: M=2 single edge, d=0.4") {
    const auto cm = build_weights(Topology::ring(2), 0.4);
    CHECK(cm.at(0, 0) == doctest::Approx(0.6));
    CHECK(cm.at(0, 1) == doctest::Approx(0.4));
    CHECK(cm.at(1, 0) == doctest::Approx(0.4));
    CHECK(cm.at(1, 1) == doctest::Approx(0.6));
}

TEST_CASE("build_weights: path 0-1-2 degree audit") {
    const auto cm = build_weights(Topology::path(3), 0.2);
    CHECK(cm.at(1, 1) == doctest::Approx(0.6));
    CHECK(cm.at(0, 0) == doctest::Approx(0.8));
    CHECK(cm.at(2, 2) == doctest::Approx(0.8));
    CHECK(cm.at(0, 2) == 0.0);
}

TEST_CASE("build_weights: rejects bad mixing and disconnected graphs") {
    CHECK_THROWS_AS((void)build_weights(Topology::complete(3), 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)build_weights(Topology::complete(3), 0.0), std::invalid_argument);
    Topology disconnected;
    disconnected.nodes = 3;
    disconnected.add_edge(0, 1);
    CHECK_THROWS_AS((void)build_weights(disconnected, 0.2), std::invalid_argument);
}

TEST_CASE("validate_weights: identity matrix fails the spectral check") {
    ConsensusMatrix cm;
    cm.nodes = 2;
    cm.weights = Mat(2, 2);
    cm.weights.at(0, 0) = 1.0;
    cm.weights.at(1, 1) = 1.0;
    const auto d = validate_weights(cm, Topology::ring(2));
    CHECK(d.symmetric);
    CHECK(d.row_stochastic);
    CHECK_FALSE(d.spectral_ok);
    CHECK(d.spectral_radius == doctest::Approx(1.0));
}

TEST_CASE("validate_weights: asymmetric perturbation flagged") {
    auto cm = build_weights(Topology::complete(3), 0.2);
    cm.weights.at(0, 1) += 1e-6;
    CHECK_FALSE(validate_weights(cm, Topology::complete(3)).symmetric);
}

TEST_CASE("spectral_gap matches the eigen-oracle") {
    // Lambda = 0.4 I + 0.2 * 11^T has deflated eigenvalues {0.4, 0.4}.
    const auto cm = build_weights(Topology::complete(3), 0.2);
    CHECK(spectral_gap(cm) == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(oracles::deflated_spectral_radius(cm.weights) == doctest::Approx(0.4).epsilon(1e-10));

    ConsensusMatrix avg;
    avg.nodes = 2;
    avg.weights = Mat(2, 2, 0.5);
    CHECK(spectral_gap(avg) == doctest::Approx(0.0).epsilon(1e-10));

    // Random valid matrices across topologies agree with the Jacobi oracle.
    for (std::size_t m : {2, 3, 4, 5, 6}) {
        for (const auto& topo : {Topology::ring(m), Topology::star(m), Topology::complete(m)}) {
            const double d = 0.9 / static_cast<double>(m);
            const auto w = build_weights(topo, d);
            CHECK(spectral_gap(w) ==
                  doctest::Approx(oracles::deflated_spectral_radius(w.weights)).epsilon(1e-8));
        }
    }
}

TEST_CASE("consensus_step: fixed point, hand product, mean preservation") {
    ConsensusMatrix avg;
    avg.nodes = 2;
    avg.weights = Mat(2, 2, 0.5);

    const std::vector<Vec> same = {{3.0, -1.0}, {3.0, -1.0}};
    const auto fixed = consensus_step(same, avg);
    CHECK(fixed[0][0] == doctest::Approx(3.0));
    CHECK(fixed[1][1] == doctest::Approx(-1.0));

    const std::vector<Vec> states = {{0.0}, {2.0}};
    const auto mixed = consensus_step(states, avg);
    CHECK(mixed[0][0] == doctest::Approx(1.0));
    CHECK(mixed[1][0] == doctest::Approx(1.0));

    const auto cm = build_weights(Topology::ring(5), 0.15);
    std::vector<Vec> rnd(5, Vec(3));
    Rng rng(8);
    for (auto& v : rnd)
        for (auto& x : v) x = rng.normal();
    Vec mean_before(3, 0.0), mean_after(3, 0.0);
    for (const auto& v : rnd) axpy(0.2, v, mean_before);
    auto next = consensus_step(rnd, cm);
    for (const auto& v : next) axpy(0.2, v, mean_after);
    for (int i = 0; i < 3; ++i)
        CHECK(mean_after[i] == doctest::Approx(mean_before[i]).epsilon(1e-12));

    CHECK_THROWS_AS((void)consensus_step({{1.0}}, cm), std::invalid_argument);
}

TEST_CASE("run_consensus: phi=0 identity, phi=1 averaging, appendix bound") {
    ConsensusMatrix avg;
    avg.nodes = 2;
    avg.weights = Mat(2, 2, 0.5);
    const std::vector<Vec> init = {{0.0}, {2.0}};

    const auto none = run_consensus(init, avg, 0);
    CHECK(none.states[0][0] == 0.0);
    CHECK(none.error[0][0] == doctest::Approx(-1.0));

    const auto one = run_consensus(init, avg, 1);
    CHECK(one.states[0][0] == doctest::Approx(1.0));
    CHECK(norm2(one.error[0]) == doctest::Approx(0.0));

    // ||c_m||^2 <= M * lambda^{2 phi} * Xi^2 on random instances, lambda from
    // the eigen-oracle.
    for (std::size_t m : {2, 3, 5}) {
        for (const auto& topo : {Topology::ring(m), Topology::star(m), Topology::complete(m)}) {
            const auto cm = build_weights(topo, 0.9 / static_cast<double>(m));
            const double lambda = oracles::deflated_spectral_radius(cm.weights);
            for (int inst = 0; inst < 20; ++inst) {
                Rng rng(1000 + inst);
                std::vector<Vec> grads(m, Vec(4));
                for (auto& g : grads)
                    for (auto& x : g) x = rng.normal();
                const double xi = gradient_divergence(grads);
                for (std::size_t phi : {1u, 3u, 7u}) {
                    const auto run = run_consensus(grads, cm, phi);
                    for (const auto& c : run.error)
                        CHECK(norm2_sq(c) <= static_cast<double>(m) *
                                                  std::pow(lambda, 2.0 * phi) * xi * xi +
                                              1e-12);
                }
            }
        }
    }
}

TEST_CASE("geometric decay of the consensus error") {
    for (std::size_t m : {2, 4, 6}) {
        const auto cm = build_weights(Topology::ring(m), 0.9 / static_cast<double>(m));
        const double lambda = spectral_gap(cm);
        Rng rng(55 + m);
        std::vector<Vec> grads(m, Vec(3));
        for (auto& g : grads)
            for (auto& x : g) x = rng.normal();

        Vec mean(3, 0.0);
        for (const auto& g : grads) axpy(1.0 / static_cast<double>(m), g, mean);
        double c0 = 0.0;
        for (const auto& g : grads) c0 += norm2_sq(sub(g, mean));
        c0 = std::sqrt(c0);

        double prev_worst = 1e300;
        for (std::size_t phi = 1; phi <= 12; ++phi) {
            const auto run = run_consensus(grads, cm, phi);
            double total = 0.0;
            double worst = 0.0;
            for (const auto& c : run.error) {
                total += norm2_sq(c);
                worst = std::max(worst, norm2(c));
            }
            CHECK(std::sqrt(total) <=
                  std::pow(lambda, phi) * c0 * std::sqrt(static_cast<double>(m)) + 1e-12);
            CHECK(worst <= prev_worst + 1e-12);
            prev_worst = worst;
        }
    }
}

TEST_CASE("gradient_divergence") {
    CHECK(gradient_divergence({{1.0, 2.0}, {1.0, 2.0}}) == 0.0);
    CHECK(gradient_divergence({{0.0, 0.0}, {3.0, 4.0}}) == doctest::Approx(5.0));

    Rng rng(6);
    std::vector<Vec> grads(4, Vec(3));
    for (auto& g : grads)
        for (auto& x : g) x = rng.normal();
    const double base = gradient_divergence(grads);
    Vec shift = {0.7, -0.3, 1.1};
    std::vector<Vec> shifted;
    for (const auto& g : grads) shifted.push_back(add(g, shift));
    CHECK(gradient_divergence(shifted) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("min_p2p_rounds") {
    CHECK(min_p2p_rounds(0.4, 0.64, 4, 1.0, 2) == 1);
    CHECK(min_p2p_rounds(0.4, 100.0, 4, 1.0, 2) == 0);
    CHECK_THROWS_AS((void)min_p2p_rounds(1.0, 0.5, 4, 1.0, 2), std::invalid_argument);

    // Halving lambda never increases the required rounds.
    for (double xi : {0.01, 0.1, 0.5}) {
        for (double lambda : {0.8, 0.4, 0.2, 0.1}) {
            const auto hi = min_p2p_rounds(lambda, xi, 16, 1.0, 3);
            const auto lo = min_p2p_rounds(lambda / 2.0, xi, 16, 1.0, 3);
            CHECK(lo <= hi);
        }
    }
}

TEST_CASE("topology file round trip and trace export") {
    auto topo = Topology::star(4);
    topo.save("topo_tmp.txt");
    const auto back = Topology::from_file("topo_tmp.txt");
    CHECK(back.nodes == 4);
    CHECK(back.edges == topo.edges);
    std::remove("topo_tmp.txt");

    const auto cm = build_weights(Topology::complete(3), 0.2);
    const auto run = run_consensus({{1.0}, {2.0}, {3.0}}, cm, 2);
    write_trace_csv(run, "trace_tmp.csv");
    std::ifstream in("trace_tmp.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "round,node,err_norm");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);
    std::remove("trace_tmp.csv");
}
