#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bflsim/vec.hpp"

namespace bflsim::consensus {

// Undirected P2P graph among the edge servers.
struct Topology {
    std::size_t nodes = 0;
    std::set<std::pair<std::size_t, std::size_t>> edges;  // stored with first < second

    void add_edge(std::size_t u, std::size_t v);
    std::size_t degree(std::size_t m) const;
    std::vector<std::size_t> neighbors(std::size_t m) const;
    bool connected() const;

    static Topology ring(std::size_t m);
    static Topology star(std::size_t m);
    static Topology complete(std::size_t m);
    static Topology path(std::size_t m);
    // File format: first line "M", then one "u v" per edge.
    static Topology from_file(const std::string& path);
    void save(const std::string& path) const;
};

struct ConsensusMatrix {
    std::size_t nodes = 0;
    double mixing = 0.0;  // the d used to build it, 0 if hand-made
    Mat weights;

    double at(std::size_t r, std::size_t c) const { return weights.at(r, c); }
};

struct WeightDiagnostics {
    bool symmetric = false;
    bool row_stochastic = false;
    bool sparsity_ok = false;  // zeros exactly where the topology has no edge
    bool spectral_ok = false;  // deflated spectral radius < 1
    double spectral_radius = 0.0;

    bool all_ok() const { return symmetric && row_stochastic && sparsity_ok && spectral_ok; }
};

struct ConsensusRun {
    std::vector<Vec> states;
    std::size_t rounds = 0;
    std::vector<Vec> error;          // c_m = final_m - mean(initial)
    std::vector<Vec> per_round_err;  // [round][node] = ||x_m - mean(initial)||
};

// lambda_{m,m} = 1 - d*deg(m), lambda_{m,m'} = d on edges; requires a
// connected topology and 0 < d < 1/M.
ConsensusMatrix build_weights(const Topology& topo, double mixing);

WeightDiagnostics validate_weights(const ConsensusMatrix& cm, const Topology& topo,
                                   double tol = 1e-12);

// Spectral radius of (Lambda - 11^T/M) by power iteration, tolerance 1e-10.
double spectral_gap(const ConsensusMatrix& cm);

// One synchronous averaging round x' = Lambda x, written to a fresh buffer.
std::vector<Vec> consensus_step(const std::vector<Vec>& states, const ConsensusMatrix& cm);

ConsensusRun run_consensus(const std::vector<Vec>& initial, const ConsensusMatrix& cm,
                           std::size_t rounds);

// Max pairwise Euclidean distance among the gradients (the divergence Xi).
double gradient_divergence(const std::vector<Vec>& grads);

// Smallest integer number of P2P rounds satisfying
// phi >= 1/2 * [log_lambda(xi / (sqrt(K) * Xi^2 * M))]^+ .
std::size_t min_p2p_rounds(double lambda, double xi_cons, std::size_t total_rounds,
                           double divergence, std::size_t num_nodes);

// Trace export: one "round,node,err_norm" row per (round, node).
void write_trace_csv(const ConsensusRun& run, const std::string& path);

}  // namespace bflsim::consensus
