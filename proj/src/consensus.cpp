#include "bflsim/consensus.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "bflsim/rng.hpp"

namespace bflsim::consensus {

void Topology::add_edge(std::size_t u, std::size_t v) {
    if (u == v) throw std::invalid_argument("Topology: self-loops not allowed");
    if (u >= nodes || v >= nodes) throw std::invalid_argument("Topology: node index out of range");
    if (u > v) std::swap(u, v);
    edges.insert({u, v});
}

std::size_t Topology::degree(std::size_t m) const {
    std::size_t d = 0;
    for (const auto& [u, v] : edges)
        if (u == m || v == m) ++d;
    return d;
}

std::vector<std::size_t> Topology::neighbors(std::size_t m) const {
    std::vector<std::size_t> out;
    for (const auto& [u, v] : edges) {
        if (u == m) out.push_back(v);
        if (v == m) out.push_back(u);
    }
    return out;
}

bool Topology::connected() const {
    if (nodes == 0) return false;
    if (nodes == 1) return true;
    std::vector<bool> seen(nodes, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t m = q.front();
        q.pop();
        for (std::size_t n : neighbors(m)) {
            if (!seen[n]) {
                seen[n] = true;
                ++count;
                q.push(n);
            }
        }
    }
    return count == nodes;
}

Topology Topology::ring(std::size_t m) {
    Topology t;
    t.nodes = m;
    if (m == 2) {
        t.add_edge(0, 1);
        return t;
    }
    for (std::size_t i = 0; i < m; ++i) t.add_edge(i, (i + 1) % m);
    return t;
}

Topology Topology::star(std::size_t m) {
    Topology t;
    t.nodes = m;
    for (std::size_t i = 1; i < m; ++i) t.add_edge(0, i);
    return t;
}

Topology Topology::complete(std::size_t m) {
    Topology t;
    t.nodes = m;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) t.add_edge(i, j);
    return t;
}

Topology Topology::path(std::size_t m) {
    Topology t;
    t.nodes = m;
    for (std::size_t i = 0; i + 1 < m; ++i) t.add_edge(i, i + 1);
    return t;
}

Topology Topology::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Topology::from_file: cannot open " + path);
    Topology t;
    if (!(in >> t.nodes)) throw std::runtime_error("Topology::from_file: missing node count header");
    std::size_t u, v;
    while (in >> u >> v) t.add_edge(u, v);
    return t;
}

void Topology::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Topology::save: cannot open " + path);
    out << nodes << '\n';
    for (const auto& [u, v] : edges) out << u << ' ' << v << '\n';
}

ConsensusMatrix build_weights(const Topology& topo, double mixing) {
    const std::size_t m = topo.nodes;
    if (m == 0) throw std::invalid_argument("build_weights: empty topology");
    if (!(mixing > 0.0) || !(mixing < 1.0 / static_cast<double>(m)))
        throw std::invalid_argument("build_weights: mixing parameter must be in (0, 1/M)");
    if (!topo.connected()) throw std::invalid_argument("build_weights: topology must be connected");

    ConsensusMatrix cm;
    cm.nodes = m;
    cm.mixing = mixing;
    cm.weights = Mat(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        cm.weights.at(i, i) = 1.0 - mixing * static_cast<double>(topo.degree(i));
    for (const auto& [u, v] : topo.edges) {
        cm.weights.at(u, v) = mixing;
        cm.weights.at(v, u) = mixing;
    }
    return cm;
}

double spectral_gap(const ConsensusMatrix& cm) {
    const std::size_t m = cm.nodes;
    if (cm.weights.rows != m || cm.weights.cols != m)
        throw std::invalid_argument("spectral_gap: matrix shape mismatch");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (std::fabs(cm.at(i, j) - cm.at(j, i)) > 1e-9)
                throw std::invalid_argument("spectral_gap: matrix must be symmetric");

    // Deflated matrix B = Lambda - 11^T / M.
    Mat b(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            b.at(i, j) = cm.at(i, j) - 1.0 / static_cast<double>(m);

    // Power iteration for the largest |eigenvalue| of the symmetric B.
    Rng rng(0x5bd1e995u);
    Vec v(m);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    double nrm = norm2(v);
    if (nrm == 0.0) v[0] = 1.0, nrm = 1.0;
    scale_inplace(v, 1.0 / nrm);

    double rho = 0.0;
    const double tol = 1e-10;
    const std::size_t max_iter = 100000;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vec bv = matvec(b, v);
        const double next = norm2(bv);
        if (next < 1e-300) return 0.0;  // B annihilates the start vector
        scale_inplace(bv, 1.0 / next);
        const double delta = std::fabs(next - rho);
        rho = next;
        v = std::move(bv);
        if (delta < tol * std::max(1.0, rho) && it > 2) return rho;
    }
    throw std::runtime_error("spectral_gap: power iteration did not converge");
}

WeightDiagnostics validate_weights(const ConsensusMatrix& cm, const Topology& topo, double tol) {
    const std::size_t m = cm.nodes;
    if (cm.weights.rows != m || cm.weights.cols != m)
        throw std::invalid_argument("validate_weights: square matrix of size M required");
    WeightDiagnostics d;

    d.symmetric = true;
    for (std::size_t i = 0; i < m && d.symmetric; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (std::fabs(cm.at(i, j) - cm.at(j, i)) > tol) {
                d.symmetric = false;
                break;
            }

    d.row_stochastic = true;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += cm.at(i, j);
        if (std::fabs(s - 1.0) > tol) {
            d.row_stochastic = false;
            break;
        }
    }

    d.sparsity_ok = true;
    for (std::size_t i = 0; i < m && d.sparsity_ok; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const bool edge = topo.edges.count({std::min(i, j), std::max(i, j)}) > 0;
            if (!edge && std::fabs(cm.at(i, j)) > tol) {
                d.sparsity_ok = false;
                break;
            }
        }

    if (d.symmetric) {
        d.spectral_radius = spectral_gap(cm);
        d.spectral_ok = d.spectral_radius < 1.0 - 1e-12;
    }
    return d;
}

std::vector<Vec> consensus_step(const std::vector<Vec>& states, const ConsensusMatrix& cm) {
    const std::size_t m = cm.nodes;
    if (states.size() != m) throw std::invalid_argument("consensus_step: state count != M");
    const std::size_t dim = states.empty() ? 0 : states.front().size();
    for (const auto& s : states)
        if (s.size() != dim) throw std::invalid_argument("consensus_step: gradient dimension mismatch");

    std::vector<Vec> next(m, Vec(dim, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double w = cm.at(i, j);
            if (w == 0.0) continue;
            axpy(w, states[j], next[i]);
        }
    return next;
}

ConsensusRun run_consensus(const std::vector<Vec>& initial, const ConsensusMatrix& cm,
                           std::size_t rounds) {
    ConsensusRun run;
    run.rounds = rounds;
    run.states = initial;

    Vec mean(initial.empty() ? 0 : initial.front().size(), 0.0);
    for (const auto& s : initial) axpy(1.0 / static_cast<double>(initial.size()), s, mean);

    run.per_round_err.reserve(rounds);
    for (std::size_t l = 0; l < rounds; ++l) {
        run.states = consensus_step(run.states, cm);
        Vec errs(cm.nodes);
        for (std::size_t i = 0; i < cm.nodes; ++i) errs[i] = norm2(sub(run.states[i], mean));
        run.per_round_err.push_back(std::move(errs));
    }
    run.error.reserve(cm.nodes);
    for (std::size_t i = 0; i < cm.nodes; ++i) run.error.push_back(sub(run.states[i], mean));
    return run;
}

double gradient_divergence(const std::vector<Vec>& grads) {
    if (grads.empty()) throw std::invalid_argument("gradient_divergence: M >= 1 required");
    double mx = 0.0;
    for (std::size_t i = 0; i < grads.size(); ++i)
        for (std::size_t j = i + 1; j < grads.size(); ++j)
            mx = std::max(mx, norm2(sub(grads[i], grads[j])));
    return mx;
}

std::size_t min_p2p_rounds(double lambda, double xi_cons, std::size_t total_rounds,
                           double divergence, std::size_t num_nodes) {
    if (!(lambda > 0.0) || lambda >= 1.0)
        throw std::invalid_argument("min_p2p_rounds: lambda in (0, 1) required");
    if (!(xi_cons > 0.0)) throw std::invalid_argument("min_p2p_rounds: xi_cons > 0 required");
    if (!(divergence > 0.0)) throw std::invalid_argument("min_p2p_rounds: divergence > 0 required");
    const double ratio = xi_cons / (std::sqrt(static_cast<double>(total_rounds)) *
                                     divergence * divergence * static_cast<double>(num_nodes));
    if (ratio >= 1.0) return 0;  // positive-part clamp
    const double phi = 0.5 * (std::log(ratio) / std::log(lambda));
    return static_cast<std::size_t>(std::ceil(phi - 1e-12));
}

void write_trace_csv(const ConsensusRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << "round,node,err_norm\n";
    out.precision(17);
    for (std::size_t l = 0; l < run.per_round_err.size(); ++l)
        for (std::size_t m = 0; m < run.per_round_err[l].size(); ++m)
            out << l + 1 << ',' << m << ',' << run.per_round_err[l][m] << '\n';
}

}  // namespace bflsim::consensus
