#pragma once

#include <cstdint>
#include <vector>

#include "bflsim/vec.hpp"

namespace bflsim {

// Physical-layer, compute, and mining parameters shared by the latency
// evaluation, the MDP environment, and the round orchestrator.  All values
// are SI (Hz, W, bits, cycles, J); unit conversion happens once at config
// parse time.
struct SystemParams {
    std::size_t num_md = 0;    // N
    std::size_t num_es = 0;    // M
    std::size_t channels = 0;  // G sub-channels per ES

    // Channel
    double max_bandwidth_hz = 20e6;  // W
    double noise_w = 1e-13;          // sigma^2 (-100 dBm)
    double wired_rate_bps = 1e8;     // ES<->ES consensus links
    double upload_bandwidth_hz = 0;  // default W/G, set by finalize()
    // Log-distance pathloss: gain = gain_ref * (ref_distance/d)^pathloss_exp
    // times a unit-mean exponential fade resampled per step from the seeded
    // stream.
    double gain_ref = 1e-3;
    double pathloss_exp = 3.0;
    double cell_radius_m = 200.0;
    double ref_distance_m = 1.0;

    // Compute
    std::vector<double> md_max_cpu_hz;        // F_n caps
    double es_cpu_hz = 5e9;                   // f_m
    std::vector<double> md_cycles_per_point;  // C_n
    double es_cycles_per_point = 0.9e9;       // C_m
    double kappa = 5e-27;                     // chip energy coefficient

    // Data / model
    std::vector<double> md_data_points;  // D_n, per-MD dataset size in samples
    double bits_per_point = 8e3;         // transmission size of one sample
    double model_bits = 4e4;             // vartheta_size, 5 KB

    // Training shape (enters the latency formulas)
    double md_epochs = 2.0;     // e_n
    double es_epochs = 2.0;     // e_m
    double batch_ratio = 1.0;   // rho

    // Consensus
    std::size_t consensus_phi = 5;

    // Power / energy
    std::vector<double> md_max_power_w;       // P_n caps
    std::vector<double> md_energy_budget_j;   // E_n^max

    // Mining
    double hash_work = 50e9;         // hbar, hash per block
    double hash_cap = 1000e9;        // per-MD hash rate cap
    double verify_coeff = 5e-7;      // xi_ver, s per (bit * verifier)
    double fork_rate = 1.0 / 600.0;  // iota
    double fork_occurrences = 3.0;   // zeta_fork
    double joules_per_hash = 5e-8;
    double tx_count = 10.0;          // s_n
    double block_size_slope = 60.0;  // c_blk in phi(s) = c_blk * s

    std::uint64_t seed = 1;

    std::size_t md_parent_es(std::size_t n) const { return n % num_es; }
    std::size_t discrete_actions() const { return 1 + num_es * channels; }
    double md_data_bits(std::size_t n) const { return md_data_points[n] * bits_per_point; }

    // Fill per-MD vectors that were left empty with defaults and derived
    // values; call once after construction.
    void finalize();
    void validate() const;
};

// Per-MD decision: choice = 0 trains locally, choice in [1, M*G] offloads to
// es = (choice-1)/G over sub-channel g = (choice-1)%G.
struct MdAction {
    std::size_t choice = 0;
    double power_w = 0.0;       // offload mode
    double bandwidth_hz = 0.0;  // offload mode
    double cpu_hz = 0.0;        // local mode
    double hash_rate = 0.0;     // both modes

    bool offloads() const { return choice != 0; }
    std::size_t target_es(std::size_t channels) const { return (choice - 1) / channels; }
    std::size_t channel(std::size_t channels) const { return (choice - 1) % channels; }
};

using ParamAction = std::vector<MdAction>;

}  // namespace bflsim
