#pragma once

#include <cstddef>
#include <vector>

#include "bflsim/vec.hpp"

namespace bflsim::latency {

// b * log2(1 + p*h / (noise + interference)), bits/s.
double transmission_rate(double bandwidth_hz, double power_w, double gain, double noise_w,
                         double interference_w);

// T = bits / rate; errors when an offloading node faces a dead channel.
double offload_latency(double data_bits, double rate_bps);
double energy_offload(double power_w, double t_off_s);

// T = C * D * rho * e / f.
double exec_latency(double cycles_per_point, double points, double batch_ratio,
                    double sgd_iters, double cpu_hz);

double local_latency(double cycles_per_point, double points, double batch_ratio,
                     double sgd_iters, double cpu_hz);
// E = kappa * f^2 * C, exactly this form.
double energy_local(double kappa, double cpu_hz, double cycles_per_point);

double upload_latency(double model_bits, double rate_bps);

// Per-round update time at an ES: slowest neighbor transfer of the model.
double consensus_round_time(double model_bits, const std::vector<double>& neighbor_rates_bps);

// max over ESs of the summed per-round update times (shape M x phi).
double consensus_latency(const std::vector<std::vector<double>>& per_es_round_times);

struct MiningOut {
    double t_gen = 0.0;
    double t_prop = 0.0;
    double p_fork = 0.0;
    double t_mine = 0.0;
};

// t_gen = hash_work / hash_rate; t_prop = verify_coeff * block_bits * (M+N-1);
// p_fork = 1 - exp(-fork_rate * c_blk * tx_count); t_mine = zeta * (t_gen + t_prop).
MiningOut mine_latency(double hash_work, double hash_rate, double verify_coeff, double block_bits,
                       std::size_t num_es, std::size_t num_md, double fork_rate, double tx_count,
                       double fork_occurrences, double block_size_slope);

double energy_mine(double joules_per_hash, double hash_work);

// Per-round component totals plus per-entity detail.
struct Breakdown {
    std::vector<double> t_off;      // per MD
    std::vector<double> t_exe;      // per ES
    std::vector<double> t_loc;      // per MD
    std::vector<double> t_up;       // per MD
    std::vector<double> t_mine_md;  // per MD
    std::vector<double> e_off;      // per MD
    std::vector<double> e_loc;      // per MD
    std::vector<double> e_gen;      // per MD

    double t_learn = 0.0;
    double t_cons = 0.0;
    double t_mine = 0.0;

    double objective() const { return t_learn + t_cons + t_mine; }
    double energy_learn(std::size_t n) const { return e_off[n] + e_loc[n]; }
};

// (1/K) sum of round objectives.
double total_objective(const std::vector<Breakdown>& rounds);

}  // namespace bflsim::latency
