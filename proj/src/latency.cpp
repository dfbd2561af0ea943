#include "bflsim/latency.hpp"

#include <cmath>
#include <stdexcept>

namespace bflsim::latency {

double transmission_rate(double bandwidth_hz, double power_w, double gain, double noise_w,
                         double interference_w) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("transmission_rate: bandwidth > 0 required");
    if (!(noise_w > 0.0)) throw std::invalid_argument("transmission_rate: noise power > 0 required");
    const double sinr = power_w * gain / (noise_w + interference_w);
    return bandwidth_hz * std::log2(1.0 + sinr);
}

double offload_latency(double data_bits, double rate_bps) {
    if (!(rate_bps > 0.0)) throw std::invalid_argument("offload_latency: infeasible offload (rate = 0)");
    return data_bits / rate_bps;
}

double energy_offload(double power_w, double t_off_s) { return power_w * t_off_s; }

double exec_latency(double cycles_per_point, double points, double batch_ratio,
                    double sgd_iters, double cpu_hz) {
    if (!(cpu_hz > 0.0)) throw std::invalid_argument("exec_latency: cpu frequency > 0 required");
    return cycles_per_point * points * batch_ratio * sgd_iters / cpu_hz;
}

double local_latency(double cycles_per_point, double points, double batch_ratio,
                     double sgd_iters, double cpu_hz) {
    return exec_latency(cycles_per_point, points, batch_ratio, sgd_iters, cpu_hz);
}

double energy_local(double kappa, double cpu_hz, double cycles_per_point) {
    return kappa * cpu_hz * cpu_hz * cycles_per_point;
}

double upload_latency(double model_bits, double rate_bps) {
    if (!(rate_bps > 0.0)) throw std::invalid_argument("upload_latency: rate = 0 for a local trainer");
    return model_bits / rate_bps;
}

double consensus_round_time(double model_bits, const std::vector<double>& neighbor_rates_bps) {
    double t = 0.0;
    for (double r : neighbor_rates_bps) {
        if (!(r > 0.0)) throw std::invalid_argument("consensus_round_time: wired rate > 0 required");
        t = std::max(t, model_bits / r);
    }
    return t;
}

double consensus_latency(const std::vector<std::vector<double>>& per_es_round_times) {
    double worst = 0.0;
    for (const auto& rounds : per_es_round_times) {
        double sum = 0.0;
        for (double t : rounds) sum += t;
        worst = std::max(worst, sum);
    }
    return worst;
}

MiningOut mine_latency(double hash_work, double hash_rate, double verify_coeff, double block_bits,
                       std::size_t num_es, std::size_t num_md, double fork_rate, double tx_count,
                       double fork_occurrences, double block_size_slope) {
    if (!(hash_rate > 0.0)) throw std::invalid_argument("mine_latency: hash rate > 0 required");
    MiningOut out;
    out.t_gen = hash_work / hash_rate;
    out.t_prop =
        verify_coeff * block_bits * static_cast<double>(num_es + num_md - 1);
    out.p_fork = 1.0 - std::exp(-fork_rate * block_size_slope * tx_count);
    out.t_mine = fork_occurrences * (out.t_gen + out.t_prop);
    return out;
}

double energy_mine(double joules_per_hash, double hash_work) { return joules_per_hash * hash_work; }

double total_objective(const std::vector<Breakdown>& rounds) {
    if (rounds.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rounds) s += r.objective();
    return s / static_cast<double>(rounds.size());
}

}  // namespace bflsim::latency
