#include "bflsim/params.hpp"

#include <stdexcept>

#include "bflsim/latency.hpp"

namespace bflsim {

void SystemParams::finalize() {
    auto fill = [this](std::vector<double>& v, double value) {
        if (v.empty()) v.assign(num_md, value);
    };
    fill(md_max_cpu_hz, 1e9);
    fill(md_cycles_per_point, 0.9e6);
    fill(md_data_points, 1000.0);
    fill(md_max_power_w, 0.5);
    fill(md_energy_budget_j, 4000.0);
    if (upload_bandwidth_hz <= 0.0 && channels > 0)
        upload_bandwidth_hz = max_bandwidth_hz / static_cast<double>(channels);
}

void SystemParams::validate() const {
    if (num_md == 0 || num_es == 0 || channels == 0)
        throw std::invalid_argument("SystemParams: counts must be positive");
    auto require_n = [this](const std::vector<double>& v, const char* name) {
        if (v.size() != num_md)
            throw std::invalid_argument(std::string("SystemParams: ") + name + " must have N entries");
        for (double x : v)
            if (!(x > 0.0))
                throw std::invalid_argument(std::string("SystemParams: ") + name + " must be positive");
    };
    require_n(md_max_cpu_hz, "md_max_cpu_hz");
    require_n(md_cycles_per_point, "md_cycles_per_point");
    require_n(md_data_points, "md_data_points");
    require_n(md_max_power_w, "md_max_power_w");
    require_n(md_energy_budget_j, "md_energy_budget_j");
    if (!(max_bandwidth_hz > 0.0) || !(noise_w > 0.0) || !(es_cpu_hz > 0.0) ||
        !(wired_rate_bps > 0.0) || !(hash_cap > 0.0) || !(hash_work > 0.0) ||
        !(bits_per_point > 0.0) || !(model_bits > 0.0) || !(md_epochs >= 1.0) ||
        !(es_epochs >= 1.0) || !(batch_ratio > 0.0) || batch_ratio > 1.0)
        throw std::invalid_argument("SystemParams: channel/compute/mining parameters out of range");
    // Block-generation energy joules_per_hash * hash_work does not depend on
    // the action, so the budget must leave room for it or no action is
    // feasible.
    const double e_gen = latency::energy_mine(joules_per_hash, hash_work);
    for (double budget : md_energy_budget_j)
        if (budget <= e_gen)
            throw std::invalid_argument(
                "SystemParams: energy budget must exceed the fixed block-generation energy");
}

}  // namespace bflsim
