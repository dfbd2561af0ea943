#pragma once

#include <cstdint>

#include "bflsim/loss.hpp"

namespace bflsim::fl {

struct TrainerConfig {
    std::size_t epochs = 1;       // SGD iterations e
    double batch_ratio = 1.0;     // rho in (0, 1]
    double step_size = 0.01;      // eta
    std::uint64_t seed = 0;       // global seed
    std::uint64_t entity_id = 0;  // stream component
    std::uint64_t round = 0;      // stream component
    std::uint64_t epoch_offset = 0;  // lets chained calls continue the epoch streams

    // B = max(1, round(rho * D)), never exceeding D.
    std::size_t batch_size(std::size_t dataset_size) const;
    void validate() const;
};

struct SgdResult {
    Vec w;
    Vec loss_trace;  // full-dataset loss after each SGD iteration
};

// epochs steps of  w <- w - (eta/B) * sum_{d in batch} grad f(w, d), with the
// mini-batch drawn uniformly without replacement and reseeded per
// (seed, entity, round, epoch).
SgdResult sgd_round(const LossModel& model, const Vec& w0, const Dataset& ds,
                    const TrainerConfig& cfg);

// (w_start - w_end) / eta, the per-round summary gradient a node reports.
Vec cumulative_gradient(const Vec& w_start, const Vec& w_end, double step_size);

}  // namespace bflsim::fl
