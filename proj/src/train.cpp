#include "bflsim/train.hpp"

#include <cmath>
#include <stdexcept>

#include "bflsim/rng.hpp"

namespace bflsim::fl {

std::size_t TrainerConfig::batch_size(std::size_t dataset_size) const {
    auto b = static_cast<std::size_t>(std::llround(batch_ratio * static_cast<double>(dataset_size)));
    if (b < 1) b = 1;
    if (b > dataset_size) b = dataset_size;
    return b;
}

void TrainerConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainerConfig: epochs >= 1 required");
    if (!(batch_ratio > 0.0) || batch_ratio > 1.0)
        throw std::invalid_argument("TrainerConfig: batch_ratio in (0, 1] required");
    if (step_size < 0.0) throw std::invalid_argument("TrainerConfig: step_size >= 0 required");
}

SgdResult sgd_round(const LossModel& model, const Vec& w0, const Dataset& ds,
                    const TrainerConfig& cfg) {
    cfg.validate();
    if (ds.empty()) throw std::invalid_argument("sgd_round: empty dataset");
    if (w0.size() != model.dim()) throw std::invalid_argument("sgd_round: parameter dimension mismatch");

    const std::size_t batch = cfg.batch_size(ds.size());
    SgdResult res;
    res.w = w0;
    res.loss_trace.reserve(cfg.epochs);

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        Rng rng = Rng::stream(cfg.seed, cfg.entity_id, cfg.round, "sgd", cfg.epoch_offset + e);
        Vec grad(model.dim(), 0.0);
        if (batch == ds.size()) {
            for (const auto& p : ds.points) model.point_grad_accum(res.w, p, grad);
        } else {
            for (std::size_t idx : rng.sample_without_replacement(ds.size(), batch))
                model.point_grad_accum(res.w, ds.points[idx], grad);
        }
        if (!all_finite(grad))
            throw std::runtime_error("sgd_round: non-finite gradient (reduce step_size)");
        axpy(-cfg.step_size / static_cast<double>(batch), grad, res.w);
        res.loss_trace.push_back(model.mean_loss(res.w, ds));
    }
    return res;
}

Vec cumulative_gradient(const Vec& w_start, const Vec& w_end, double step_size) {
    if (step_size == 0.0) throw std::invalid_argument("cumulative_gradient: step_size must be nonzero");
    check_same_dim(w_start, w_end, "cumulative_gradient");
    Vec g(w_start.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (w_start[i] - w_end[i]) / step_size;
    return g;
}

}  // namespace bflsim::fl
