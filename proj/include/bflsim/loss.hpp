#pragma once

#include "bflsim/dataset.hpp"
#include "bflsim/vec.hpp"

namespace bflsim::fl {

enum class LossKind {
    softmax_regression,  // linear logits + cross-entropy
    one_hidden_mlp,      // tanh hidden layer + softmax cross-entropy
    quadratic_test,      // 1/2 ||w - x||^2 analytic fixture
};

// A loss model is a parameter layout plus per-point loss/gradient.  All
// gradients are analytic; finite-difference agreement is enforced in tests.
struct LossModel {
    LossKind kind = LossKind::softmax_regression;
    std::size_t feature_dim = 0;
    std::size_t hidden = 0;   // one_hidden_mlp only
    std::size_t classes = 0;  // >= 2 for classification kinds

    static LossModel softmax(std::size_t feature_dim, std::size_t classes);
    static LossModel mlp(std::size_t feature_dim, std::size_t hidden, std::size_t classes);
    static LossModel quadratic(std::size_t dim);

    // Length d of the parameter vector.
    std::size_t dim() const;

    double point_loss(const Vec& w, const DataPoint& p) const;
    // Accumulates d loss / d w into grad (grad must be zeroed by the caller
    // unless accumulation is intended).
    void point_grad_accum(const Vec& w, const DataPoint& p, Vec& grad) const;
    Vec point_grad(const Vec& w, const DataPoint& p) const;

    int predict(const Vec& w, const DataPoint& p) const;

    double mean_loss(const Vec& w, const Dataset& ds) const;
    Vec mean_grad(const Vec& w, const Dataset& ds) const;
    double accuracy(const Vec& w, const Dataset& ds) const;
};

// Mean of point losses over one shard (errors on an empty shard).
double local_loss(const LossModel& model, const Vec& w, const Dataset& ds);

// Data-size weighted mean of local losses: sum_n (D_n/D) F_n(w).
double global_loss(const LossModel& model, const Vec& w, const std::vector<Dataset>& shards);

Vec global_grad(const LossModel& model, const Vec& w, const std::vector<Dataset>& shards);

}  // namespace bflsim::fl
