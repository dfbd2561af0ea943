#include "bflsim/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bflsim::fl {

namespace {

// log-sum-exp with max subtraction; also writes softmax probabilities.
double softmax_probs(const Vec& logits, Vec& probs) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    probs.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        probs[c] = std::exp(logits[c] - mx);
        z += probs[c];
    }
    for (auto& p : probs) p /= z;
    return mx + std::log(z);  // log sum exp
}

}  // namespace

LossModel LossModel::softmax(std::size_t feature_dim, std::size_t classes) {
    LossModel m;
    m.kind = LossKind::softmax_regression;
    m.feature_dim = feature_dim;
    m.classes = classes;
    return m;
}

LossModel LossModel::mlp(std::size_t feature_dim, std::size_t hidden, std::size_t classes) {
    LossModel m;
    m.kind = LossKind::one_hidden_mlp;
    m.feature_dim = feature_dim;
    m.hidden = hidden;
    m.classes = classes;
    return m;
}

LossModel LossModel::quadratic(std::size_t dim) {
    LossModel m;
    m.kind = LossKind::quadratic_test;
    m.feature_dim = dim;
    return m;
}

std::size_t LossModel::dim() const {
    switch (kind) {
        case LossKind::softmax_regression:
            return classes * feature_dim + classes;
        case LossKind::one_hidden_mlp:
            return hidden * feature_dim + hidden + classes * hidden + classes;
        case LossKind::quadratic_test:
            return feature_dim;
    }
    return 0;
}

// Parameter layouts:
//   softmax:  W[C x F] row-major, then bias[C]
//   mlp:      W1[H x F], b1[H], W2[C x H], b2[C]
//   quadratic: w itself, dim F

double LossModel::point_loss(const Vec& w, const DataPoint& p) const {
    if (w.size() != dim()) throw std::invalid_argument("point_loss: parameter dimension mismatch");
    if (p.features.size() != feature_dim)
        throw std::invalid_argument("point_loss: feature dimension mismatch");

    switch (kind) {
        case LossKind::quadratic_test: {
            double s = 0.0;
            for (std::size_t i = 0; i < feature_dim; ++i) {
                const double dlt = w[i] - p.features[i];
                s += dlt * dlt;
            }
            return 0.5 * s;
        }
        case LossKind::softmax_regression: {
            if (p.label < 0 || static_cast<std::size_t>(p.label) >= classes)
                throw std::invalid_argument("point_loss: label out of range");
            Vec logits(classes, 0.0);
            for (std::size_t c = 0; c < classes; ++c) {
                double s = w[classes * feature_dim + c];  // bias
                const double* row = w.data() + c * feature_dim;
                for (std::size_t f = 0; f < feature_dim; ++f) s += row[f] * p.features[f];
                logits[c] = s;
            }
            Vec probs;
            const double lse = softmax_probs(logits, probs);
            return lse - logits[static_cast<std::size_t>(p.label)];
        }
        case LossKind::one_hidden_mlp: {
            if (p.label < 0 || static_cast<std::size_t>(p.label) >= classes)
                throw std::invalid_argument("point_loss: label out of range");
            const double* w1 = w.data();
            const double* b1 = w.data() + hidden * feature_dim;
            const double* w2 = b1 + hidden;
            const double* b2 = w2 + classes * hidden;
            Vec h(hidden);
            for (std::size_t j = 0; j < hidden; ++j) {
                double s = b1[j];
                for (std::size_t f = 0; f < feature_dim; ++f) s += w1[j * feature_dim + f] * p.features[f];
                h[j] = std::tanh(s);
            }
            Vec logits(classes);
            for (std::size_t c = 0; c < classes; ++c) {
                double s = b2[c];
                for (std::size_t j = 0; j < hidden; ++j) s += w2[c * hidden + j] * h[j];
                logits[c] = s;
            }
            Vec probs;
            const double lse = softmax_probs(logits, probs);
            return lse - logits[static_cast<std::size_t>(p.label)];
        }
    }
    return 0.0;
}

void LossModel::point_grad_accum(const Vec& w, const DataPoint& p, Vec& grad) const {
    if (w.size() != dim() || grad.size() != dim())
        throw std::invalid_argument("point_grad: parameter dimension mismatch");
    if (p.features.size() != feature_dim)
        throw std::invalid_argument("point_grad: feature dimension mismatch");

    switch (kind) {
        case LossKind::quadratic_test: {
            for (std::size_t i = 0; i < feature_dim; ++i) grad[i] += w[i] - p.features[i];
            return;
        }
        case LossKind::softmax_regression: {
            Vec logits(classes, 0.0);
            for (std::size_t c = 0; c < classes; ++c) {
                double s = w[classes * feature_dim + c];
                const double* row = w.data() + c * feature_dim;
                for (std::size_t f = 0; f < feature_dim; ++f) s += row[f] * p.features[f];
                logits[c] = s;
            }
            Vec probs;
            softmax_probs(logits, probs);
            for (std::size_t c = 0; c < classes; ++c) {
                const double dlogit = probs[c] - (static_cast<int>(c) == p.label ? 1.0 : 0.0);
                double* row = grad.data() + c * feature_dim;
                for (std::size_t f = 0; f < feature_dim; ++f) row[f] += dlogit * p.features[f];
                grad[classes * feature_dim + c] += dlogit;
            }
            return;
        }
        case LossKind::one_hidden_mlp: {
            const double* w1 = w.data();
            const double* b1 = w.data() + hidden * feature_dim;
            const double* w2 = b1 + hidden;
            const double* b2 = w2 + classes * hidden;
            Vec h(hidden);
            for (std::size_t j = 0; j < hidden; ++j) {
                double s = b1[j];
                for (std::size_t f = 0; f < feature_dim; ++f) s += w1[j * feature_dim + f] * p.features[f];
                h[j] = std::tanh(s);
            }
            Vec logits(classes);
            for (std::size_t c = 0; c < classes; ++c) {
                double s = b2[c];
                for (std::size_t j = 0; j < hidden; ++j) s += w2[c * hidden + j] * h[j];
                logits[c] = s;
            }
            Vec probs;
            softmax_probs(logits, probs);

            double* g1 = grad.data();
            double* gb1 = grad.data() + hidden * feature_dim;
            double* g2 = gb1 + hidden;
            double* gb2 = g2 + classes * hidden;
            Vec dh(hidden, 0.0);
            for (std::size_t c = 0; c < classes; ++c) {
                const double dlogit = probs[c] - (static_cast<int>(c) == p.label ? 1.0 : 0.0);
                gb2[c] += dlogit;
                for (std::size_t j = 0; j < hidden; ++j) {
                    g2[c * hidden + j] += dlogit * h[j];
                    dh[j] += dlogit * w2[c * hidden + j];
                }
            }
            for (std::size_t j = 0; j < hidden; ++j) {
                const double dpre = dh[j] * (1.0 - h[j] * h[j]);
                gb1[j] += dpre;
                for (std::size_t f = 0; f < feature_dim; ++f)
                    g1[j * feature_dim + f] += dpre * p.features[f];
            }
            return;
        }
    }
}

Vec LossModel::point_grad(const Vec& w, const DataPoint& p) const {
    Vec g(dim(), 0.0);
    point_grad_accum(w, p, g);
    return g;
}

int LossModel::predict(const Vec& w, const DataPoint& p) const {
    if (kind == LossKind::quadratic_test) return 0;
    Vec loss_per_class;
    // Reuse point_loss plumbing: argmax of logits == argmin of per-class loss.
    int best = 0;
    double best_loss = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        DataPoint probe = p;
        probe.label = static_cast<int>(c);
        const double l = point_loss(w, probe);
        if (c == 0 || l < best_loss) {
            best = static_cast<int>(c);
            best_loss = l;
        }
    }
    return best;
}

double LossModel::mean_loss(const Vec& w, const Dataset& ds) const {
    if (ds.empty()) throw std::invalid_argument("mean_loss: empty dataset");
    double s = 0.0;
    for (const auto& p : ds.points) s += point_loss(w, p);
    return s / static_cast<double>(ds.size());
}

Vec LossModel::mean_grad(const Vec& w, const Dataset& ds) const {
    if (ds.empty()) throw std::invalid_argument("mean_grad: empty dataset");
    Vec g(dim(), 0.0);
    for (const auto& p : ds.points) point_grad_accum(w, p, g);
    scale_inplace(g, 1.0 / static_cast<double>(ds.size()));
    return g;
}

double LossModel::accuracy(const Vec& w, const Dataset& ds) const {
    if (ds.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& p : ds.points)
        if (predict(w, p) == p.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double local_loss(const LossModel& model, const Vec& w, const Dataset& ds) {
    if (ds.empty())
        throw std::invalid_argument("local_loss: empty dataset (misconfigured offload split?)");
    return model.mean_loss(w, ds);
}

double global_loss(const LossModel& model, const Vec& w, const std::vector<Dataset>& shards) {
    std::size_t total = 0;
    for (const auto& s : shards) total += s.size();
    if (total == 0) throw std::invalid_argument("global_loss: all shards empty");
    double acc = 0.0;
    for (const auto& s : shards) {
        if (s.empty()) continue;
        acc += (static_cast<double>(s.size()) / static_cast<double>(total)) * local_loss(model, w, s);
    }
    return acc;
}

Vec global_grad(const LossModel& model, const Vec& w, const std::vector<Dataset>& shards) {
    std::size_t total = 0;
    for (const auto& s : shards) total += s.size();
    if (total == 0) throw std::invalid_argument("global_grad: all shards empty");
    Vec g(model.dim(), 0.0);
    for (const auto& s : shards) {
        if (s.empty()) continue;
        Vec gs = model.mean_grad(w, s);
        axpy(static_cast<double>(s.size()) / static_cast<double>(total), gs, g);
    }
    return g;
}

}  // namespace bflsim::fl
