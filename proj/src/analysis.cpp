#include "bflsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflsim/consensus.hpp"
#include "bflsim/rng.hpp"

namespace bflsim::analysis {

std::vector<std::string> AnalysisConstants::violations() const {
    std::vector<std::string> out;
    if (beta < 0.0) out.push_back("beta must be >= 0");
    if (zeta1 < 1.0) out.push_back("zeta1 must be >= 1");
    if (zeta2 < 0.0) out.push_back("zeta2 must be >= 0");
    if (theta < 0.0) out.push_back("theta must be >= 0");
    if (upsilon < 0.0) out.push_back("upsilon must be >= 0");
    if (vartheta < 0.0) out.push_back("vartheta must be >= 0");
    if (!(xi_cons > 0.0)) out.push_back("xi_cons must be > 0");
    if (!(alpha > 0.0)) out.push_back("alpha must be > 0");
    if (lambda < 0.0 || lambda >= 1.0) out.push_back("lambda must be in [0, 1)");
    if (e_avg_min < 1.0 || e_avg_max < e_avg_min) out.push_back("e_avg bounds out of order");
    if (e_hat_min <= 0.0 || e_hat_max < e_hat_min) out.push_back("e_hat bounds out of order");
    if (e_max < 1.0) out.push_back("e_max must be >= 1");
    if (rounds < 1) out.push_back("rounds must be >= 1");
    return out;
}

double estimate_smoothness(const GradFn& grad, std::size_t dim, const std::vector<Vec>& anchors,
                           std::size_t sample_pairs, std::uint64_t seed) {
    if (anchors.empty()) throw std::invalid_argument("estimate_smoothness: anchors required");
    Rng rng = Rng::stream(seed, 0, 0, "smoothness");
    double best = 0.0;
    for (std::size_t i = 0; i < sample_pairs; ++i) {
        const Vec& anchor = anchors[i % anchors.size()];
        Vec w = anchor, wp = anchor;
        for (std::size_t d = 0; d < dim; ++d) {
            w[d] += 0.5 * rng.normal();
            wp[d] += 0.5 * rng.normal();
        }
        const double dist = norm2(sub(w, wp));
        if (dist < 1e-12) continue;
        best = std::max(best, norm2(sub(grad(w), grad(wp))) / dist);
    }
    return best;
}

double estimate_smoothness(const fl::LossModel& model, const fl::Dataset& ds,
                           const std::vector<Vec>& anchors, std::size_t sample_pairs,
                           std::uint64_t seed) {
    return estimate_smoothness([&](const Vec& w) { return model.mean_grad(w, ds); }, model.dim(),
                               anchors, sample_pairs, seed);
}

double estimate_variability(const fl::LossModel& model, const Vec& w_probe,
                            const fl::Dataset& ds) {
    if (ds.size() < 2) return 0.0;
    // Cap the pairwise sweep; the estimator is documented as a lower bound.
    std::vector<std::size_t> idx;
    if (ds.size() <= 200) {
        idx.resize(ds.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    } else {
        Rng rng = Rng::stream(7, ds.size(), 0, "variability-subsample");
        idx = rng.sample_without_replacement(ds.size(), 200);
    }
    std::vector<Vec> grads(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        grads[i] = model.point_grad(w_probe, ds.points[idx[i]]);
    double best = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            const double dd = norm2(sub(ds.points[idx[i]].features, ds.points[idx[j]].features));
            if (dd < 1e-12) continue;
            best = std::max(best, norm2(sub(grads[i], grads[j])) / dd);
        }
    }
    return best;
}

DissimilarityFit fit_dissimilarity(const std::vector<std::vector<Vec>>& per_probe_grads,
                                   const std::vector<double>& weights) {
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (std::fabs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("fit_dissimilarity: weights must sum to 1");

    DissimilarityFit fit;
    double needed = 0.0;
    for (const auto& grads : per_probe_grads) {
        if (grads.size() != weights.size())
            throw std::invalid_argument("fit_dissimilarity: one gradient per weight required");
        double lhs = 0.0;
        Vec mix(grads.empty() ? 0 : grads.front().size(), 0.0);
        for (std::size_t y = 0; y < grads.size(); ++y) {
            lhs += weights[y] * norm2_sq(grads[y]);
            axpy(weights[y], grads[y], mix);
        }
        needed = std::max(needed, lhs - norm2_sq(mix));
    }
    fit.zeta1 = 1.0;
    fit.zeta2 = std::max(0.0, needed);
    fit.max_slack = 0.0;
    for (const auto& grads : per_probe_grads) {
        double lhs = 0.0;
        Vec mix(grads.empty() ? 0 : grads.front().size(), 0.0);
        for (std::size_t y = 0; y < grads.size(); ++y) {
            lhs += weights[y] * norm2_sq(grads[y]);
            axpy(weights[y], grads[y], mix);
        }
        fit.max_slack = std::max(fit.max_slack, fit.zeta1 * norm2_sq(mix) + fit.zeta2 - lhs);
    }
    return fit;
}

double model_drift(const fl::LossModel& model, const std::vector<fl::Dataset>& prev_shards,
                   const std::vector<fl::Dataset>& cur_shards, const std::vector<Vec>& probes) {
    if (prev_shards.size() != cur_shards.size())
        throw std::invalid_argument("model_drift: entity count mismatch");
    if (probes.empty()) throw std::invalid_argument("model_drift: probes required");
    double prev_total = 0.0, cur_total = 0.0;
    for (const auto& s : prev_shards) prev_total += static_cast<double>(s.size());
    for (const auto& s : cur_shards) cur_total += static_cast<double>(s.size());

    double total = 0.0;
    for (std::size_t y = 0; y < cur_shards.size(); ++y) {
        double worst = -1e300;
        for (const auto& w : probes) {
            const double cur = cur_shards[y].empty()
                                   ? 0.0
                                   : (static_cast<double>(cur_shards[y].size()) / cur_total) *
                                         fl::local_loss(model, w, cur_shards[y]);
            const double prev = prev_shards[y].empty()
                                    ? 0.0
                                    : (static_cast<double>(prev_shards[y].size()) / prev_total) *
                                          fl::local_loss(model, w, prev_shards[y]);
            worst = std::max(worst, cur - prev);
        }
        total += worst;
    }
    return total;
}

double sgd_variance_bound(double batch, double data, double sigma_sq, double theta) {
    if (batch < 1.0 || batch > data)
        throw std::invalid_argument("sgd_variance_bound: 1 <= B <= D required");
    return 2.0 * (1.0 - batch / data) * (sigma_sq / batch) * theta * theta;
}

StepSizeResult step_size(double alpha, std::size_t rounds, double e_avg, double beta, double zeta1,
                         double e_max, double total_data, double sum_data_epochs) {
    if (rounds < 1 || !(e_avg > 0.0)) throw std::invalid_argument("step_size: bad K or e_avg");
    StepSizeResult r;
    r.eta = alpha / std::sqrt(static_cast<double>(rounds) * e_avg);
    // e_max = 1 degenerates the first condition (no multi-step drift).
    if (e_max <= 1.0 || beta == 0.0) {
        r.zeta_condition = true;
    } else {
        const double cap =
            (1.0 / (2.0 * beta)) * std::sqrt(1.0 / ((4.0 * zeta1 + 1.0) * e_max * (e_max - 1.0)));
        r.zeta_condition = r.eta <= cap;
    }
    if (beta == 0.0 || sum_data_epochs <= 0.0)
        r.data_condition = true;
    else
        r.data_condition = r.eta <= total_data / (2.0 * beta * sum_data_epochs);
    return r;
}

Theorem1Result theorem1_bound(const AnalysisConstants& c, const std::vector<RoundInputs>& rounds,
                              std::size_t num_es) {
    const auto bad = c.violations();
    if (!bad.empty()) {
        std::string msg = "theorem1_bound: invalid constants:";
        for (const auto& v : bad) msg += " [" + v + "]";
        throw std::invalid_argument(msg);
    }
    if (rounds.empty()) throw std::invalid_argument("theorem1_bound: no rounds");

    const double k = static_cast<double>(rounds.size());
    const double sqrt_k = std::sqrt(k);
    const double lead_coef = 8.0 * std::sqrt(c.e_avg_max) / (c.alpha * c.e_hat_min * sqrt_k);
    const double var_coef = 80.0 * c.beta * c.beta * c.alpha * c.alpha / (k * k * c.e_avg_min);
    const double tail_coef =
        16.0 * c.beta * c.alpha * c.e_hat_max / (k * sqrt_k * std::sqrt(c.e_avg_min));

    Theorem1Result res;
    res.per_round.reserve(rounds.size());
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        const auto& r = rounds[i];
        RoundTermRow row;
        row.round = i;
        row.measured_grad_sq = r.measured_grad_sq;
        if (i == 0) row.terms.leading = lead_coef * (c.f0 - c.f_star);
        if (i >= 1) row.terms.drift = lead_coef * r.drift;

        double var_inner = 0.0, tail_inner = 0.0;
        for (const auto& e : r.entities) {
            const double frac = e.data_size / r.round_data;
            const double noise =
                (1.0 - e.batch / e.data_size) * (e.sigma_sq / e.batch) * e.theta * e.theta;
            var_inner += frac * (e.epochs - 1.0) * noise;
            const double w = e.data_size / (r.round_data * std::sqrt(e.epochs));
            tail_inner += w * w * noise;
        }
        row.terms.variance = var_coef * var_inner;
        row.terms.dissimilarity = var_coef * c.zeta2 * r.e_max * (r.e_max - 1.0);
        row.terms.consensus = (24.0 * static_cast<double>(num_es) *
                               std::pow(r.lambda, 2.0 * static_cast<double>(r.phi)) *
                               r.divergence * r.divergence) /
                              k;
        row.terms.batch_tail = tail_coef * tail_inner;

        res.totals.leading += row.terms.leading;
        res.totals.drift += row.terms.drift;
        res.totals.variance += row.terms.variance;
        res.totals.dissimilarity += row.terms.dissimilarity;
        res.totals.consensus += row.terms.consensus;
        res.totals.batch_tail += row.terms.batch_tail;
        res.measured_mean_grad_sq += r.measured_grad_sq / k;
        res.per_round.push_back(row);
    }
    res.holds = res.totals.total() >= res.measured_mean_grad_sq;
    return res;
}

Corollary1Result corollary1_bound(const AnalysisConstants& c, const std::vector<RoundInputs>& rounds,
                                  std::size_t num_es) {
    if (c.lambda >= 1.0 || c.lambda < 0.0)
        throw std::invalid_argument("corollary1_bound: lambda in [0, 1) required");
    const auto bad = c.violations();
    if (!bad.empty()) {
        std::string msg = "corollary1_bound: invalid constants:";
        for (const auto& v : bad) msg += " [" + v + "]";
        throw std::invalid_argument(msg);
    }

    Corollary1Result res;
    const double k = static_cast<double>(c.rounds);
    const double sqrt_k = std::sqrt(k);

    for (std::size_t i = 0; i < rounds.size(); ++i) {
        const auto& r = rounds[i];
        if (i >= 1 && r.drift > c.upsilon / k + 1e-12)
            res.failed_preconditions.push_back("drift exceeds upsilon/K at round " +
                                               std::to_string(i));
        for (const auto& e : r.entities) {
            const double noise =
                (1.0 - e.batch / e.data_size) * (e.sigma_sq / e.batch) * e.theta * e.theta;
            if (noise > c.vartheta + 1e-12) {
                res.failed_preconditions.push_back("mini-batch noise exceeds vartheta at round " +
                                                   std::to_string(i));
                break;
            }
        }
        if (r.e_max > c.e_max + 1e-12)
            res.failed_preconditions.push_back("e_max exceeded at round " + std::to_string(i));
        if (r.divergence > 0.0 && r.lambda > 0.0 && r.lambda < 1.0) {
            const std::size_t need = consensus::min_p2p_rounds(r.lambda, c.xi_cons, c.rounds,
                                                               r.divergence, num_es);
            if (r.phi < need)
                res.failed_preconditions.push_back("phi below the round-count rule at round " +
                                                   std::to_string(i));
        }
    }

    res.terms.leading = 8.0 * std::sqrt(c.e_avg_max) / (c.alpha * c.e_hat_min * sqrt_k) *
                        (c.f0 - c.f_star);
    res.terms.drift =
        8.0 * c.upsilon * std::sqrt(c.e_avg_max) / (c.alpha * c.e_hat_min * sqrt_k);
    const double bb = 80.0 * c.beta * c.beta * c.alpha * c.alpha / (k * c.e_avg_min);
    res.terms.variance = bb * (c.e_max - 1.0) * c.vartheta;
    res.terms.dissimilarity = bb * c.zeta2 * c.e_max * (c.e_max - 1.0);
    res.terms.consensus = 24.0 * c.xi_cons / sqrt_k;
    res.terms.batch_tail =
        16.0 * c.beta * c.alpha * c.e_hat_max / (sqrt_k * std::sqrt(c.e_avg_min)) * c.vartheta;
    res.total = res.terms.total();
    return res;
}

RunAnalysis analyze_run(const bfl::Scenario& scenario, const std::vector<bfl::RoundRecord>& records,
                        double f_star) {
    if (records.empty()) throw std::invalid_argument("analyze_run: no rounds");
    const auto& model = scenario.model;
    const std::size_t count = records.size();

    // Probe points: a spread of the iterate sequence plus perturbed copies.
    std::vector<Vec> probes;
    const std::size_t stride = std::max<std::size_t>(1, count / 8);
    for (std::size_t k = 0; k < count; k += stride) probes.push_back(records[k].w_before);
    Rng prng = Rng::stream(scenario.seed, 0, 0, "analysis-probe");
    const std::size_t base = probes.size();
    for (std::size_t i = 0; i < 4 && i < base; ++i) {
        Vec w = probes[i % base];
        for (auto& v : w) v += 0.3 * prng.normal();
        probes.push_back(std::move(w));
    }

    RunAnalysis out;
    AnalysisConstants& c = out.constants;
    c.rounds = count;
    c.f_star = f_star;
    c.f0 = fl::global_loss(model, records.front().w_before, scenario.md_shards);
    c.lambda = records.front().lambda;

    const auto pooled = fl::pool(scenario.md_shards);
    c.beta = estimate_smoothness(model, pooled, probes, 200, scenario.seed);

    // Entity datasets per round from the recorded assignments.
    const std::size_t num_md = scenario.params.num_md;
    const std::size_t num_es = scenario.params.num_es;
    auto entity_dataset = [&](const bfl::RoundRecord& rec, std::size_t entity) {
        if (entity < num_md) return scenario.md_shards[entity];
        fl::Dataset pool_ds;
        for (std::size_t n = 0; n < num_md; ++n) {
            const auto& a = rec.assignment[n];
            if (a.offloads() && a.target_es(scenario.params.channels) == entity - num_md) {
                const auto& shard = scenario.md_shards[n];
                pool_ds.points.insert(pool_ds.points.end(), shard.points.begin(),
                                      shard.points.end());
            }
        }
        return pool_ds;
    };

    // Variability per entity: max over probes; reuse across rounds with the
    // same dataset composition (keyed by entity id + size).
    std::vector<double> md_theta(num_md, -1.0);
    auto theta_of = [&](const fl::Dataset& ds, std::size_t entity) {
        if (entity < num_md && md_theta[entity] >= 0.0) return md_theta[entity];
        double best = 0.0;
        for (const auto& w : probes) best = std::max(best, estimate_variability(model, w, ds));
        if (entity < num_md) md_theta[entity] = best;
        return best;
    };

    double alpha_est = 0.0;
    double e_avg_min = 1e300, e_avg_max = 0.0, e_hat_min = 1e300, e_hat_max = 0.0;
    double upsilon = 0.0, vartheta = 0.0, xi_cons = 0.0, theta_all = 0.0, e_max_all = 1.0;

    for (std::size_t k = 0; k < count; ++k) {
        const auto& rec = records[k];
        RoundInputs ri;
        ri.lambda = rec.lambda;
        ri.phi = rec.phi;
        ri.divergence = rec.divergence;
        ri.measured_grad_sq = rec.grad_norm_sq;
        ri.drift = k == 0 ? 0.0
                          : model_drift(model, scenario.md_shards, scenario.md_shards, probes);

        double round_data = 0.0, e_sum = 0.0, de_sum = 0.0, e_mx = 1.0;
        for (const auto& st : rec.stats) {
            EntityRoundStat es;
            es.data_size = st.data_size;
            es.epochs = st.epochs;
            es.batch = st.batch;
            const auto ds = entity_dataset(rec, st.entity);
            es.sigma_sq = fl::feature_variance(ds);
            es.theta = theta_of(ds, st.entity);
            theta_all = std::max(theta_all, es.theta);
            ri.entities.push_back(es);
            round_data += st.data_size;
            e_sum += st.epochs;
            de_sum += st.data_size * st.epochs;
            e_mx = std::max(e_mx, st.epochs);

            const double noise =
                (1.0 - es.batch / es.data_size) * (es.sigma_sq / es.batch) * es.theta * es.theta;
            vartheta = std::max(vartheta, noise);
        }
        ri.round_data = round_data;
        ri.e_max = e_mx;
        e_max_all = std::max(e_max_all, e_mx);

        const double e_avg = e_sum / static_cast<double>(rec.stats.size());
        const double e_hat = de_sum / round_data;
        e_avg_min = std::min(e_avg_min, e_avg);
        e_avg_max = std::max(e_avg_max, e_avg);
        e_hat_min = std::min(e_hat_min, e_hat);
        e_hat_max = std::max(e_hat_max, e_hat);
        alpha_est = std::max(alpha_est,
                             rec.eta * std::sqrt(static_cast<double>(count) * e_avg));
        upsilon = std::max(upsilon, static_cast<double>(count) * ri.drift);
        if (ri.divergence > 0.0 && ri.lambda > 0.0)
            xi_cons = std::max(xi_cons, std::sqrt(static_cast<double>(count)) *
                                            static_cast<double>(num_es) *
                                            std::pow(ri.lambda, 2.0 * static_cast<double>(ri.phi)) *
                                            ri.divergence * ri.divergence);
        out.rounds.push_back(std::move(ri));
    }

    // Dissimilarity fit over per-entity full gradients at the probes.
    std::vector<std::vector<Vec>> probe_grads;
    std::vector<double> weights;
    {
        double total = 0.0;
        for (const auto& s : scenario.md_shards) total += static_cast<double>(s.size());
        for (const auto& s : scenario.md_shards)
            weights.push_back(static_cast<double>(s.size()) / total);
        for (const auto& w : probes) {
            std::vector<Vec> grads;
            for (const auto& s : scenario.md_shards) grads.push_back(model.mean_grad(w, s));
            probe_grads.push_back(std::move(grads));
        }
    }
    const auto fit = fit_dissimilarity(probe_grads, weights);
    c.zeta1 = fit.zeta1;
    c.zeta2 = fit.zeta2;

    c.theta = theta_all;
    c.upsilon = upsilon;
    c.vartheta = vartheta;
    c.xi_cons = xi_cons > 0.0 ? xi_cons : 1.0;
    c.alpha = alpha_est > 0.0 ? alpha_est : 1.0;
    c.e_avg_min = e_avg_min;
    c.e_avg_max = e_avg_max;
    c.e_hat_min = e_hat_min;
    c.e_hat_max = e_hat_max;
    c.e_max = e_max_all;
    return out;
}

}  // namespace bflsim::analysis
