#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bflsim/bfl.hpp"
#include "bflsim/dataset.hpp"
#include "bflsim/loss.hpp"
#include "bflsim/vec.hpp"

namespace bflsim::analysis {

// Every estimator here is an empirical lower bound of the true constant: it
// maximizes the defining ratio over sampled probes, so the downstream bound
// checks are necessary-condition tests.
struct AnalysisConstants {
    double beta = 0.0;      // smoothness
    double zeta1 = 1.0;     // dissimilarity multiplier (>= 1)
    double zeta2 = 0.0;     // dissimilarity offset
    double theta = 0.0;     // max local data variability
    double upsilon = 0.0;   // drift bound (Delta <= upsilon / K)
    double vartheta = 0.0;  // mini-batch variance bound constant
    double xi_cons = 1.0;   // consensus constant of the round-count rule
    double alpha = 1.0;     // step-size scale
    double e_avg_min = 1.0, e_avg_max = 1.0;
    double e_hat_min = 1.0, e_hat_max = 1.0;
    double e_max = 1.0;
    double lambda = 0.0;    // consensus spectral radius
    double f_star = 0.0;    // best achievable loss (long centralized run)
    double f0 = 0.0;        // initial loss
    std::size_t rounds = 1; // K

    std::vector<std::string> violations() const;
};

using GradFn = std::function<Vec(const Vec&)>;

// max over sampled pairs of ||g(w) - g(w')|| / ||w - w'||, pairs drawn from
// balls around the supplied anchor points.
double estimate_smoothness(const GradFn& grad, std::size_t dim, const std::vector<Vec>& anchors,
                           std::size_t sample_pairs, std::uint64_t seed);
double estimate_smoothness(const fl::LossModel& model, const fl::Dataset& ds,
                           const std::vector<Vec>& anchors, std::size_t sample_pairs,
                           std::uint64_t seed);

// max over distinct point pairs of ||grad f(w,d) - grad f(w,d')|| / ||d - d'||.
double estimate_variability(const fl::LossModel& model, const Vec& w_probe,
                            const fl::Dataset& ds);

struct DissimilarityFit {
    double zeta1 = 1.0;
    double zeta2 = 0.0;
    double max_slack = 0.0;  // largest RHS - LHS over the probes (>= 0)
};

// Least-slack constants for
//   sum_y a_y ||g_y||^2 <= zeta1 ||sum_y a_y g_y||^2 + zeta2
// over probe gradient sets; zeta1 is fixed at 1 and zeta2 minimized on the
// boundary.
DissimilarityFit fit_dissimilarity(const std::vector<std::vector<Vec>>& per_probe_grads,
                                   const std::vector<double>& weights);

// Sum over entities of the max probe-wise weighted-loss shift between two
// consecutive rounds.
double model_drift(const fl::LossModel& model, const std::vector<fl::Dataset>& prev_shards,
                   const std::vector<fl::Dataset>& cur_shards, const std::vector<Vec>& probes);

// 2 (1 - B/D) (sigma^2 / B) Theta^2.
double sgd_variance_bound(double batch, double data, double sigma_sq, double theta);

struct StepSizeResult {
    double eta = 0.0;
    bool zeta_condition = false;   // eta <= 1/(2 beta) sqrt(1/((4 zeta1+1) e_max (e_max-1)))
    bool data_condition = false;   // eta <= D / (2 beta sum_y D_y e_y)
    bool valid() const { return zeta_condition && data_condition; }
};

StepSizeResult step_size(double alpha, std::size_t rounds, double e_avg, double beta, double zeta1,
                         double e_max, double total_data, double sum_data_epochs);

struct BoundTerms {
    double leading = 0.0;
    double drift = 0.0;        // (a)
    double variance = 0.0;     // (b)
    double dissimilarity = 0.0;  // (c)
    double consensus = 0.0;    // (d)
    double batch_tail = 0.0;   // (e)
    double total() const {
        return leading + drift + variance + dissimilarity + consensus + batch_tail;
    }
};

struct RoundTermRow {
    std::size_t round = 0;
    BoundTerms terms;
    double measured_grad_sq = 0.0;
};

struct Theorem1Result {
    BoundTerms totals;
    std::vector<RoundTermRow> per_round;
    double measured_mean_grad_sq = 0.0;
    bool holds = false;  // bound >= measured mean
};

// Per-entity per-round statistics consumed by the bound.
struct EntityRoundStat {
    double data_size = 0.0;
    double epochs = 1.0;
    double batch = 1.0;
    double sigma_sq = 0.0;
    double theta = 0.0;
};

struct RoundInputs {
    double round_data = 0.0;  // D^(k)
    std::vector<EntityRoundStat> entities;
    double drift = 0.0;       // Delta^(k)
    double lambda = 0.0;
    std::size_t phi = 0;
    double divergence = 0.0;  // Xi^(k)
    double e_max = 1.0;
    double measured_grad_sq = 0.0;
};

Theorem1Result theorem1_bound(const AnalysisConstants& constants,
                              const std::vector<RoundInputs>& rounds, std::size_t num_es);

struct Corollary1Result {
    BoundTerms terms;  // drift slot holds the Upsilon term, consensus the 24 xi / sqrt(K) term
    double total = 0.0;
    std::vector<std::string> failed_preconditions;
};

Corollary1Result corollary1_bound(const AnalysisConstants& constants,
                                  const std::vector<RoundInputs>& rounds,
                                  std::size_t min_phi_required);

// Oracle-estimated constants plus per-round inputs from a finished run.
struct RunAnalysis {
    AnalysisConstants constants;
    std::vector<RoundInputs> rounds;
};

RunAnalysis analyze_run(const bfl::Scenario& scenario, const std::vector<bfl::RoundRecord>& records,
                        double f_star);

}  // namespace bflsim::analysis
