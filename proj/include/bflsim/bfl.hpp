#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "bflsim/chain.hpp"
#include "bflsim/consensus.hpp"
#include "bflsim/dataset.hpp"
#include "bflsim/env.hpp"
#include "bflsim/latency.hpp"
#include "bflsim/loss.hpp"
#include "bflsim/params.hpp"
#include "bflsim/train.hpp"

namespace bflsim::drl {
class Agent;
}

namespace bflsim::bfl {

struct NodeWeight {
    double data_size = 0.0;
    double epochs = 1.0;
};

struct MdGradient {
    Vec grad;
    double data_size = 0.0;
    double epochs = 1.0;
};

// Per-ES aggregated gradient: data/epoch-weighted sum of the locally
// uploaded cumulative gradients plus the ES's own (when it trained offloaded
// data), all normalized by the round-total data size.
Vec aggregate_gradients(const std::optional<MdGradient>& es_term,
                        const std::vector<MdGradient>& md_terms, double total_data);

// (sum_y D_y e_y / sum_y D_y) * final_grad over every entity that trained.
Vec boost(const Vec& final_grad, const std::vector<NodeWeight>& weights);

Vec global_update(const Vec& w, double eta, const Vec& boosted);

// argmin of the previous round's per-ES mining latency, ties to the lowest
// index; an empty history (round 0) selects ES 0.
std::size_t select_leader(const std::vector<double>& prev_mining_latency);

enum class Mode {
    consensus,     // the full scheme
    no_consensus,  // random leader applies only its own aggregate
    isolated,      // every ES trains its constituency independently
};

enum class PolicySource { fixed_local, random, greedy, agent };

struct Scenario {
    fl::LossModel model;
    std::vector<fl::Dataset> md_shards;  // per-MD training data
    fl::Dataset test_set;

    SystemParams params;
    consensus::Topology topology;
    double mixing = 0.0;  // <= 0 selects the default 0.9/M
    std::size_t phi = 5;

    double md_epochs = 2;
    double es_epochs = 2;
    double batch_ratio = 1.0;
    double eta = 0.05;
    bool theorem_step_schedule = false;  // eta_k = alpha / sqrt(K * e_avg)
    double alpha = 1.0;

    Mode mode = Mode::consensus;
    chain::AttackSpec attack;  // scale 0 disables
    bool detection = false;
    std::size_t detect_window = 10;
    double detect_z = 3.0;

    std::uint64_t seed = 1;

    void validate() const;
};

struct EntityStat {
    std::size_t entity = 0;  // MDs are 0..N-1, ESs N..N+M-1
    double data_size = 0.0;
    double epochs = 1.0;
    double batch = 1.0;
};

struct RoundRecord {
    std::size_t round = 0;
    Vec w_before;
    Vec w_after;
    ParamAction assignment;
    std::vector<Vec> aggregated;       // per ES (empty vec when idle)
    std::vector<Vec> consensus_final;  // per ES
    Vec boosted;
    double eta = 0.0;
    std::size_t leader = 0;
    double global_loss = 0.0;
    double test_accuracy = 0.0;
    latency::Breakdown breakdown;
    double reward = 0.0;
    double divergence = 0.0;  // Xi over the participating ESs
    double lambda = 0.0;
    std::size_t phi = 0;
    double grad_norm_sq = 0.0;  // full-batch global gradient at w_before
    std::vector<EntityStat> stats;
    std::vector<double> es_update_norm;
    std::set<std::size_t> flagged;
};

// Executes Algorithm-1 rounds over a shared blockchain.  Holds the per-ES
// broadcast models so a compromised ES can hand its constituency a poisoned
// copy.
class BflRunner {
public:
    BflRunner(Scenario scenario, std::size_t total_rounds);

    const Scenario& scenario() const { return scenario_; }
    const chain::Ledger& ledger() const { return ledger_; }
    const Vec& global_model() const { return w_; }
    env::BflEnv& environment() { return *env_; }

    RoundRecord run_round(std::size_t round, const ParamAction& assignment);

    // Per-round offload decisions for the requested source; `agent` may be
    // null for the non-agent sources.
    ParamAction decide(std::size_t round, PolicySource source, const drl::Agent* agent);

private:
    double step_size(std::size_t round) const;

    Scenario scenario_;
    std::size_t total_rounds_;
    std::size_t num_md_;
    std::size_t num_es_;
    Vec w_;                          // chain model
    std::vector<Vec> es_model_;      // what each ES last rebroadcast
    std::vector<Vec> es_model_iso_;  // isolated-mode per-ES models
    consensus::ConsensusMatrix weights_;
    double lambda_ = 0.0;
    chain::Ledger ledger_;
    std::vector<std::vector<double>> es_norm_history_;
    std::unique_ptr<env::BflEnv> env_;
};

struct TrainingRun {
    std::vector<RoundRecord> records;
    chain::Ledger ledger;
    Vec final_model;

    std::vector<double> loss_trace() const;
};

TrainingRun run_training(const Scenario& scenario, std::size_t rounds, PolicySource source,
                         std::uint64_t seed, const drl::Agent* agent = nullptr);

// Standard non-IID fixture: synthetic classed clusters, one label per MD
// (alternating), local training everywhere.
Scenario make_fixture(std::size_t num_md, std::size_t num_es, std::size_t channels,
                      std::size_t classes, std::size_t points_per_class, std::size_t phi,
                      std::uint64_t seed);

}  // namespace bflsim::bfl
