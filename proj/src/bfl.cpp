#include "bflsim/bfl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bflsim/agent.hpp"
#include "bflsim/rng.hpp"

namespace bflsim::bfl {

Vec aggregate_gradients(const std::optional<MdGradient>& es_term,
                        const std::vector<MdGradient>& md_terms, double total_data) {
    if (!(total_data > 0.0)) throw std::invalid_argument("aggregate_gradients: total data size is 0");
    std::size_t dim = 0;
    if (es_term)
        dim = es_term->grad.size();
    else if (!md_terms.empty())
        dim = md_terms.front().grad.size();
    Vec out(dim, 0.0);
    auto accumulate = [&](const MdGradient& term) {
        if (term.grad.size() != dim)
            throw std::invalid_argument("aggregate_gradients: gradient dimension mismatch");
        if (!(term.epochs >= 1.0))
            throw std::invalid_argument("aggregate_gradients: epochs >= 1 required");
        axpy(term.data_size / (total_data * term.epochs), term.grad, out);
    };
    for (const auto& t : md_terms) accumulate(t);
    if (es_term) accumulate(*es_term);
    return out;
}

Vec boost(const Vec& final_grad, const std::vector<NodeWeight>& weights) {
    if (weights.empty()) throw std::invalid_argument("boost: weights must be non-empty");
    double num = 0.0, den = 0.0;
    for (const auto& w : weights) {
        num += w.data_size * w.epochs;
        den += w.data_size;
    }
    if (!(den > 0.0)) throw std::invalid_argument("boost: total data size is 0");
    return scaled(final_grad, num / den);
}

Vec global_update(const Vec& w, double eta, const Vec& boosted) {
    check_same_dim(w, boosted, "global_update");
    Vec out = w;
    axpy(-eta, boosted, out);
    return out;
}

std::size_t select_leader(const std::vector<double>& prev_mining_latency) {
    if (prev_mining_latency.empty()) return 0;
    std::size_t best = 0;
    for (std::size_t m = 1; m < prev_mining_latency.size(); ++m)
        if (prev_mining_latency[m] < prev_mining_latency[best]) best = m;
    return best;
}

void Scenario::validate() const {
    if (md_shards.size() != params.num_md)
        throw std::invalid_argument("Scenario: one shard per MD required");
    if (params.num_es > 1 && topology.nodes != params.num_es)
        throw std::invalid_argument("Scenario: topology size must match the ES count");
    if (!(md_epochs >= 1) || !(es_epochs >= 1))
        throw std::invalid_argument("Scenario: epochs >= 1 required");
    if (!(batch_ratio > 0.0) || batch_ratio > 1.0)
        throw std::invalid_argument("Scenario: batch_ratio in (0, 1] required");
    if (eta < 0.0) throw std::invalid_argument("Scenario: eta >= 0 required");
    if (attack.scale > 0.0 && attack.attacked_es >= params.num_es)
        throw std::invalid_argument("Scenario: attacked ES out of range");
}

namespace {

env::EnvConfig env_config_for(const Scenario& s) {
    env::EnvConfig cfg;
    cfg.tau = 3.0 * static_cast<double>(s.params.num_md);
    return cfg;
}

}  // namespace

BflRunner::BflRunner(Scenario scenario, std::size_t total_rounds)
    : scenario_(std::move(scenario)),
      total_rounds_(total_rounds),
      num_md_(scenario_.params.num_md),
      num_es_(scenario_.params.num_es) {
    scenario_.params.finalize();
    scenario_.params.validate();
    scenario_.validate();
    env_ = std::make_unique<env::BflEnv>(scenario_.params, env_config_for(scenario_));

    w_.assign(scenario_.model.dim(), 0.0);
    es_model_.assign(num_es_, w_);
    es_model_iso_.assign(num_es_, w_);
    es_norm_history_.assign(num_es_, {});

    const double mixing =
        scenario_.mixing > 0.0 ? scenario_.mixing : 0.9 / static_cast<double>(num_es_);
    if (num_es_ > 1) {
        weights_ = consensus::build_weights(scenario_.topology, mixing);
        lambda_ = consensus::spectral_gap(weights_);
    }
    env_->reset(0);
}

double BflRunner::step_size(std::size_t round) const {
    (void)round;
    if (!scenario_.theorem_step_schedule) return scenario_.eta;
    const double e_avg = 0.5 * (scenario_.md_epochs + scenario_.es_epochs);
    return scenario_.alpha / std::sqrt(static_cast<double>(total_rounds_) * e_avg);
}

ParamAction BflRunner::decide(std::size_t round, PolicySource source, const drl::Agent* agent) {
    const SystemParams& p = scenario_.params;
    switch (source) {
        case PolicySource::fixed_local: {
            ParamAction a(num_md_);
            const double e_gen = latency::energy_mine(p.joules_per_hash, p.hash_work);
            for (std::size_t n = 0; n < num_md_; ++n) {
                a[n].choice = 0;
                const double budget = p.md_energy_budget_j[n] - e_gen;
                a[n].cpu_hz =
                    std::min(p.md_max_cpu_hz[n],
                             std::sqrt(budget / (p.kappa * p.md_cycles_per_point[n])));
                // Per-round hash-market allocation.
                Rng rng = Rng::stream(scenario_.seed, n, round, "hash-market");
                a[n].hash_rate = rng.uniform(0.1, 1.0) * p.hash_cap;
            }
            return env::project_action(a, p);
        }
        case PolicySource::random: {
            Rng rng = Rng::stream(scenario_.seed, 0, round, "assign-random");
            return drl::random_action(p, rng);
        }
        case PolicySource::greedy:
            return drl::greedy_action(*env_);
        case PolicySource::agent: {
            if (!agent) throw std::invalid_argument("decide: agent source without an agent");
            const auto scaler = drl::ObsScaler::for_params(p);
            Rng rng = Rng::stream(scenario_.seed, 0, round, "assign-agent");
            const auto sample =
                agent->policy().sample_action(scaler.apply(env_->observe().flatten()), rng, true);
            return env::project_action(agent->policy().to_param_action(sample), p);
        }
    }
    throw std::logic_error("decide: unknown policy source");
}

RoundRecord BflRunner::run_round(std::size_t round, const ParamAction& assignment) {
    const auto violations = env::check_constraints(assignment, scenario_.params);
    if (!violations.empty())
        throw std::invalid_argument("run_round: infeasible assignment: " + violations.front());

    RoundRecord rec;
    rec.round = round;
    rec.w_before = w_;
    rec.eta = step_size(round);
    rec.phi = scenario_.phi;
    rec.lambda = lambda_;
    rec.grad_norm_sq = norm2_sq(fl::global_grad(scenario_.model, w_, scenario_.md_shards));

    // Latency/energy accounting; the executed assignment may demote
    // energy-infeasible offloads, so data routing follows the effective one.
    auto step_res = env_->step(assignment);
    rec.assignment = step_res.effective;
    rec.breakdown = std::move(step_res.info);
    rec.reward = step_res.reward;

    const double eta = rec.eta;
    const auto& model = scenario_.model;
    const std::size_t dim = model.dim();
    const bool isolated = scenario_.mode == Mode::isolated;

    double total_data = 0.0;
    for (const auto& shard : scenario_.md_shards) total_data += static_cast<double>(shard.size());
    if (!(total_data > 0.0)) throw std::invalid_argument("run_round: no training data");

    auto train_entity = [&](const Vec& start, const fl::Dataset& ds, double epochs,
                            std::size_t entity) {
        fl::TrainerConfig cfg;
        cfg.epochs = static_cast<std::size_t>(epochs);
        cfg.batch_ratio = scenario_.batch_ratio;
        cfg.step_size = eta;
        cfg.seed = scenario_.seed;
        cfg.entity_id = entity;
        cfg.round = round;
        const auto res = fl::sgd_round(model, start, ds, cfg);
        return eta == 0.0 ? Vec(dim, 0.0) : fl::cumulative_gradient(start, res.w, eta);
    };

    auto batch_of = [&](std::size_t size) {
        fl::TrainerConfig probe;
        probe.batch_ratio = scenario_.batch_ratio;
        return static_cast<double>(probe.batch_size(size));
    };

    // MDs train from their parent ES's broadcast copy; offloaded shards pool
    // at the target ES, which trains the union from its own copy.
    std::vector<fl::Dataset> es_pool(num_es_);
    std::vector<std::vector<MdGradient>> md_terms(num_es_);
    std::vector<EntityStat> stats;
    for (std::size_t n = 0; n < num_md_; ++n) {
        const auto& a = rec.assignment[n];
        const auto& shard = scenario_.md_shards[n];
        if (shard.empty()) throw std::invalid_argument("run_round: MD with an empty shard");
        if (a.offloads()) {
            const std::size_t target = a.target_es(scenario_.params.channels);
            es_pool[target].points.insert(es_pool[target].points.end(), shard.points.begin(),
                                          shard.points.end());
        } else {
            const std::size_t parent = scenario_.params.md_parent_es(n);
            const Vec& start = isolated ? es_model_iso_[parent] : es_model_[parent];
            MdGradient g;
            g.grad = train_entity(start, shard, scenario_.md_epochs, n);
            g.data_size = static_cast<double>(shard.size());
            g.epochs = scenario_.md_epochs;
            md_terms[parent].push_back(std::move(g));
            stats.push_back({n, static_cast<double>(shard.size()), scenario_.md_epochs,
                             batch_of(shard.size())});
        }
    }

    rec.aggregated.assign(num_es_, Vec());
    rec.es_update_norm.assign(num_es_, 0.0);
    for (std::size_t m = 0; m < num_es_; ++m) {
        std::optional<MdGradient> es_term;
        if (!es_pool[m].empty()) {
            const Vec& start = isolated ? es_model_iso_[m] : es_model_[m];
            MdGradient g;
            g.grad = train_entity(start, es_pool[m], scenario_.es_epochs, num_md_ + m);
            g.data_size = static_cast<double>(es_pool[m].size());
            g.epochs = scenario_.es_epochs;
            stats.push_back({num_md_ + m, g.data_size, scenario_.es_epochs,
                             batch_of(es_pool[m].size())});
            es_term = std::move(g);
        }
        if (es_term || !md_terms[m].empty()) {
            double norm_data = total_data;
            if (isolated) {
                norm_data = es_term ? es_term->data_size : 0.0;
                for (const auto& t : md_terms[m]) norm_data += t.data_size;
            }
            rec.aggregated[m] = aggregate_gradients(es_term, md_terms[m], norm_data);
        } else {
            rec.aggregated[m] = Vec(dim, 0.0);
        }
        rec.es_update_norm[m] = norm2(rec.aggregated[m]);
        es_norm_history_[m].push_back(rec.es_update_norm[m]);
    }
    rec.stats = std::move(stats);

    // Ledger-based anomaly screening over the recorded update norms.
    if (scenario_.detection)
        rec.flagged =
            chain::detect_poison(es_norm_history_, scenario_.detect_window, scenario_.detect_z);

    if (isolated) {
        // Every ES applies its own boosted aggregate to its own model; the
        // reported loss is the data-weighted mean over the ES models.
        double weighted_loss = 0.0, weighted_acc = 0.0;
        for (std::size_t m = 0; m < num_es_; ++m) {
            std::vector<NodeWeight> weights;
            for (const auto& t : md_terms[m]) weights.push_back({t.data_size, t.epochs});
            if (!es_pool[m].empty())
                weights.push_back({static_cast<double>(es_pool[m].size()), scenario_.es_epochs});
            double share = 0.0;
            for (const auto& w : weights) share += w.data_size;
            if (!weights.empty())
                es_model_iso_[m] =
                    global_update(es_model_iso_[m], eta, boost(rec.aggregated[m], weights));
            share /= total_data;
            weighted_loss += share * fl::global_loss(model, es_model_iso_[m], scenario_.md_shards);
            if (!scenario_.test_set.empty())
                weighted_acc += share * model.accuracy(es_model_iso_[m], scenario_.test_set);
        }
        rec.consensus_final = rec.aggregated;
        rec.boosted = Vec(dim, 0.0);
        rec.w_after = w_;
        rec.global_loss = weighted_loss;
        rec.test_accuracy = weighted_acc;
        rec.leader = 0;
    } else {
        std::vector<std::size_t> participants;
        for (std::size_t m = 0; m < num_es_; ++m)
            if (!rec.flagged.count(m)) participants.push_back(m);
        if (participants.empty())
            throw std::runtime_error("run_round: every ES was flagged, cannot aggregate");

        std::vector<Vec> states;
        states.reserve(participants.size());
        for (std::size_t m : participants) states.push_back(rec.aggregated[m]);
        rec.divergence = consensus::gradient_divergence(states);

        rec.consensus_final = rec.aggregated;
        if (scenario_.mode == Mode::consensus && participants.size() > 1) {
            consensus::ConsensusMatrix cm = weights_;
            if (participants.size() != num_es_) {
                // Induced subgraph; the P2P overlay falls back to a complete
                // mesh when exclusion disconnects it.
                consensus::Topology sub;
                sub.nodes = participants.size();
                for (std::size_t i = 0; i < participants.size(); ++i)
                    for (std::size_t j = i + 1; j < participants.size(); ++j) {
                        const auto u = std::min(participants[i], participants[j]);
                        const auto v = std::max(participants[i], participants[j]);
                        if (scenario_.topology.edges.count({u, v})) sub.add_edge(i, j);
                    }
                if (!sub.connected()) sub = consensus::Topology::complete(participants.size());
                cm = consensus::build_weights(sub, 0.9 / static_cast<double>(sub.nodes));
            }
            const auto run = consensus::run_consensus(states, cm, scenario_.phi);
            for (std::size_t i = 0; i < participants.size(); ++i)
                rec.consensus_final[participants[i]] = run.states[i];
        }

        // Leader: reputation by the previous round's fastest block; a seeded
        // draw for the no-consensus baseline.  Flagged ESs cannot lead.
        std::size_t leader;
        if (scenario_.mode == Mode::no_consensus) {
            Rng rng = Rng::stream(scenario_.seed, 0, round, "leader-draw");
            leader = participants[rng.index(participants.size())];
        } else if (ledger_.winner_latency.empty()) {
            leader = participants.front();
        } else {
            std::vector<double> latencies = ledger_.winner_latency.back();
            for (std::size_t m : rec.flagged) latencies[m] = std::numeric_limits<double>::max();
            leader = select_leader(latencies);
        }
        rec.leader = leader;

        std::vector<NodeWeight> weights;
        for (const auto& s : rec.stats) weights.push_back({s.data_size, s.epochs});
        const Vec& final_grad = scenario_.mode == Mode::consensus ? rec.consensus_final[leader]
                                                                  : rec.aggregated[leader];
        rec.boosted = boost(final_grad, weights);
        rec.w_after = global_update(w_, eta, rec.boosted);
        w_ = rec.w_after;

        rec.global_loss = fl::global_loss(model, w_, scenario_.md_shards);
        if (!scenario_.test_set.empty())
            rec.test_accuracy = model.accuracy(w_, scenario_.test_set);
    }

    // Mining race over the per-MD latencies, then block publication.
    const auto race = chain::mine_race(rec.breakdown.t_mine_md);
    chain::Payload payload;
    payload.role = chain::PayloadRole::global_model;
    payload.values = rec.w_after;
    ledger_.blocks.push_back(chain::make_block(
        payload, ledger_, race.winner, static_cast<std::uint64_t>(scenario_.params.tx_count)));
    std::vector<double> per_es_latency(num_es_, std::numeric_limits<double>::max());
    for (std::size_t n = 0; n < num_md_; ++n) {
        const std::size_t parent = scenario_.params.md_parent_es(n);
        per_es_latency[parent] = std::min(per_es_latency[parent], rec.breakdown.t_mine_md[n]);
    }
    ledger_.winner_latency.push_back(per_es_latency);

    // Rebroadcast; a compromised ES hands its constituency a poisoned copy.
    if (!isolated) {
        for (auto& m : es_model_) m = w_;
        if (scenario_.attack.active(round)) {
            es_model_[scenario_.attack.attacked_es] = chain::poison_model(
                w_, scenario_.attack.scale, scenario_.attack.noise_seed + round);
        }
    }
    return rec;
}

std::vector<double> TrainingRun::loss_trace() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.global_loss);
    return out;
}

TrainingRun run_training(const Scenario& scenario, std::size_t rounds, PolicySource source,
                         std::uint64_t seed, const drl::Agent* agent) {
    Scenario s = scenario;
    s.seed = seed;
    s.params.seed = seed;
    BflRunner runner(s, rounds);
    TrainingRun run;
    run.records.reserve(rounds);
    for (std::size_t k = 0; k < rounds; ++k) {
        const auto assignment = runner.decide(k, source, agent);
        run.records.push_back(runner.run_round(k, assignment));
    }
    run.ledger = runner.ledger();
    run.final_model = runner.global_model();
    return run;
}

Scenario make_fixture(std::size_t num_md, std::size_t num_es, std::size_t channels,
                      std::size_t classes, std::size_t points_per_class, std::size_t phi,
                      std::uint64_t seed) {
    Scenario s;
    s.model = fl::LossModel::softmax(2, classes);
    const auto full = fl::make_synthetic_dataset(2, classes, points_per_class, 1.0, seed);
    auto [train, test] = fl::split_train_test(full, 0.2, seed);
    s.md_shards = fl::partition_noniid(train, num_md, 1, seed);
    s.test_set = std::move(test);

    s.params.num_md = num_md;
    s.params.num_es = num_es;
    s.params.channels = channels;
    s.params.seed = seed;
    s.params.md_data_points.assign(num_md, 0.0);
    for (std::size_t n = 0; n < num_md; ++n)
        s.params.md_data_points[n] = static_cast<double>(s.md_shards[n].size());
    s.params.finalize();

    if (num_es > 1) s.topology = consensus::Topology::ring(num_es);
    s.topology.nodes = num_es;
    s.phi = phi;
    s.md_epochs = 2;
    s.es_epochs = 2;
    s.batch_ratio = 1.0;
    s.eta = 0.1;
    s.seed = seed;
    return s;
}

}  // namespace bflsim::bfl
