#include "bflsim/runner.hpp"

#include <openssl/sha.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "bflsim/agent.hpp"
#include "bflsim/analysis.hpp"
#include "bflsim/version.hpp"

namespace fs = std::filesystem;

namespace bflsim::runner {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::size_t thread_budget() {
    const char* env = std::getenv("BFLSIM_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    return v < 1 ? 1 : static_cast<std::size_t>(v);
}

namespace {

std::string sha256_hex(const std::string& text) {
    unsigned char d[32];
    SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), d);
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (unsigned char b : d) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::string git_describe() {
    FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r");
    if (!pipe) return "unknown";
    char buf[128] = {0};
    std::string out;
    while (fgets(buf, sizeof(buf), pipe)) out += buf;
    pclose(pipe);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out.empty() ? "unknown" : out;
}

class Manifest {
public:
    Manifest(const RunOptions& opts, std::uint64_t seed)
        : opts_(opts), seed_(seed), start_(std::chrono::steady_clock::now()) {}

    ~Manifest() { write(); }

private:
    void write() const {
        std::ofstream out(fs::path(opts_.out_dir) / "manifest.txt");
        const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char timestr[64];
        std::strftime(timestr, sizeof(timestr), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out << "version=" << kVersion << "\n"
            << "git=" << git_describe() << "\n"
            << "config_sha256=" << sha256_hex(opts_.config_text) << "\n"
            << "seed=" << seed_ << "\n"
            << "finished_at=" << timestr << "\n"
            << "wall_seconds=" << format_double(wall.count()) << "\n";
    }

    const RunOptions& opts_;
    std::uint64_t seed_;
    std::chrono::steady_clock::time_point start_;
};

void prepare_out_dir(const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    if (!opts.config_text.empty()) {
        std::ofstream cfg(fs::path(opts.out_dir) / "config.cfg");
        cfg << opts.config_text;
    }
}

std::ofstream open_csv(const RunOptions& opts, const std::string& name) {
    std::ofstream out(fs::path(opts.out_dir) / name);
    if (!out) throw std::runtime_error("cannot open output file " + name);
    return out;
}

void write_rounds_csv(std::ofstream& out, const std::vector<bfl::RoundRecord>& records) {
    out << "round,global_loss,test_acc,T_learn,T_cons,T_mine,U,leader\n";
    for (const auto& r : records) {
        out << r.round << ',' << format_double(r.global_loss) << ','
            << format_double(r.test_accuracy) << ',' << format_double(r.breakdown.t_learn) << ','
            << format_double(r.breakdown.t_cons) << ',' << format_double(r.breakdown.t_mine)
            << ',' << format_double(r.reward) << ',' << r.leader << '\n';
    }
}

void write_run_stats(std::ofstream& out, const std::vector<bfl::RoundRecord>& records) {
    out << "round,eta,lambda,phi,divergence,grad_norm_sq,flagged,leader";
    if (!records.empty()) {
        for (std::size_t i = 0; i < records.front().w_before.size(); ++i) out << ",w" << i;
    }
    out << '\n';
    for (const auto& r : records) {
        out << r.round << ',' << format_double(r.eta) << ',' << format_double(r.lambda) << ','
            << r.phi << ',' << format_double(r.divergence) << ','
            << format_double(r.grad_norm_sq) << ',' << r.flagged.size() << ',' << r.leader;
        for (double v : r.w_before) out << ',' << format_double(v);
        out << '\n';
    }
}

}  // namespace

CentralizedResult centralized_gd(const fl::LossModel& model, const fl::Dataset& pooled,
                                 std::size_t steps, double eta) {
    CentralizedResult res;
    res.w.assign(model.dim(), 0.0);
    res.best_loss = model.mean_loss(res.w, pooled);
    res.trace.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const Vec g = model.mean_grad(res.w, pooled);
        axpy(-eta, g, res.w);
        const double loss = model.mean_loss(res.w, pooled);
        res.trace.push_back(loss);
        res.best_loss = std::min(res.best_loss, loss);
    }
    return res;
}

void fl_train(const config::ScenarioConfig& cfg, const RunOptions& opts) {
    prepare_out_dir(opts);
    Manifest manifest(opts, cfg.seed);

    auto scenario = cfg.to_scenario();
    std::unique_ptr<drl::Agent> agent;
    if (cfg.policy == bfl::PolicySource::agent) {
        if (opts.checkpoint.empty())
            throw std::runtime_error("fl-train with policy rl-agent needs --checkpoint");
        agent = std::make_unique<drl::Agent>(
            drl::Agent::load(opts.checkpoint, scenario.params, cfg.trpo));
    }
    const auto run = bfl::run_training(scenario, cfg.rounds, cfg.policy, cfg.seed, agent.get());

    auto rounds_csv = open_csv(opts, "rounds.csv");
    write_rounds_csv(rounds_csv, run.records);
    auto stats_csv = open_csv(opts, "run_stats.csv");
    write_run_stats(stats_csv, run.records);
    run.ledger.export_jsonl((fs::path(opts.out_dir) / "ledger.jsonl").string());

    // Consensus error trace of the final round's aggregates.
    if (scenario.params.num_es > 1 && scenario.mode == bfl::Mode::consensus && cfg.phi > 0) {
        const auto& rec = run.records.back();
        const auto cm = consensus::build_weights(
            scenario.topology,
            scenario.mixing > 0.0 ? scenario.mixing : 0.9 / static_cast<double>(cfg.n_ess));
        const auto trace = consensus::run_consensus(rec.aggregated, cm, cfg.phi);
        consensus::write_trace_csv(trace, (fs::path(opts.out_dir) / "consensus_trace.csv").string());
    }

    if (!opts.quiet) {
        const auto& last = run.records.back();
        std::cout << "fl-train: " << cfg.rounds << " rounds, final loss "
                  << format_double(last.global_loss) << ", test acc "
                  << format_double(last.test_accuracy) << "\n";
        if (last.global_loss > cfg.loss_eps)
            std::cout << "note: final loss exceeds the quality threshold loss_eps="
                      << format_double(cfg.loss_eps) << "\n";
    }
}

void rl_train(const config::ScenarioConfig& cfg, const RunOptions& opts) {
    prepare_out_dir(opts);
    Manifest manifest(opts, cfg.seed);

    const auto scenario = cfg.to_scenario();
    env::BflEnv environment(scenario.params, cfg.to_env_config());
    drl::Agent agent(scenario.params, cfg.trpo, cfg.seed);
    const auto rows = agent.train(environment, cfg.episodes, cfg.steps, cfg.seed);

    auto curve = open_csv(opts, "rl_train.csv");
    curve << "episode,mean_reward,kl,surrogate,backtracks,critic_loss\n";
    for (const auto& r : rows) {
        curve << r.episode << ',' << format_double(r.mean_reward) << ',' << format_double(r.kl)
              << ',' << format_double(r.surrogate) << ',' << r.backtracks << ','
              << format_double(r.critic_loss) << '\n';
    }
    agent.save((fs::path(opts.out_dir) / "checkpoint.bin").string());

    // Deterministic evaluation traces plus the two reference policies.
    std::vector<drl::EvalTraceRow> trace;
    const double trained = agent.evaluate(environment, 10, cfg.steps, cfg.seed + 1, &trace);
    auto trace_csv = open_csv(opts, "episode_trace.csv");
    trace_csv << "episode,t,reward,T_learn,T_cons,T_mine,violations\n";
    for (const auto& t : trace) {
        trace_csv << t.episode << ',' << t.t << ',' << format_double(t.reward) << ','
                  << format_double(t.t_learn) << ',' << format_double(t.t_cons) << ','
                  << format_double(t.t_mine) << ',' << t.violations << '\n';
    }
    const double random_ref =
        drl::evaluate_random_policy(environment, 10, cfg.steps, cfg.seed + 1);
    const double greedy_ref =
        drl::evaluate_greedy_policy(environment, 10, cfg.steps, cfg.seed + 1);
    auto summary = open_csv(opts, "summary.csv");
    summary << "policy,mean_reward\n"
            << "trained," << format_double(trained) << '\n'
            << "random," << format_double(random_ref) << '\n'
            << "greedy," << format_double(greedy_ref) << '\n';
    if (!opts.quiet)
        std::cout << "rl-train: trained " << format_double(trained) << ", random "
                  << format_double(random_ref) << ", greedy " << format_double(greedy_ref)
                  << "\n";
}

void sweep(const config::ScenarioConfig& cfg, const RunOptions& opts, const std::string& param,
           const std::vector<double>& values) {
    if (values.empty()) throw std::runtime_error("sweep: no values given");
    prepare_out_dir(opts);
    Manifest manifest(opts, cfg.seed);

    auto apply = [&](config::ScenarioConfig base, double v) {
        if (param == "phi")
            base.phi = static_cast<std::size_t>(v);
        else if (param == "n_mds")
            base.n_mds = static_cast<std::size_t>(v);
        else if (param == "power")
            base.max_power_w.assign(1, std::pow(10.0, (v - 30.0) / 10.0));  // value in dBm
        else if (param == "bandwidth")
            base.bandwidth_hz = v * 1e6;  // value in MHz
        else if (param == "hash")
            base.hash_cap = v * 1e9;  // value in GHash/s
        else
            throw std::runtime_error("sweep: unknown parameter '" + param +
                                     "' (phi|n_mds|power|bandwidth|hash)");
        return base;
    };

    struct Point {
        double value = 0.0;
        double final_loss = 0.0;
        double t_learn = 0.0, t_cons = 0.0, t_mine = 0.0, objective = 0.0;
    };
    std::vector<Point> points(values.size());

    const std::size_t budget = std::min(thread_budget(), values.size());
    std::vector<std::thread> workers;
    std::size_t next = 0;
    std::mutex mu;
    auto work = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= values.size()) return;
                i = next++;
            }
            const auto point_cfg = apply(cfg, values[i]);
            RunOptions sub = opts;
            sub.out_dir = (fs::path(opts.out_dir) /
                           (param + "_" + format_double(values[i])))
                              .string();
            sub.quiet = true;
            fl_train(point_cfg, sub);

            const auto scenario = point_cfg.to_scenario();
            const auto run = bfl::run_training(scenario, point_cfg.rounds, point_cfg.policy,
                                               point_cfg.seed, nullptr);
            Point pt;
            pt.value = values[i];
            pt.final_loss = run.records.back().global_loss;
            for (const auto& r : run.records) {
                pt.t_learn += r.breakdown.t_learn / static_cast<double>(run.records.size());
                pt.t_cons += r.breakdown.t_cons / static_cast<double>(run.records.size());
                pt.t_mine += r.breakdown.t_mine / static_cast<double>(run.records.size());
                pt.objective += r.breakdown.objective() / static_cast<double>(run.records.size());
            }
            points[i] = pt;
        }
    };
    for (std::size_t t = 0; t < budget; ++t) workers.emplace_back(work);
    for (auto& w : workers) w.join();

    auto out = open_csv(opts, "sweep_summary.csv");
    out << param << ",final_loss,T_learn,T_cons,T_mine,objective\n";
    for (const auto& p : points) {
        out << format_double(p.value) << ',' << format_double(p.final_loss) << ','
            << format_double(p.t_learn) << ',' << format_double(p.t_cons) << ','
            << format_double(p.t_mine) << ',' << format_double(p.objective) << '\n';
    }
    if (!opts.quiet) std::cout << "sweep: " << values.size() << " points written\n";
}

void attack(const config::ScenarioConfig& cfg, const RunOptions& opts) {
    prepare_out_dir(opts);
    Manifest manifest(opts, cfg.seed);

    auto run_variant = [&](bool attack_on, bool detection_on, const std::string& name) {
        config::ScenarioConfig variant = cfg;
        variant.attack_enabled = attack_on;
        variant.detection = detection_on;
        auto scenario = variant.to_scenario();
        const auto run =
            bfl::run_training(scenario, variant.rounds, variant.policy, variant.seed, nullptr);
        auto csv = open_csv(opts, name);
        write_rounds_csv(csv, run.records);
        return run;
    };

    const auto clean = run_variant(false, false, "clean.csv");
    const auto undefended = run_variant(true, false, "attack_undefended.csv");
    const auto defended = run_variant(true, true, "attack_defended.csv");

    // Spike summary around each attack round.
    auto spike_after = [&](const bfl::TrainingRun& run, std::size_t round) {
        const auto trace = run.loss_trace();
        const double pre = trace[round > 0 ? round - 1 : 0];
        double peak = pre;
        for (std::size_t k = round; k < std::min(trace.size(), round + 6); ++k)
            peak = std::max(peak, trace[k]);
        return peak - pre;
    };
    auto summary = open_csv(opts, "attack_summary.csv");
    summary << "attack_round,spike_undefended,spike_defended,clean_final,undefended_final,"
               "defended_final\n";
    for (std::size_t r : cfg.attack_rounds) {
        summary << r << ',' << format_double(spike_after(undefended, r)) << ','
                << format_double(spike_after(defended, r)) << ','
                << format_double(clean.loss_trace().back()) << ','
                << format_double(undefended.loss_trace().back()) << ','
                << format_double(defended.loss_trace().back()) << '\n';
    }
    if (!opts.quiet) std::cout << "attack: wrote clean/undefended/defended traces\n";
}

void analyze(const std::string& run_dir, const RunOptions& opts) {
    // An fl-train run directory is its own record: the stored config plus
    // the seed reproduce the rounds deterministically, and the stored
    // rounds.csv is checked against the reproduction before analysis.
    std::ifstream cfg_in(fs::path(run_dir) / "config.cfg");
    if (!cfg_in) throw std::runtime_error("analyze: " + run_dir + "/config.cfg not found");
    std::stringstream ss;
    ss << cfg_in.rdbuf();
    RunOptions out_opts = opts;
    if (out_opts.out_dir.empty()) out_opts.out_dir = run_dir;
    out_opts.config_text = ss.str();
    prepare_out_dir(out_opts);
    const auto cfg = config::parse_config_text(out_opts.config_text);
    Manifest manifest(out_opts, cfg.seed);

    auto scenario = cfg.to_scenario();
    const auto run = bfl::run_training(scenario, cfg.rounds, cfg.policy, cfg.seed, nullptr);

    {
        std::ostringstream fresh;
        std::ofstream probe(fs::path(out_opts.out_dir) / ".rounds_check.csv");
        write_rounds_csv(probe, run.records);
        probe.close();
        std::ifstream a(fs::path(run_dir) / "rounds.csv");
        std::ifstream b(fs::path(out_opts.out_dir) / ".rounds_check.csv");
        if (a) {
            std::stringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            if (sa.str() != sb.str())
                throw std::runtime_error(
                    "analyze: stored rounds.csv does not match the deterministic reproduction");
        }
        fs::remove(fs::path(out_opts.out_dir) / ".rounds_check.csv");
    }

    // Reference minimum from a long centralized descent.
    const auto pooled = fl::pool(scenario.md_shards);
    const auto oracle = centralized_gd(scenario.model, pooled, 2000, 0.1);

    const auto ana = analysis::analyze_run(scenario, run.records, oracle.best_loss);
    const auto theorem =
        analysis::theorem1_bound(ana.constants, ana.rounds, scenario.params.num_es);
    const auto corollary =
        analysis::corollary1_bound(ana.constants, ana.rounds, scenario.params.num_es);

    {
        auto js = open_csv(out_opts, "constants.json");
        const auto& c = ana.constants;
        js << "{\n"
           << "  \"beta\": " << format_double(c.beta) << ",\n"
           << "  \"zeta1\": " << format_double(c.zeta1) << ",\n"
           << "  \"zeta2\": " << format_double(c.zeta2) << ",\n"
           << "  \"theta\": " << format_double(c.theta) << ",\n"
           << "  \"upsilon\": " << format_double(c.upsilon) << ",\n"
           << "  \"vartheta\": " << format_double(c.vartheta) << ",\n"
           << "  \"xi_cons\": " << format_double(c.xi_cons) << ",\n"
           << "  \"alpha\": " << format_double(c.alpha) << ",\n"
           << "  \"lambda\": " << format_double(c.lambda) << ",\n"
           << "  \"e_avg_min\": " << format_double(c.e_avg_min) << ",\n"
           << "  \"e_avg_max\": " << format_double(c.e_avg_max) << ",\n"
           << "  \"e_hat_min\": " << format_double(c.e_hat_min) << ",\n"
           << "  \"e_hat_max\": " << format_double(c.e_hat_max) << ",\n"
           << "  \"e_max\": " << format_double(c.e_max) << ",\n"
           << "  \"f0\": " << format_double(c.f0) << ",\n"
           << "  \"f_star\": " << format_double(c.f_star) << ",\n"
           << "  \"rounds\": " << c.rounds << ",\n"
           << "  \"theorem_bound\": " << format_double(theorem.totals.total()) << ",\n"
           << "  \"measured_mean_grad_sq\": " << format_double(theorem.measured_mean_grad_sq)
           << ",\n"
           << "  \"theorem_holds\": " << (theorem.holds ? "true" : "false") << ",\n"
           << "  \"corollary_bound\": " << format_double(corollary.total) << ",\n"
           << "  \"corollary_failed_preconditions\": " << corollary.failed_preconditions.size()
           << "\n}\n";
    }
    {
        auto csv = open_csv(out_opts, "bound_terms.csv");
        csv << "k,leading,a,b,c,d,e,total,measured_grad_sq\n";
        for (const auto& row : theorem.per_round) {
            csv << row.round << ',' << format_double(row.terms.leading) << ','
                << format_double(row.terms.drift) << ',' << format_double(row.terms.variance)
                << ',' << format_double(row.terms.dissimilarity) << ','
                << format_double(row.terms.consensus) << ','
                << format_double(row.terms.batch_tail) << ',' << format_double(row.terms.total())
                << ',' << format_double(row.measured_grad_sq) << '\n';
        }
    }
    if (!opts.quiet)
        std::cout << "analyze: bound " << format_double(theorem.totals.total()) << " vs measured "
                  << format_double(theorem.measured_mean_grad_sq)
                  << (theorem.holds ? " (holds)" : " (violated)") << "\n";
}

void latency_table(const config::ScenarioConfig& cfg, const RunOptions& opts) {
    prepare_out_dir(opts);
    Manifest manifest(opts, cfg.seed);

    auto scenario = cfg.to_scenario();
    env::BflEnv environment(scenario.params, cfg.to_env_config());
    environment.reset(0);
    bfl::BflRunner runner(scenario, 1);
    const auto action = runner.decide(0, cfg.policy, nullptr);
    const auto info = environment.evaluate(action);
    const double utility =
        env::reward(info.t_learn, info.t_cons, info.t_mine, environment.tau());

    std::ostringstream text;
    auto line = [&](const std::string& name, double v) {
        text << "  " << name;
        for (std::size_t i = name.size(); i < 24; ++i) text << ' ';
        text << format_double(v) << '\n';
    };
    text << "latency breakdown (one round)\n";
    for (std::size_t n = 0; n < info.t_off.size(); ++n) line("T_off[md" + std::to_string(n) + "]", info.t_off[n]);
    for (std::size_t m = 0; m < info.t_exe.size(); ++m) line("T_exe[es" + std::to_string(m) + "]", info.t_exe[m]);
    for (std::size_t n = 0; n < info.t_loc.size(); ++n) line("T_loc[md" + std::to_string(n) + "]", info.t_loc[n]);
    for (std::size_t n = 0; n < info.t_up.size(); ++n) line("T_up[md" + std::to_string(n) + "]", info.t_up[n]);
    for (std::size_t n = 0; n < info.t_mine_md.size(); ++n)
        line("T_mine[md" + std::to_string(n) + "]", info.t_mine_md[n]);
    for (std::size_t n = 0; n < info.e_off.size(); ++n) {
        line("E_off[md" + std::to_string(n) + "]", info.e_off[n]);
        line("E_loc[md" + std::to_string(n) + "]", info.e_loc[n]);
        line("E_gen[md" + std::to_string(n) + "]", info.e_gen[n]);
    }
    line("T_learn", info.t_learn);
    line("T_cons", info.t_cons);
    line("T_mine", info.t_mine);
    line("objective", info.objective());
    line("utility", utility);
    if (!opts.quiet) std::cout << text.str();

    auto csv = open_csv(opts, "latency_table.csv");
    csv << "component,index,value\n";
    for (std::size_t n = 0; n < info.t_off.size(); ++n)
        csv << "T_off," << n << ',' << format_double(info.t_off[n]) << '\n';
    for (std::size_t m = 0; m < info.t_exe.size(); ++m)
        csv << "T_exe," << m << ',' << format_double(info.t_exe[m]) << '\n';
    for (std::size_t n = 0; n < info.t_loc.size(); ++n)
        csv << "T_loc," << n << ',' << format_double(info.t_loc[n]) << '\n';
    for (std::size_t n = 0; n < info.t_up.size(); ++n)
        csv << "T_up," << n << ',' << format_double(info.t_up[n]) << '\n';
    for (std::size_t n = 0; n < info.t_mine_md.size(); ++n)
        csv << "T_mine," << n << ',' << format_double(info.t_mine_md[n]) << '\n';
    for (std::size_t n = 0; n < info.e_off.size(); ++n) {
        csv << "E_off," << n << ',' << format_double(info.e_off[n]) << '\n';
        csv << "E_loc," << n << ',' << format_double(info.e_loc[n]) << '\n';
        csv << "E_gen," << n << ',' << format_double(info.e_gen[n]) << '\n';
    }
    csv << "T_learn,," << format_double(info.t_learn) << '\n';
    csv << "T_cons,," << format_double(info.t_cons) << '\n';
    csv << "T_mine,," << format_double(info.t_mine) << '\n';
    csv << "objective,," << format_double(info.objective()) << '\n';
    csv << "utility,," << format_double(utility) << '\n';
}

}  // namespace bflsim::runner
