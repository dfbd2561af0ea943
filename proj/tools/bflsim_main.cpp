// bflsim command-line front end; links only the C API of the shared library.
#include <CLI11.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "bflsim.h"

namespace {

int report(bflsim_status status) {
    if (status == BFLSIM_OK) return 0;
    std::fprintf(stderr, "error: %s\n", bflsim_last_error());
    return 1;
}

struct ConfigHandle {
    bflsim_config* ptr = nullptr;
    ~ConfigHandle() { bflsim_config_free(ptr); }
};

int load_config(const std::string& path, bool has_seed, std::uint64_t seed, ConfigHandle& out) {
    if (const int rc = report(bflsim_config_load(path.c_str(), &out.ptr))) return rc;
    if (has_seed) bflsim_config_set_seed(out.ptr, seed);
    return 0;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("bflsim ") + bflsim_version() +
                 " - consensus federated learning simulator over a simulated blockchain edge "
                 "network"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::string config_path, out_dir = "out", run_dir, param, values_csv, checkpoint;
    std::uint64_t seed = 0;
    bool has_seed = false;
    auto seed_opt = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { has_seed = true; });
    };

    auto* fl = app.add_subcommand(
        "fl-train",
        "run federated training rounds; writes rounds.csv "
        "(round,global_loss,test_acc,T_learn,T_cons,T_mine,U,leader), run_stats.csv, "
        "ledger.jsonl, consensus_trace.csv, manifest.txt");
    fl->add_option("--config", config_path, "scenario config file")->required();
    fl->add_option("--out", out_dir, "output directory");
    fl->add_option("--checkpoint", checkpoint, "agent checkpoint for policy = rl-agent");
    seed_opt(fl);

    auto* rl = app.add_subcommand(
        "rl-train",
        "train the latency agent; writes rl_train.csv "
        "(episode,mean_reward,kl,surrogate,backtracks,critic_loss), episode_trace.csv "
        "(episode,t,reward,T_learn,T_cons,T_mine,violations), checkpoint.bin, summary.csv");
    rl->add_option("--config", config_path, "scenario config file")->required();
    rl->add_option("--out", out_dir, "output directory");
    seed_opt(rl);

    auto* sw = app.add_subcommand(
        "sweep",
        "re-run fl-train across one parameter; writes per-point run directories and "
        "sweep_summary.csv (value,final_loss,T_learn,T_cons,T_mine,objective)");
    sw->add_option("--config", config_path, "scenario config file")->required();
    sw->add_option("--out", out_dir, "output directory");
    sw->add_option("--param", param, "one of phi|n_mds|power|bandwidth|hash")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();
    seed_opt(sw);

    auto* at = app.add_subcommand(
        "attack",
        "model-poisoning experiment; writes clean.csv, attack_undefended.csv, "
        "attack_defended.csv and attack_summary.csv");
    at->add_option("--config", config_path, "scenario config file")->required();
    at->add_option("--out", out_dir, "output directory");
    seed_opt(at);

    auto* an = app.add_subcommand(
        "analyze",
        "instantiate the convergence bound for a finished fl-train run; writes "
        "constants.json and bound_terms.csv (k,leading,a,b,c,d,e,total,measured_grad_sq)");
    an->add_option("--run", run_dir, "fl-train output directory")->required();
    an->add_option("--out", out_dir, "output directory (defaults to the run directory)");

    auto* lt = app.add_subcommand(
        "latency-table",
        "print one round's full latency/energy breakdown and write latency_table.csv");
    lt->add_option("--config", config_path, "scenario config file")->required();
    lt->add_option("--out", out_dir, "output directory");
    seed_opt(lt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    ConfigHandle cfg;
    if (fl->parsed()) {
        if (const int rc = load_config(config_path, has_seed, seed, cfg)) return rc;
        return report(bflsim_run_fl_train(cfg.ptr, out_dir.c_str(),
                                          checkpoint.empty() ? nullptr : checkpoint.c_str()));
    }
    if (rl->parsed()) {
        if (const int rc = load_config(config_path, has_seed, seed, cfg)) return rc;
        return report(bflsim_run_rl_train(cfg.ptr, out_dir.c_str()));
    }
    if (sw->parsed()) {
        if (const int rc = load_config(config_path, has_seed, seed, cfg)) return rc;
        std::vector<double> values;
        try {
            values = parse_values(values_csv);
        } catch (...) {
            std::fprintf(stderr, "error: --values expects comma-separated numbers\n");
            return 2;
        }
        return report(bflsim_run_sweep(cfg.ptr, out_dir.c_str(), param.c_str(), values.data(),
                                       values.size()));
    }
    if (at->parsed()) {
        if (const int rc = load_config(config_path, has_seed, seed, cfg)) return rc;
        return report(bflsim_run_attack(cfg.ptr, out_dir.c_str()));
    }
    if (an->parsed()) {
        return report(
            bflsim_run_analyze(run_dir.c_str(), an->count("--out") ? out_dir.c_str() : nullptr));
    }
    if (lt->parsed()) {
        if (const int rc = load_config(config_path, has_seed, seed, cfg)) return rc;
        return report(bflsim_latency_table(cfg.ptr, out_dir.c_str()));
    }
    return 2;
}
