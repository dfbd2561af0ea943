#pragma once

#include <string>
#include <vector>

#include "bflsim/config.hpp"

namespace bflsim::runner {

// Experiment drivers behind the CLI and the C API.  Every run directory gets
// a manifest (config digest, seed, version, wall time); all other outputs
// are byte-deterministic for a fixed (config, seed).

struct RunOptions {
    std::string config_text;  // verbatim config (hashed into the manifest)
    std::string out_dir;
    std::string checkpoint;   // rl-agent policy source
    bool quiet = false;
};

void fl_train(const config::ScenarioConfig& cfg, const RunOptions& opts);
void rl_train(const config::ScenarioConfig& cfg, const RunOptions& opts);
void sweep(const config::ScenarioConfig& cfg, const RunOptions& opts, const std::string& param,
           const std::vector<double>& values);
void attack(const config::ScenarioConfig& cfg, const RunOptions& opts);
void analyze(const std::string& run_dir, const RunOptions& opts);
void latency_table(const config::ScenarioConfig& cfg, const RunOptions& opts);

// Full-batch gradient descent on the pooled dataset; the reference the
// convergence fixtures compare against.
struct CentralizedResult {
    Vec w;
    double best_loss = 0.0;
    std::vector<double> trace;
};
CentralizedResult centralized_gd(const fl::LossModel& model, const fl::Dataset& pooled,
                                 std::size_t steps, double eta);

// Parallelism cap: BFLSIM_THREADS, default 1.
std::size_t thread_budget();

std::string format_double(double v);

}  // namespace bflsim::runner
