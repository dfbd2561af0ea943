#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bflsim/bfl.hpp"
#include "bflsim/env.hpp"
#include "bflsim/trpo.hpp"

namespace bflsim::config {

struct ConfigError {
    std::string field;
    std::string message;
};

struct ConfigErrors : std::runtime_error {
    explicit ConfigErrors(std::vector<ConfigError> errs);
    std::vector<ConfigError> errors;
};

// Parsed, validated scenario description.  Units are converted to SI here,
// exactly once: dBm -> W via 10^((x-30)/10), MHz -> Hz, GHz -> Hz,
// GHash -> hash, Mcycles -> cycles, Mbit/s -> bit/s.
struct ScenarioConfig {
    // [scenario]
    std::size_t n_mds = 6;
    std::size_t n_ess = 2;
    std::size_t n_channels = 3;
    std::size_t rounds = 100;
    std::uint64_t seed = 1;
    bfl::Mode mode = bfl::Mode::consensus;
    bfl::PolicySource policy = bfl::PolicySource::fixed_local;
    double loss_eps = 0.5;

    // [dataset]
    std::size_t features = 2;
    std::size_t classes = 2;
    std::size_t points_per_class = 300;
    double cluster_spread = 1.0;
    std::size_t labels_per_md = 1;
    double test_fraction = 0.2;
    std::string model_kind = "softmax";  // softmax | mlp | quadratic
    std::size_t hidden = 16;
    double bits_per_point = 8000.0;

    // [training]
    double md_epochs = 2;
    double es_epochs = 2;
    double batch_ratio = 1.0;
    double step_size = 0.1;
    bool theorem_schedule = false;
    double alpha = 1.0;

    // [channel]
    double bandwidth_hz = 20e6;
    double noise_w = 1e-13;
    double wired_rate_bps = 1e8;
    double pathloss_exp = 3.0;
    double cell_radius_m = 200.0;

    // [compute]
    std::vector<double> md_cpu_hz;       // per MD, cycled if shorter
    double es_cpu_hz = 5e9;
    double md_cycles_per_point = 0.9e6;
    double es_cycles_per_point = 0.9e6;
    double kappa = 5e-27;

    // [power]
    std::vector<double> max_power_w;     // per MD, cycled if shorter
    double energy_budget_j = 4000.0;

    // [mining]
    double hash_work = 50e9;
    double hash_cap = 1000e9;
    double verify_coeff = 5e-7;
    double fork_rate = 1.0 / 600.0;
    double fork_occurrences = 3.0;
    double joules_per_hash = 5e-8;
    double tx_count = 10.0;
    double block_size_slope = 60.0;

    // [consensus]
    std::string topology = "ring";  // ring | star | complete | path | file:<path>
    double mixing = 0.0;
    std::size_t phi = 5;

    // [drl]
    std::size_t episodes = 2000;
    std::size_t steps = 10;
    double gamma = 0.9;
    double tau = 0.0;  // <= 0 selects 3s * N
    drl::TrpoConfig trpo;

    // [attack]
    bool attack_enabled = false;
    std::size_t attack_es = 0;
    std::set<std::size_t> attack_rounds = {20, 60};
    double attack_scale = 3.0;
    bool detection = true;
    std::size_t detect_window = 10;
    double detect_z = 3.0;

    bfl::Scenario to_scenario() const;
    env::EnvConfig to_env_config() const;
};

// Parses and validates; throws ConfigErrors carrying *every* violation
// (unknown keys include a nearest-known-key suggestion).
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

std::string default_config_text();

}  // namespace bflsim::config
