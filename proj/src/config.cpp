#include "bflsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace bflsim::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct RawConfig {
    // section -> key -> value (insertion order preserved separately for
    // error reporting).
    std::map<std::string, std::map<std::string, std::string>> values;
};

RawConfig parse_ini(const std::string& text, std::vector<ConfigError>& errors) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back({"line " + std::to_string(lineno), "malformed section header"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            raw.values[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({"line " + std::to_string(lineno), "expected key = value"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            errors.push_back({key, "key outside any [section]"});
            continue;
        }
        raw.values[section][key] = value;
    }
    return raw;
}

class Schema {
public:
    using Setter = std::function<void(const std::string&, std::vector<ConfigError>&)>;

    void add(const std::string& section, const std::string& key, Setter setter) {
        setters_[section + "." + key] = std::move(setter);
        keys_[section].push_back(key);
    }

    void apply(const RawConfig& raw, std::vector<ConfigError>& errors) const {
        for (const auto& [section, kv] : raw.values) {
            const auto ks = keys_.find(section);
            if (ks == keys_.end()) {
                errors.push_back({section, "unknown section" + suggest_section(section)});
                continue;
            }
            for (const auto& [key, value] : kv) {
                const auto it = setters_.find(section + "." + key);
                if (it == setters_.end()) {
                    errors.push_back(
                        {section + "." + key, "unknown key" + suggest_key(section, key)});
                    continue;
                }
                it->second(value, errors);
            }
        }
    }

private:
    std::string suggest_section(const std::string& section) const {
        std::string best;
        std::size_t best_d = 3;
        for (const auto& [name, _] : keys_) {
            const auto d = edit_distance(section, name);
            if (d < best_d) {
                best_d = d;
                best = name;
            }
        }
        return best.empty() ? "" : " (did you mean [" + best + "]?)";
    }

    std::string suggest_key(const std::string& section, const std::string& key) const {
        std::string best;
        std::size_t best_d = 3;
        for (const auto& candidate : keys_.at(section)) {
            const auto d = edit_distance(key, candidate);
            if (d < best_d) {
                best_d = d;
                best = candidate;
            }
        }
        return best.empty() ? "" : " (did you mean '" + best + "'?)";
    }

    std::map<std::string, Setter> setters_;
    std::map<std::string, std::vector<std::string>> keys_;
};

}  // namespace

ConfigErrors::ConfigErrors(std::vector<ConfigError> errs)
    : std::runtime_error([&errs] {
          std::string msg = "configuration errors:";
          for (const auto& e : errs) msg += "\n  " + e.field + ": " + e.message;
          return msg;
      }()),
      errors(std::move(errs)) {}

ScenarioConfig parse_config_text(const std::string& text) {
    std::vector<ConfigError> errors;
    const RawConfig raw = parse_ini(text, errors);
    ScenarioConfig cfg;

    Schema schema;
    auto field_double = [&errors](const std::string& path, double& target,
                                  double scale = 1.0) {
        return [path, &target, scale](const std::string& v, std::vector<ConfigError>& errs) {
            try {
                std::size_t used = 0;
                target = std::stod(v, &used) * scale;
                if (used != v.size()) throw std::invalid_argument("");
            } catch (...) {
                errs.push_back({path, "not a number: '" + v + "'"});
            }
        };
    };
    auto field_dbm = [](const std::string& path, double& target) {
        return [path, &target](const std::string& v, std::vector<ConfigError>& errs) {
            try {
                target = dbm_to_watt(std::stod(v));
            } catch (...) {
                errs.push_back({path, "not a number: '" + v + "'"});
            }
        };
    };
    auto field_size = [](const std::string& path, std::size_t& target) {
        return [path, &target](const std::string& v, std::vector<ConfigError>& errs) {
            try {
                const long long x = std::stoll(v);
                if (x < 0) throw std::invalid_argument("");
                target = static_cast<std::size_t>(x);
            } catch (...) {
                errs.push_back({path, "not a non-negative integer: '" + v + "'"});
            }
        };
    };
    auto field_u64 = [](const std::string& path, std::uint64_t& target) {
        return [path, &target](const std::string& v, std::vector<ConfigError>& errs) {
            try {
                target = std::stoull(v);
            } catch (...) {
                errs.push_back({path, "not an integer: '" + v + "'"});
            }
        };
    };
    auto field_bool = [](const std::string& path, bool& target) {
        return [path, &target](const std::string& v, std::vector<ConfigError>& errs) {
            if (v == "true" || v == "1" || v == "yes")
                target = true;
            else if (v == "false" || v == "0" || v == "no")
                target = false;
            else
                errs.push_back({path, "expected true/false: '" + v + "'"});
        };
    };
    auto field_string = [](std::string& target) {
        return [&target](const std::string& v, std::vector<ConfigError>&) { target = v; };
    };
    auto field_double_list = [](const std::string& path, std::vector<double>& target,
                                double scale) {
        return [path, &target, scale](const std::string& v, std::vector<ConfigError>& errs) {
            target.clear();
            std::stringstream ss(v);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                try {
                    target.push_back(std::stod(trim(cell)) * scale);
                } catch (...) {
                    errs.push_back({path, "not a number list: '" + v + "'"});
                    return;
                }
            }
        };
    };

    (void)errors;
    schema.add("scenario", "n_mds", field_size("scenario.n_mds", cfg.n_mds));
    schema.add("scenario", "n_ess", field_size("scenario.n_ess", cfg.n_ess));
    schema.add("scenario", "n_channels", field_size("scenario.n_channels", cfg.n_channels));
    schema.add("scenario", "rounds", field_size("scenario.rounds", cfg.rounds));
    schema.add("scenario", "seed", field_u64("scenario.seed", cfg.seed));
    schema.add("scenario", "loss_eps", field_double("scenario.loss_eps", cfg.loss_eps));
    schema.add("scenario", "mode",
               [&cfg](const std::string& v, std::vector<ConfigError>& errs) {
                   if (v == "consensus")
                       cfg.mode = bfl::Mode::consensus;
                   else if (v == "no-consensus")
                       cfg.mode = bfl::Mode::no_consensus;
                   else if (v == "isolated")
                       cfg.mode = bfl::Mode::isolated;
                   else
                       errs.push_back({"scenario.mode",
                                       "expected consensus|no-consensus|isolated: '" + v + "'"});
               });
    schema.add("scenario", "policy",
               [&cfg](const std::string& v, std::vector<ConfigError>& errs) {
                   if (v == "fixed")
                       cfg.policy = bfl::PolicySource::fixed_local;
                   else if (v == "random")
                       cfg.policy = bfl::PolicySource::random;
                   else if (v == "greedy")
                       cfg.policy = bfl::PolicySource::greedy;
                   else if (v == "rl-agent")
                       cfg.policy = bfl::PolicySource::agent;
                   else
                       errs.push_back({"scenario.policy",
                                       "expected fixed|random|greedy|rl-agent: '" + v + "'"});
               });

    schema.add("dataset", "features", field_size("dataset.features", cfg.features));
    schema.add("dataset", "classes", field_size("dataset.classes", cfg.classes));
    schema.add("dataset", "points_per_class",
               field_size("dataset.points_per_class", cfg.points_per_class));
    schema.add("dataset", "cluster_spread",
               field_double("dataset.cluster_spread", cfg.cluster_spread));
    schema.add("dataset", "labels_per_md", field_size("dataset.labels_per_md", cfg.labels_per_md));
    schema.add("dataset", "test_fraction",
               field_double("dataset.test_fraction", cfg.test_fraction));
    schema.add("dataset", "model", field_string(cfg.model_kind));
    schema.add("dataset", "hidden", field_size("dataset.hidden", cfg.hidden));
    schema.add("dataset", "bits_per_point",
               field_double("dataset.bits_per_point", cfg.bits_per_point));

    schema.add("training", "md_epochs", field_double("training.md_epochs", cfg.md_epochs));
    schema.add("training", "es_epochs", field_double("training.es_epochs", cfg.es_epochs));
    schema.add("training", "batch_ratio", field_double("training.batch_ratio", cfg.batch_ratio));
    schema.add("training", "step_size", field_double("training.step_size", cfg.step_size));
    schema.add("training", "alpha", field_double("training.alpha", cfg.alpha));
    schema.add("training", "step_schedule",
               [&cfg](const std::string& v, std::vector<ConfigError>& errs) {
                   if (v == "constant")
                       cfg.theorem_schedule = false;
                   else if (v == "theorem")
                       cfg.theorem_schedule = true;
                   else
                       errs.push_back(
                           {"training.step_schedule", "expected constant|theorem: '" + v + "'"});
               });

    schema.add("channel", "bandwidth_mhz", field_double("channel.bandwidth_mhz", cfg.bandwidth_hz, 1e6));
    schema.add("channel", "noise_dbm", field_dbm("channel.noise_dbm", cfg.noise_w));
    schema.add("channel", "wired_rate_mbps",
               field_double("channel.wired_rate_mbps", cfg.wired_rate_bps, 1e6));
    schema.add("channel", "pathloss_exp", field_double("channel.pathloss_exp", cfg.pathloss_exp));
    schema.add("channel", "cell_radius_m", field_double("channel.cell_radius_m", cfg.cell_radius_m));

    schema.add("compute", "md_cpu_ghz",
               field_double_list("compute.md_cpu_ghz", cfg.md_cpu_hz, 1e9));
    schema.add("compute", "es_cpu_ghz", field_double("compute.es_cpu_ghz", cfg.es_cpu_hz, 1e9));
    schema.add("compute", "md_mcycles_per_point",
               field_double("compute.md_mcycles_per_point", cfg.md_cycles_per_point, 1e6));
    schema.add("compute", "es_mcycles_per_point",
               field_double("compute.es_mcycles_per_point", cfg.es_cycles_per_point, 1e6));
    schema.add("compute", "kappa", field_double("compute.kappa", cfg.kappa));

    schema.add("power", "max_power_dbm",
               [&cfg](const std::string& v, std::vector<ConfigError>& errs) {
                   cfg.max_power_w.clear();
                   std::stringstream ss(v);
                   std::string cell;
                   while (std::getline(ss, cell, ',')) {
                       try {
                           cfg.max_power_w.push_back(dbm_to_watt(std::stod(trim(cell))));
                       } catch (...) {
                           errs.push_back({"power.max_power_dbm", "not a dBm list: '" + v + "'"});
                           return;
                       }
                   }
               });
    schema.add("power", "energy_budget_j",
               field_double("power.energy_budget_j", cfg.energy_budget_j));

    schema.add("mining", "hash_work_ghash",
               field_double("mining.hash_work_ghash", cfg.hash_work, 1e9));
    schema.add("mining", "hash_cap_ghash_s",
               field_double("mining.hash_cap_ghash_s", cfg.hash_cap, 1e9));
    schema.add("mining", "verify_coeff", field_double("mining.verify_coeff", cfg.verify_coeff));
    schema.add("mining", "fork_rate", field_double("mining.fork_rate", cfg.fork_rate));
    schema.add("mining", "fork_occurrences",
               field_double("mining.fork_occurrences", cfg.fork_occurrences));
    schema.add("mining", "joules_per_hash",
               field_double("mining.joules_per_hash", cfg.joules_per_hash));
    schema.add("mining", "tx_count", field_double("mining.tx_count", cfg.tx_count));
    schema.add("mining", "block_size_slope",
               field_double("mining.block_size_slope", cfg.block_size_slope));

    schema.add("consensus", "topology", field_string(cfg.topology));
    schema.add("consensus", "mixing", field_double("consensus.mixing", cfg.mixing));
    schema.add("consensus", "phi", field_size("consensus.phi", cfg.phi));

    schema.add("drl", "episodes", field_size("drl.episodes", cfg.episodes));
    schema.add("drl", "steps", field_size("drl.steps", cfg.steps));
    schema.add("drl", "gamma", field_double("drl.gamma", cfg.gamma));
    schema.add("drl", "tau", field_double("drl.tau", cfg.tau));
    schema.add("drl", "eps_kl", field_double("drl.eps_kl", cfg.trpo.eps_kl));
    schema.add("drl", "cg_iters", field_size("drl.cg_iters", cfg.trpo.cg_iters));
    schema.add("drl", "damping", field_double("drl.damping", cfg.trpo.damping));
    schema.add("drl", "actor_rate", field_double("drl.actor_rate", cfg.trpo.actor_rate));
    schema.add("drl", "critic_rate", field_double("drl.critic_rate", cfg.trpo.critic_rate));

    schema.add("attack", "enabled", field_bool("attack.enabled", cfg.attack_enabled));
    schema.add("attack", "es", field_size("attack.es", cfg.attack_es));
    schema.add("attack", "rounds",
               [&cfg](const std::string& v, std::vector<ConfigError>& errs) {
                   cfg.attack_rounds.clear();
                   std::stringstream ss(v);
                   std::string cell;
                   while (std::getline(ss, cell, ',')) {
                       try {
                           cfg.attack_rounds.insert(std::stoull(trim(cell)));
                       } catch (...) {
                           errs.push_back({"attack.rounds", "not an integer list: '" + v + "'"});
                           return;
                       }
                   }
               });
    schema.add("attack", "scale", field_double("attack.scale", cfg.attack_scale));
    schema.add("attack", "detection", field_bool("attack.detection", cfg.detection));
    schema.add("attack", "window", field_size("attack.window", cfg.detect_window));
    schema.add("attack", "z_threshold", field_double("attack.z_threshold", cfg.detect_z));

    schema.apply(raw, errors);

    // Range validation, collected rather than first-error-wins.
    auto require = [&errors](bool ok, const std::string& field, const std::string& message) {
        if (!ok) errors.push_back({field, message});
    };
    require(cfg.n_mds >= 1, "scenario.n_mds", "must be >= 1");
    require(cfg.n_ess >= 1, "scenario.n_ess", "must be >= 1");
    require(cfg.n_channels >= 1, "scenario.n_channels", "must be >= 1");
    require(cfg.rounds >= 1, "scenario.rounds", "must be >= 1");
    require(cfg.features >= 1, "dataset.features", "must be >= 1");
    require(cfg.classes >= 2, "dataset.classes", "must be >= 2");
    require(cfg.labels_per_md >= 1 && cfg.labels_per_md <= cfg.classes, "dataset.labels_per_md",
            "must be in [1, classes]");
    require(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0, "dataset.test_fraction",
            "must be in [0, 1)");
    require(cfg.model_kind == "softmax" || cfg.model_kind == "mlp" || cfg.model_kind == "quadratic",
            "dataset.model", "expected softmax|mlp|quadratic");
    require(cfg.batch_ratio > 0.0 && cfg.batch_ratio <= 1.0, "training.batch_ratio",
            "must be in (0, 1]");
    require(cfg.md_epochs >= 1 && cfg.es_epochs >= 1, "training.md_epochs", "epochs must be >= 1");
    require(cfg.step_size >= 0.0, "training.step_size", "must be >= 0");
    require(cfg.bandwidth_hz > 0.0, "channel.bandwidth_mhz", "must be positive");
    require(cfg.noise_w > 0.0, "channel.noise_dbm", "noise power must convert to > 0 W");
    require(cfg.wired_rate_bps > 0.0, "channel.wired_rate_mbps", "must be positive");
    require(cfg.es_cpu_hz > 0.0, "compute.es_cpu_ghz", "must be positive");
    for (double v : cfg.md_cpu_hz)
        require(v > 0.0, "compute.md_cpu_ghz", "entries must be positive");
    for (double v : cfg.max_power_w)
        require(v > 0.0, "power.max_power_dbm", "entries must convert to > 0 W");
    require(cfg.hash_work > 0.0, "mining.hash_work_ghash", "must be positive");
    require(cfg.hash_cap > 0.0, "mining.hash_cap_ghash_s", "must be positive");
    require(cfg.energy_budget_j > cfg.joules_per_hash * cfg.hash_work, "power.energy_budget_j",
            "must exceed the fixed block-generation energy joules_per_hash * hash_work");
    require(cfg.topology == "ring" || cfg.topology == "star" || cfg.topology == "complete" ||
                cfg.topology == "path" || cfg.topology.rfind("file:", 0) == 0,
            "consensus.topology", "expected ring|star|complete|path|file:<path>");
    require(cfg.mixing >= 0.0, "consensus.mixing", "must be >= 0 (0 selects the default)");
    require(cfg.mixing == 0.0 || cfg.mixing < 1.0 / static_cast<double>(std::max<std::size_t>(cfg.n_ess, 1)),
            "consensus.mixing", "must be < 1/M");
    require(cfg.gamma >= 0.0 && cfg.gamma <= 1.0, "drl.gamma", "must be in [0, 1]");
    require(cfg.trpo.eps_kl > 0.0, "drl.eps_kl", "must be positive");
    require(cfg.n_mds * cfg.labels_per_md >= cfg.classes, "dataset.labels_per_md",
            "shards cannot cover every class");
    if (cfg.attack_enabled) {
        require(cfg.attack_es < cfg.n_ess, "attack.es", "must name an existing ES");
        require(cfg.attack_scale >= 0.0, "attack.scale", "must be >= 0");
        for (auto r : cfg.attack_rounds)
            require(r < cfg.rounds, "attack.rounds", "attack round beyond scenario.rounds");
    }

    if (!errors.empty()) throw ConfigErrors(std::move(errors));
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigErrors({{path, "cannot open config file"}});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

bfl::Scenario ScenarioConfig::to_scenario() const {
    bfl::Scenario s;
    if (model_kind == "softmax")
        s.model = fl::LossModel::softmax(features, classes);
    else if (model_kind == "mlp")
        s.model = fl::LossModel::mlp(features, hidden, classes);
    else
        s.model = fl::LossModel::quadratic(features);

    const auto full =
        fl::make_synthetic_dataset(features, classes, points_per_class, cluster_spread, seed);
    auto [train, test] = fl::split_train_test(full, test_fraction, seed);
    s.md_shards = fl::partition_noniid(train, n_mds, labels_per_md, seed);
    s.test_set = std::move(test);

    SystemParams& p = s.params;
    p.num_md = n_mds;
    p.num_es = n_ess;
    p.channels = n_channels;
    p.seed = seed;
    p.max_bandwidth_hz = bandwidth_hz;
    p.noise_w = noise_w;
    p.wired_rate_bps = wired_rate_bps;
    p.pathloss_exp = pathloss_exp;
    p.cell_radius_m = cell_radius_m;
    p.es_cpu_hz = es_cpu_hz;
    p.es_cycles_per_point = es_cycles_per_point;
    p.kappa = kappa;
    p.bits_per_point = bits_per_point;
    p.md_epochs = md_epochs;
    p.es_epochs = es_epochs;
    p.batch_ratio = batch_ratio;
    p.consensus_phi = phi;
    p.hash_work = hash_work;
    p.hash_cap = hash_cap;
    p.verify_coeff = verify_coeff;
    p.fork_rate = fork_rate;
    p.fork_occurrences = fork_occurrences;
    p.joules_per_hash = joules_per_hash;
    p.tx_count = tx_count;
    p.block_size_slope = block_size_slope;

    p.md_data_points.resize(n_mds);
    for (std::size_t n = 0; n < n_mds; ++n)
        p.md_data_points[n] = static_cast<double>(s.md_shards[n].size());
    p.md_cycles_per_point.assign(n_mds, md_cycles_per_point);
    p.md_energy_budget_j.assign(n_mds, energy_budget_j);
    if (!md_cpu_hz.empty()) {
        p.md_max_cpu_hz.resize(n_mds);
        for (std::size_t n = 0; n < n_mds; ++n) p.md_max_cpu_hz[n] = md_cpu_hz[n % md_cpu_hz.size()];
    }
    if (!max_power_w.empty()) {
        p.md_max_power_w.resize(n_mds);
        for (std::size_t n = 0; n < n_mds; ++n)
            p.md_max_power_w[n] = max_power_w[n % max_power_w.size()];
    }
    p.finalize();

    if (n_ess > 1) {
        if (topology == "ring")
            s.topology = consensus::Topology::ring(n_ess);
        else if (topology == "star")
            s.topology = consensus::Topology::star(n_ess);
        else if (topology == "complete")
            s.topology = consensus::Topology::complete(n_ess);
        else if (topology == "path")
            s.topology = consensus::Topology::path(n_ess);
        else
            s.topology = consensus::Topology::from_file(topology.substr(5));
    }
    s.topology.nodes = n_ess;
    s.mixing = mixing;
    s.phi = phi;
    s.md_epochs = md_epochs;
    s.es_epochs = es_epochs;
    s.batch_ratio = batch_ratio;
    s.eta = step_size;
    s.theorem_step_schedule = theorem_schedule;
    s.alpha = alpha;
    s.mode = mode;
    if (attack_enabled) {
        s.attack.attacked_es = attack_es;
        s.attack.rounds = attack_rounds;
        s.attack.scale = attack_scale;
        s.attack.noise_seed = seed + 0x9e37;
        s.detection = detection;
        s.detect_window = detect_window;
        s.detect_z = detect_z;
    }
    s.seed = seed;
    return s;
}

env::EnvConfig ScenarioConfig::to_env_config() const {
    env::EnvConfig cfg;
    cfg.tau = tau;
    cfg.gamma = gamma;
    cfg.episode_len = steps;
    cfg.loss_eps = loss_eps;
    return cfg;
}

std::string default_config_text() {
    return R"([scenario]
n_mds = 6
n_ess = 2
n_channels = 3
rounds = 100
seed = 7
mode = consensus
policy = fixed
loss_eps = 0.5

[dataset]
features = 2
classes = 2
points_per_class = 300
cluster_spread = 1.0
labels_per_md = 1
test_fraction = 0.2
model = softmax
bits_per_point = 8000

[training]
md_epochs = 2
es_epochs = 2
batch_ratio = 1.0
step_size = 0.1
step_schedule = constant
alpha = 1.0

[channel]
bandwidth_mhz = 20
noise_dbm = -100
wired_rate_mbps = 100
pathloss_exp = 3.0
cell_radius_m = 200

[compute]
md_cpu_ghz = 1.0
es_cpu_ghz = 5.0
md_mcycles_per_point = 0.9
es_mcycles_per_point = 0.9
kappa = 5e-27

[power]
max_power_dbm = 27
energy_budget_j = 4000

[mining]
hash_work_ghash = 50
hash_cap_ghash_s = 1000
verify_coeff = 5e-7
fork_rate = 0.00166667
fork_occurrences = 3
joules_per_hash = 5e-8
tx_count = 10
block_size_slope = 60

[consensus]
topology = ring
mixing = 0
phi = 5

[drl]
episodes = 2000
steps = 10
gamma = 0.9
tau = 0
eps_kl = 0.01
cg_iters = 10
damping = 0.1
actor_rate = 0.003
critic_rate = 0.02

[attack]
enabled = false
es = 0
rounds = 20,60
scale = 3.0
detection = true
window = 10
z_threshold = 3
)";
}

}  // namespace bflsim::config
