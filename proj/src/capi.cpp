#include "bflsim.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "bflsim/config.hpp"
#include "bflsim/runner.hpp"
#include "bflsim/version.hpp"

struct bflsim_config {
    bflsim::config::ScenarioConfig cfg;
    std::string text;
};

namespace {

thread_local std::string g_last_error;

bflsim_status fail(bflsim_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
bflsim_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return BFLSIM_OK;
    } catch (const bflsim::config::ConfigErrors& e) {
        return fail(BFLSIM_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BFLSIM_ERR_BAD_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(BFLSIM_ERR_RUNTIME, e.what());
    }
}

bflsim::runner::RunOptions options_for(const bflsim_config* cfg, const char* out_dir) {
    bflsim::runner::RunOptions opts;
    opts.config_text = cfg->text;
    opts.out_dir = out_dir;
    return opts;
}

}  // namespace

extern "C" {

const char* bflsim_version(void) { return bflsim::kVersion; }

const char* bflsim_last_error(void) { return g_last_error.c_str(); }

bflsim_status bflsim_config_load(const char* path, bflsim_config** out) {
    if (!path || !out) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<bflsim_config>();
        std::ifstream in(path);
        if (!in)
            throw bflsim::config::ConfigErrors(
                std::vector<bflsim::config::ConfigError>{{path, "cannot open config file"}});
        std::stringstream ss;
        ss << in.rdbuf();
        handle->text = ss.str();
        handle->cfg = bflsim::config::parse_config_text(handle->text);
        *out = handle.release();
    });
}

bflsim_status bflsim_config_parse(const char* text, bflsim_config** out) {
    if (!text || !out) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<bflsim_config>();
        handle->text = text;
        handle->cfg = bflsim::config::parse_config_text(handle->text);
        *out = handle.release();
    });
}

void bflsim_config_free(bflsim_config* cfg) { delete cfg; }

bflsim_status bflsim_config_set_seed(bflsim_config* cfg, uint64_t seed) {
    if (!cfg) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null config");
    cfg->cfg.seed = seed;
    return BFLSIM_OK;
}

bflsim_status bflsim_config_default_text(char* buffer, size_t buffer_len, size_t* needed) {
    const std::string text = bflsim::config::default_config_text();
    if (needed) *needed = text.size() + 1;
    if (!buffer) return BFLSIM_OK;
    if (buffer_len < text.size() + 1)
        return fail(BFLSIM_ERR_BAD_ARGUMENT, "buffer too small for the default config");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return BFLSIM_OK;
}

bflsim_status bflsim_run_fl_train(const bflsim_config* cfg, const char* out_dir,
                                  const char* checkpoint) {
    if (!cfg || !out_dir) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        auto opts = options_for(cfg, out_dir);
        if (checkpoint) opts.checkpoint = checkpoint;
        bflsim::runner::fl_train(cfg->cfg, opts);
    });
}

bflsim_status bflsim_run_rl_train(const bflsim_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] { bflsim::runner::rl_train(cfg->cfg, options_for(cfg, out_dir)); });
}

bflsim_status bflsim_run_sweep(const bflsim_config* cfg, const char* out_dir, const char* param,
                               const double* values, size_t n_values) {
    if (!cfg || !out_dir || !param || (!values && n_values > 0))
        return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        bflsim::runner::sweep(cfg->cfg, options_for(cfg, out_dir), param,
                              std::vector<double>(values, values + n_values));
    });
}

bflsim_status bflsim_run_attack(const bflsim_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] { bflsim::runner::attack(cfg->cfg, options_for(cfg, out_dir)); });
}

bflsim_status bflsim_run_analyze(const char* run_dir, const char* out_dir) {
    if (!run_dir) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null run_dir");
    return guarded([&] {
        bflsim::runner::RunOptions opts;
        if (out_dir) opts.out_dir = out_dir;
        bflsim::runner::analyze(run_dir, opts);
    });
}

bflsim_status bflsim_latency_table(const bflsim_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail(BFLSIM_ERR_BAD_ARGUMENT, "null argument");
    return guarded([&] { bflsim::runner::latency_table(cfg->cfg, options_for(cfg, out_dir)); });
}

}  // extern "C"
