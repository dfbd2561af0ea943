/* C API for the BFL simulator core.  All functions return a status code and
 * keep the handle types opaque; bflsim_last_error() carries the message of
 * the most recent failure on the calling thread. */
#ifndef BFLSIM_H
#define BFLSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef BFLSIM_API
#define BFLSIM_API __attribute__((visibility("default")))
#endif

typedef enum bflsim_status {
    BFLSIM_OK = 0,
    BFLSIM_ERR_CONFIG = 1,       /* invalid or unreadable configuration */
    BFLSIM_ERR_IO = 2,           /* output or checkpoint file problems */
    BFLSIM_ERR_RUNTIME = 3,      /* failure while running an experiment */
    BFLSIM_ERR_BAD_ARGUMENT = 4, /* null pointers, bad parameter names */
} bflsim_status;

typedef struct bflsim_config bflsim_config;

BFLSIM_API const char* bflsim_version(void);

/* Message of the last failure on this thread; empty string when none. */
BFLSIM_API const char* bflsim_last_error(void);

/* Configuration lifecycle. */
BFLSIM_API bflsim_status bflsim_config_load(const char* path, bflsim_config** out);
BFLSIM_API bflsim_status bflsim_config_parse(const char* text, bflsim_config** out);
BFLSIM_API void bflsim_config_free(bflsim_config* cfg);
BFLSIM_API bflsim_status bflsim_config_set_seed(bflsim_config* cfg, uint64_t seed);

/* Copies the documented default configuration into the caller's buffer;
 * *needed receives the full length including the terminator. */
BFLSIM_API bflsim_status bflsim_config_default_text(char* buffer, size_t buffer_len,
                                                    size_t* needed);

/* Experiment drivers; each writes its documented CSV set plus a manifest
 * into out_dir.  checkpoint may be NULL unless the configured policy is
 * rl-agent. */
BFLSIM_API bflsim_status bflsim_run_fl_train(const bflsim_config* cfg, const char* out_dir,
                                             const char* checkpoint);
BFLSIM_API bflsim_status bflsim_run_rl_train(const bflsim_config* cfg, const char* out_dir);
BFLSIM_API bflsim_status bflsim_run_sweep(const bflsim_config* cfg, const char* out_dir,
                                          const char* param, const double* values,
                                          size_t n_values);
BFLSIM_API bflsim_status bflsim_run_attack(const bflsim_config* cfg, const char* out_dir);
BFLSIM_API bflsim_status bflsim_run_analyze(const char* run_dir, const char* out_dir);
BFLSIM_API bflsim_status bflsim_latency_table(const bflsim_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* BFLSIM_H */
