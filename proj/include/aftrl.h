/* C API for the adversarial fine-tuning RL toolkit.
 *
 * All functions returning int use the CLI exit-code convention:
 *   0  success
 *   2  configuration error (bad key, bad value, missing prerequisite file)
 *   3  I/O error (unreadable/corrupt file, cannot write output)
 *   4  numeric failure (non-finite loss or parameters)
 *
 * On any non-zero return, aftrl_last_error() describes the failure. Error
 * strings are thread-local and remain valid until the next failing call on
 * the same thread.
 */
#ifndef AFTRL_H
#define AFTRL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct aftrl_config aftrl_config;

/* Create a config holding built-in defaults. Never fails. */
aftrl_config* aftrl_config_new(void);
void aftrl_config_free(aftrl_config* cfg);

/* Merge an INI-style config file ([section] headers, key = value lines). */
int aftrl_config_load(aftrl_config* cfg, const char* path);

/* Override a single dotted key, e.g. aftrl_config_set(c, "td3.gamma", "0.99").
 * Recognized keys are listed in the README; unknown keys are rejected when a
 * command runs. */
int aftrl_config_set(aftrl_config* cfg, const char* key, const char* value);

/* Pipeline commands. Each reads its inputs from and writes its outputs under
 * the configured output directory (run.out_dir). */
int aftrl_cmd_collect_data(const aftrl_config* cfg);
int aftrl_cmd_pretrain(const aftrl_config* cfg);
int aftrl_cmd_gen_perturb(const aftrl_config* cfg);
int aftrl_cmd_finetune(const aftrl_config* cfg);
int aftrl_cmd_eval(const aftrl_config* cfg);
int aftrl_cmd_sweep(const aftrl_config* cfg);

/* Message for the most recent failing call on this thread ("" if none). */
const char* aftrl_last_error(void);

const char* aftrl_version(void);

#ifdef __cplusplus
}
#endif

#endif /* AFTRL_H */
