/* C bindings for the continuum-aif engine. Generated by cbindgen; do not edit. */

#ifndef CONTINUUM_AIF_H
#define CONTINUUM_AIF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Numeric values match the CLI exit codes so
 * one taxonomy covers both front ends.
 */
typedef enum caif_status {
  CAIF_OK = 0,
  CAIF_RUNTIME_ERROR = 1,
  CAIF_CONFIG_ERROR = 2,
  CAIF_INGESTION_ERROR = 3,
  CAIF_NULL_POINTER = 4,
} caif_status;

/**
 * One agent's generative model. Opaque: create with `caif_agent_build`,
 * release with `caif_agent_free`.
 */
typedef struct caif_agent caif_agent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Detail for the most recent failure on this thread, or an empty string.
 *
 * The pointer stays valid until the next failing call on the same thread;
 * do not free it.
 */
const char *caif_last_error_message(void);

/**
 * Builds the named agent ("producer", "worker", or "consumer") and writes
 * its handle to `out`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must point to writable
 * memory for one pointer. The handle must be released exactly once with
 * `caif_agent_free`.
 */
enum caif_status caif_agent_build(const char *name, struct caif_agent **out);

/**
 * Runs the agent's structural validators (CPT normalization, wiring
 * arities, SLOiD references). Returns OK when every check passes.
 *
 * # Safety
 * `agent` must be a live handle from `caif_agent_build`.
 */
enum caif_status caif_agent_validate(const struct caif_agent *agent);

/**
 * Serializes the agent's full model (factors, controls, CPTs, preferences,
 * SLOiDs) as JSON into `out`.
 *
 * # Safety
 * `agent` must be a live handle; `out` must point to writable memory for
 * one pointer. Free the returned string with `caif_string_free`.
 */
enum caif_status caif_agent_to_json(const struct caif_agent *agent, char **out);

/**
 * Releases an agent handle. NULL is a no-op.
 *
 * # Safety
 * `agent` must be NULL or a live handle from `caif_agent_build`, and must
 * not be used afterwards.
 */
void caif_agent_free(struct caif_agent *agent);

/**
 * Runs one experiment described by a flat JSON config (the same schema the
 * CLI's `--config` file uses; omitted keys take their defaults) and writes
 * the summary document JSON to `out`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must point to
 * writable memory for one pointer. Free the returned string with
 * `caif_string_free`.
 */
enum caif_status caif_run_scenario_json(const char *config_json, char **out);

/**
 * Releases a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `text` must be NULL or a pointer obtained from this library, and must not
 * be used afterwards.
 */
void caif_string_free(char *text);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CONTINUUM_AIF_H */
