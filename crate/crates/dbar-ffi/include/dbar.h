/* C interface to the dbar product-domain Cauchy-Riemann solver. */

#ifndef DBAR_H
#define DBAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirrored by the CLI exit codes.
 */
typedef enum DbarStatus {
  DBAR_STATUS_OK = 0,
  DBAR_STATUS_RUNTIME_ERROR = 1,
  DBAR_STATUS_CONFIG_ERROR = 2,
  DBAR_STATUS_TOLERANCE_FAILURE = 3,
  DBAR_STATUS_NULL_ARGUMENT = 4,
  DBAR_STATUS_PANIC = 5,
} DbarStatus;

/**
 * Opaque solver context: a parsed config plus the prepared grids and kernel
 * tables for its domain and dimension.
 */
typedef struct DbarContext DbarContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *dbar_version(void);

/**
 * Last error message for this thread, or NULL when none; caller frees.
 */
char *dbar_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `dbar_*` call and not yet
 * freed; NULL is accepted.
 */
void dbar_string_free(char *s);

/**
 * Build a context from a JSON configuration. Returns NULL on failure and
 * records the reason for [`dbar_last_error`].
 *
 * # Safety
 * `config_json` must be a valid NUL-terminated UTF-8 string.
 */
struct DbarContext *dbar_context_new(const char *config_json);

/**
 * Release a context.
 *
 * # Safety
 * `ctx` must come from [`dbar_context_new`] and not be freed twice.
 */
void dbar_context_free(struct DbarContext *ctx);

/**
 * Solve the configured form with one method and return the method report
 * as JSON (caller frees); NULL on failure.
 *
 * # Safety
 * `ctx` must be a live context; `method` a NUL-terminated string among
 * `forward`, `reverse`, `section3`, `oracle`.
 */
char *dbar_solve_json(const struct DbarContext *ctx, const char *method);

/**
 * Cross-validate the configured form over the configured methods; returns
 * the report as JSON (caller frees); NULL on failure.
 *
 * # Safety
 * `ctx` must be a live context.
 */
char *dbar_crossval_json(const struct DbarContext *ctx);

/**
 * Run a full subcommand (`solve`, `crossval`, `probe`, `experiment`,
 * `convergence`) with artifacts written to `out_dir`, mirroring the CLI.
 * Returns OK, TOLERANCE_FAILURE when `check` is set and a gate fails, or an
 * error status.
 *
 * # Safety
 * `config_json`, `subcommand` and `out_dir` must be valid NUL-terminated
 * UTF-8 strings.
 */
enum DbarStatus dbar_run(const char *config_json,
                         const char *subcommand,
                         const char *out_dir,
                         bool check);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DBAR_H */
