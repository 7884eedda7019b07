/* SPDX-License-Identifier: Apache-2.0 */
#ifndef FLOEBERG_FLOEBERG_H
#define FLOEBERG_FLOEBERG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FLOEBERG_API __declspec(dllexport)
#else
#define FLOEBERG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum floeberg_status {
  FLOEBERG_OK = 0,
  FLOEBERG_INVALID_INPUT = 1,
  FLOEBERG_OUT_OF_SCOPE = 2,
  FLOEBERG_NUMERIC = 3,
  FLOEBERG_PARSE = 4,
  FLOEBERG_IO = 5,
  FLOEBERG_MISSING_INPUT = 6,
  FLOEBERG_NO_REFERENCE = 7,
  FLOEBERG_CONSISTENCY = 8,
  FLOEBERG_ARCHITECTURE_MISMATCH = 9,
  FLOEBERG_INTERNAL = 10
} floeberg_status;

/* Message of the most recent failure on the calling thread ("" if none). */
FLOEBERG_API const char *floeberg_last_error(void);
FLOEBERG_API const char *floeberg_status_name(floeberg_status status);
/* Process exit status for a command outcome: 0 ok, 2 missing input,
 * 3 validation failure, 1 anything else. */
FLOEBERG_API int floeberg_exit_code(floeberg_status status);
FLOEBERG_API const char *floeberg_version(void);

/* ---- pipeline ---------------------------------------------------------- */

typedef struct floeberg_context floeberg_context;

FLOEBERG_API floeberg_status floeberg_context_new(floeberg_context **out);
FLOEBERG_API void floeberg_context_free(floeberg_context *ctx);
/* Merges a "key = value" file; later calls and floeberg_context_set win. */
FLOEBERG_API floeberg_status floeberg_context_load_config(floeberg_context *ctx,
                                                          const char *path);
FLOEBERG_API floeberg_status floeberg_context_set(floeberg_context *ctx,
                                                  const char *key,
                                                  const char *value);
/* Runs one command: synth, ingest, label, train, classify, surface,
 * freeboard, bench or report. */
FLOEBERG_API floeberg_status floeberg_context_run(floeberg_context *ctx,
                                                  const char *command);
/* Log text of the last successful run (owned by ctx). */
FLOEBERG_API const char *floeberg_context_log(const floeberg_context *ctx);
FLOEBERG_API size_t floeberg_context_product_count(const floeberg_context *ctx);
FLOEBERG_API const char *floeberg_context_product(const floeberg_context *ctx,
                                                  size_t i);
/* NUL-separated list of command names, terminated by an empty name. */
FLOEBERG_API const char *floeberg_command_names(void);
/* Number of configuration keys and their names/kinds/defaults/help. */
FLOEBERG_API size_t floeberg_config_key_count(void);
FLOEBERG_API const char *floeberg_config_key_name(size_t i);
FLOEBERG_API const char *floeberg_config_key_default(size_t i);
FLOEBERG_API const char *floeberg_config_key_help(size_t i);

/* ---- geometry ---------------------------------------------------------- */

/* South-polar stereographic, WGS84, standard parallel -70, meridian 0. */
FLOEBERG_API floeberg_status floeberg_project(double lat, double lon, double *x,
                                              double *y);
FLOEBERG_API floeberg_status floeberg_unproject(double x, double y, double *lat,
                                                double *lon);
/* "0 m", "150 m / E", "550 m / NW"; meters along +x/+y. */
FLOEBERG_API floeberg_status floeberg_parse_shift(const char *text, double *dx,
                                                  double *dy);

/* ---- sea surface ------------------------------------------------------- */

FLOEBERG_API floeberg_status floeberg_lead_height(const double *h,
                                                  const double *sigma_sq,
                                                  size_t n, double *h_lead,
                                                  double *sigma_sq_lead);
FLOEBERG_API floeberg_status floeberg_window_reference(const double *h,
                                                       const double *sigma_sq,
                                                       size_t n, double *h_ref,
                                                       double *sigma_sq_ref);

/* ---- classifier -------------------------------------------------------- */

typedef struct floeberg_model floeberg_model;

FLOEBERG_API floeberg_status floeberg_model_load(const char *path,
                                                 floeberg_model **out);
FLOEBERG_API void floeberg_model_free(floeberg_model *model);
/* 1 = MLP, 2 = LSTM. */
FLOEBERG_API int floeberg_model_architecture(const floeberg_model *model);
FLOEBERG_API size_t floeberg_model_sequence_length(const floeberg_model *model);
FLOEBERG_API size_t floeberg_model_feature_count(void);
/* `windows` holds n windows of sequence_length x feature_count standardized
 * features, row-major. Writes n*3 probabilities and n class codes (1..3). */
FLOEBERG_API floeberg_status floeberg_model_predict(const floeberg_model *model,
                                                    const double *windows,
                                                    size_t n, double *probs,
                                                    uint8_t *classes);

#ifdef __cplusplus
}
#endif

#endif
