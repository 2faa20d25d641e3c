/* Copyright 2026 The Configlab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the configuration-space laboratory.
 *
 * Every entry point is a plain function over opaque handles; no C++ types
 * or exceptions cross this boundary.  The usual call sequence is
 *
 *   cfgl_result* r = NULL;
 *   cfgl_status s = cfgl_run("mecke-check", config_json, &r);
 *   if (s == CFGL_OK || s == CFGL_ERROR_VIOLATION) {
 *     ... cfgl_result_csv(r), cfgl_result_verdict(r) ...
 *   } else {
 *     ... cfgl_result_error(r) ...
 *   }
 *   cfgl_result_free(r);
 *
 * A result object is allocated on every call that receives a non-NULL out
 * pointer, including failing ones, so diagnostics are always retrievable.
 * Returned strings are owned by the result and valid until it is freed.
 */

#ifndef CONFIGLAB_CONFIGLAB_H_
#define CONFIGLAB_CONFIGLAB_H_

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cfgl_status {
  CFGL_OK = 0,
  /* The config JSON was malformed, had unknown keys, or failed validation. */
  CFGL_ERROR_CONFIG = 1,
  /* The run completed but a checked property was violated. */
  CFGL_ERROR_VIOLATION = 2,
  /* An estimator or internal error interrupted the run. */
  CFGL_ERROR_RUNTIME = 3,
  /* A required pointer argument was NULL. */
  CFGL_ERROR_NULL_ARGUMENT = 4
} cfgl_status;

typedef struct cfgl_result cfgl_result;

/* Library version as "major.minor.patch".  Static storage, never freed. */
const char* cfgl_version(void);

/* Newline-separated list of subcommand names.  Static storage. */
const char* cfgl_subcommands(void);

/* JSON catalog of builtin components.  Static storage. */
const char* cfgl_catalog(void);

/* Runs one subcommand on a JSON config.  On CFGL_OK and
 * CFGL_ERROR_VIOLATION the result holds the CSV table and the JSON verdict;
 * on other errors it holds a diagnostic message.  *out is set to NULL only
 * if allocation itself fails (also reported as CFGL_ERROR_RUNTIME). */
cfgl_status cfgl_run(const char* subcommand, const char* config_json,
                     cfgl_result** out);

/* Accessors return NULL if the field is absent (e.g. no CSV on a config
 * error) or if the result handle is NULL. */
const char* cfgl_result_csv(const cfgl_result* r);
const char* cfgl_result_verdict(const cfgl_result* r);
const char* cfgl_result_error(const cfgl_result* r);

/* 1 when the run completed with every checked property holding, else 0. */
int cfgl_result_pass(const cfgl_result* r);

/* Frees a result; NULL is a no-op. */
void cfgl_result_free(cfgl_result* r);

#ifdef __cplusplus
}
#endif

#endif /* CONFIGLAB_CONFIGLAB_H_ */
