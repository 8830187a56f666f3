// Copyright 2026 The hsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the heralded storage and two-node link simulator.
 *
 * Every fallible call returns an hsq_status. On failure the message is kept
 * per thread and read back with hsq_last_error(). Handles are opaque and owned
 * by the caller; release them with the matching _free function.
 */
#ifndef HSQ_HSQ_H_
#define HSQ_HSQ_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HSQ_API __declspec(dllexport)
#else
#define HSQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsq_status {
  HSQ_OK = 0,
  HSQ_ERR_INVALID_ARGUMENT = 1,
  HSQ_ERR_CONFIG = 2,
  HSQ_ERR_NO_STATISTICS = 3,
  HSQ_ERR_NONCONVERGENCE = 4,
  HSQ_ERR_IO = 5,
  HSQ_ERR_INTERNAL = 6
} hsq_status;

typedef struct hsq_config hsq_config_t;
typedef struct hsq_report hsq_report_t;

HSQ_API const char* hsq_version(void);

/* Message of the last failed call on this thread, "" if none. */
HSQ_API const char* hsq_last_error(void);

/* Configuration */

HSQ_API hsq_status hsq_config_default(hsq_config_t** out);
HSQ_API hsq_status hsq_config_load(const char* path, hsq_config_t** out);
HSQ_API hsq_status hsq_config_parse(const char* yaml_text, hsq_config_t** out);
HSQ_API void hsq_config_free(hsq_config_t* cfg);

/* Replaces one dotted key ("node_b.eta_store", "detectors.dark_prob",
 * "phase_grid") with a YAML value. The whole config is revalidated and left
 * unchanged on error. */
HSQ_API hsq_status hsq_config_set(hsq_config_t* cfg, const char* key, const char* yaml_value);
HSQ_API hsq_status hsq_config_set_seed(hsq_config_t* cfg, uint64_t seed);
/* mode is "analytic" or "sampled". */
HSQ_API hsq_status hsq_config_set_mode(hsq_config_t* cfg, const char* mode);

HSQ_API hsq_status hsq_config_hash(const hsq_config_t* cfg, uint64_t* out);

/* Canonical YAML. Copies at most cap bytes including the terminator into buf
 * (which may be NULL when cap is 0) and stores the full length in *needed. */
HSQ_API hsq_status hsq_config_dump(const hsq_config_t* cfg, char* buf, size_t cap,
                                   size_t* needed);

/* Protocol runs */

/* input is one of E, L, D, A, R, Lc. */
HSQ_API hsq_status hsq_run_heralded_storage(const hsq_config_t* cfg, const char* input,
                                            hsq_report_t** out);
HSQ_API hsq_status hsq_run_single(const hsq_config_t* cfg, hsq_report_t** out);
HSQ_API hsq_status hsq_run_two_node(const hsq_config_t* cfg, hsq_report_t** out);
/* protocol is "single" or "two_node". */
HSQ_API hsq_status hsq_phase_sweep(const hsq_config_t* cfg, const char* protocol,
                                   hsq_report_t** out);

/* Tomography from counts files with "setting,outcome,count" rows. A process
 * fit takes one file per input state; names[i] labels paths[i]. When input
 * names the prepared state (E, L, D, A, R, Lc) the state fit also reports
 * its fidelity; pass NULL otherwise. */
HSQ_API hsq_status hsq_tomo_state_csv(const hsq_config_t* cfg, const char* path,
                                      const char* input, hsq_report_t** out);
HSQ_API hsq_status hsq_tomo_process_csv(const hsq_config_t* cfg, const char* const* names,
                                        const char* const* paths, size_t count,
                                        hsq_report_t** out);

/* Reports */

HSQ_API void hsq_report_free(hsq_report_t* report);

/* Writes report.txt, metrics.csv and the applicable CSV series into dir. */
HSQ_API hsq_status hsq_report_write(const hsq_report_t* report, const char* dir);

/* Same buffer contract as hsq_config_dump. */
HSQ_API hsq_status hsq_report_text(const hsq_report_t* report, char* buf, size_t cap,
                                   size_t* needed);

HSQ_API hsq_status hsq_report_metric(const hsq_report_t* report, const char* key,
                                     double* value, double* uncertainty);
HSQ_API size_t hsq_report_metric_count(const hsq_report_t* report);
/* Strings stay valid for the lifetime of the report. */
HSQ_API hsq_status hsq_report_metric_at(const hsq_report_t* report, size_t index,
                                        const char** key, double* value, double* uncertainty,
                                        const char** method);

HSQ_API size_t hsq_report_verdict_count(const hsq_report_t* report);
HSQ_API hsq_status hsq_report_verdict_at(const hsq_report_t* report, size_t index,
                                         const char** key, double* value, double* threshold,
                                         int* pass);

/* Closed-form figures of merit */

HSQ_API hsq_status hsq_herald_efficiency(double eta_sr_prime, double eta_t, double eta_d,
                                         double* out);
HSQ_API hsq_status hsq_entanglement_fidelity_vis(double v0, double v1, double* out);
HSQ_API hsq_status hsq_entanglement_fidelity_pauli(double xx, double yy, double zz,
                                                   double* out);

#ifdef __cplusplus
}
#endif

#endif /* HSQ_HSQ_H_ */
