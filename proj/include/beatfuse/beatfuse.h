/* beatfuse C API: ECG beat classifier-fusion toolkit.
 *
 * All functions return a bf_status code; on failure bf_last_error()
 * describes the problem for the calling thread. Handles are opaque and
 * must be released with their matching _free function.
 */
#ifndef BEATFUSE_H
#define BEATFUSE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BEATFUSE_API __declspec(dllexport)
#else
#define BEATFUSE_API __attribute__((visibility("default")))
#endif

typedef enum bf_status {
  BF_OK = 0,
  BF_ERR_USAGE = 1,   /* bad arguments or configuration */
  BF_ERR_DATA = 2,    /* malformed or inconsistent input data */
  BF_ERR_NUMERIC = 3  /* training or numeric failure */
} bf_status;

typedef struct bf_dataset bf_dataset;

BEATFUSE_API const char* bf_version(void);

/* Message for the most recent failure on this thread; never NULL. */
BEATFUSE_API const char* bf_last_error(void);

/* ---- datasets ---- */

BEATFUSE_API bf_status bf_dataset_parse_csv(const char* path, bf_dataset** out);

/* counts_spec: comma-separated LABEL=COUNT pairs, e.g. "N=100,PVC=50".
 * Labels: N, PVC, APB, RBBB, LBBB, OTHER. */
BEATFUSE_API bf_status bf_dataset_synth(const char* counts_spec, uint64_t seed,
                                        double separation, bf_dataset** out);

BEATFUSE_API bf_status bf_dataset_write_csv(const bf_dataset* ds, const char* path);

/* Number of beats; 0 on NULL handle. */
BEATFUSE_API size_t bf_dataset_size(const bf_dataset* ds);

/* Beats carrying `label`; (size_t)-1 on unknown label. */
BEATFUSE_API size_t bf_dataset_class_count(const bf_dataset* ds, const char* label);

BEATFUSE_API void bf_dataset_free(bf_dataset* ds);

/* ---- pipeline ---- */

/* Signal + fiducial annotations -> feature CSV. exclusions_path may be
 * NULL to skip the exclusion report. */
BEATFUSE_API bf_status bf_extract_features(const char* signal_path, const char* fiducial_path,
                                           const char* record_id, const char* out_csv,
                                           const char* exclusions_path);

/* Split per config, train the three classifiers, fit fusion; writes
 * mlp.model, rbf.model, svm.model, fusion.model into out_dir. */
BEATFUSE_API bf_status bf_train(const char* config_path, const char* out_dir);

/* Load models from model_dir, score every beat of data_csv, and write
 * report.json plus rendered tables. format: "markdown" or "csv". */
BEATFUSE_API bf_status bf_evaluate(const char* model_dir, const char* data_csv,
                                   const char* out_dir, const char* format);

/* End-to-end: train per config, evaluate on the held-out test split, and
 * write models, report.json, and rendered tables into out_dir. */
BEATFUSE_API bf_status bf_run(const char* config_path, const char* out_dir, const char* format);

/* Re-render a stored report.json. out_path may be NULL for stdout. */
BEATFUSE_API bf_status bf_render_report(const char* report_path, const char* format,
                                        const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* BEATFUSE_H */
