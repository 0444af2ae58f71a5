/*
 * migtf - mixed-geometry tensor-factorization engine for knowledge-graph
 * link prediction. C API of the shared library: opaque handles, integer
 * status codes, UTF-8 strings. JSON strings cross the boundary for
 * structured data (configs, metrics); reports are written as CSV files.
 *
 * Every function returns MIGTF_OK on success. On failure the return value
 * names the error class and migtf_last_error() (thread-local) carries a
 * human-readable message valid until the next API call on that thread.
 * Strings returned through char** outputs are heap-allocated and must be
 * released with migtf_string_free().
 */

#ifndef MIGTF_H
#define MIGTF_H

#include <stdint.h>

#if defined(_WIN32)
#define MIGTF_API __declspec(dllexport)
#else
#define MIGTF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum migtf_status {
    MIGTF_OK = 0,
    MIGTF_ERR_INVALID_ARGUMENT = 1,
    MIGTF_ERR_IO = 2,
    MIGTF_ERR_PARSE = 3,
    MIGTF_ERR_STATE = 4,
    MIGTF_ERR_SHAPE = 5,
    MIGTF_ERR_NOT_FOUND = 6,
    MIGTF_ERR_NUMERIC = 7,
    MIGTF_ERR_INTERNAL = 8
} migtf_status;

typedef struct migtf_dataset migtf_dataset;
typedef struct migtf_model migtf_model;

MIGTF_API const char* migtf_status_name(migtf_status status);
MIGTF_API const char* migtf_last_error(void);
MIGTF_API void migtf_string_free(char* str);

/* -- datasets ------------------------------------------------------------ */

/* Loads train.txt/valid.txt/test.txt (tab-separated triples) from a
 * directory. */
MIGTF_API migtf_status migtf_dataset_load(const char* directory, migtf_dataset** out);

/* Adds inverse relations in place; fails with MIGTF_ERR_STATE when already
 * augmented. Training and evaluation expect an augmented dataset. */
MIGTF_API migtf_status migtf_dataset_augment(migtf_dataset* dataset);

/* Adds floor(alpha * n_train) random triples to the train split in place. */
MIGTF_API migtf_status migtf_dataset_poison(migtf_dataset* dataset, double alpha, uint64_t seed);

/* Counts and flags as a JSON object. */
MIGTF_API migtf_status migtf_dataset_info(const migtf_dataset* dataset, char** json_out);

MIGTF_API migtf_status migtf_dataset_save(const migtf_dataset* dataset, const char* directory);
MIGTF_API void migtf_dataset_free(migtf_dataset* dataset);

/* -- configuration ------------------------------------------------------- */

/* Merges per-dataset defaults, the config object and the override object
 * (either may be NULL or "{}") into a fully resolved flat config. Unknown
 * keys and type mismatches fail naming the key. */
MIGTF_API migtf_status migtf_resolve_config(const char* config_json, const char* overrides_json,
                                            char** resolved_json_out);

/* -- training and models -------------------------------------------------- */

/* Trains per the resolved config on an augmented dataset. When out_dir is
 * non-NULL, writes checkpoint_final.migtf, checkpoint_best.migtf,
 * training_log.csv and resolved_config.json there. Returns the final model. */
MIGTF_API migtf_status migtf_train(const migtf_dataset* dataset, const char* config_json,
                                   const char* out_dir, migtf_model** out);

MIGTF_API migtf_status migtf_model_load(const char* path, migtf_model** out);
MIGTF_API migtf_status migtf_model_save(const migtf_model* model, const char* path);

/* Checkpoint header metadata as JSON. */
MIGTF_API migtf_status migtf_model_info(const migtf_model* model, char** json_out);
MIGTF_API void migtf_model_free(migtf_model* model);

/* -- scoring and evaluation ----------------------------------------------- */

/* 1-N scores for one (head, relation) query; scores must hold n_entities
 * doubles. mu_override in [0,1] re-mixes a migtf model; pass a negative
 * value to keep the model's own mixture weight. */
MIGTF_API migtf_status migtf_score_query(const migtf_model* model, int64_t head, int64_t relation,
                                         double mu_override, double* scores, int64_t n_scores);

/* Filtered-ranking metrics on "valid" or "test"; rank_mode is "optimistic"
 * or "pessimistic" (NULL means optimistic). Returns MRR, HR@{1,3,10} and the
 * per-relation breakdown as JSON. */
MIGTF_API migtf_status migtf_evaluate(const migtf_model* model, const migtf_dataset* dataset,
                                      const char* split, const char* rank_mode, int threads,
                                      char** metrics_json_out);

/* -- analysis reports (CSV files) ----------------------------------------- */

MIGTF_API migtf_status migtf_report_degree_stats(const migtf_dataset* dataset,
                                                 const char* csv_path);
MIGTF_API migtf_status migtf_report_relation_correlation(const migtf_dataset* dataset,
                                                         const char* csv_path);
MIGTF_API migtf_status migtf_report_per_relation(const migtf_model* model,
                                                 const migtf_dataset* dataset,
                                                 const char* rank_mode, const char* csv_path);
MIGTF_API migtf_status migtf_report_degree_groups(const migtf_model* model,
                                                  const migtf_dataset* dataset, int64_t top_k,
                                                  int64_t group_size, const char* rank_mode,
                                                  const char* csv_path);

/* Score landscape over a square grid with u = (x, 0), v = (0, y) and the
 * fixed 2-D relation point (t_x, t_y); mode is "lorentz" (smoothed score) or
 * "geodesic". First CSV row/column carry the grid coordinates. */
MIGTF_API migtf_status migtf_landscape_grid(double t_x, double t_y, double grid_min,
                                            double grid_max, int64_t steps, double beta,
                                            const char* mode, const char* csv_path);

/* -- sweeps ---------------------------------------------------------------- */

/* kind is "curvature", "mu" or "robustness". Takes an UN-augmented dataset;
 * augmentation (and poisoning) happen inside per swept value. Writes one CSV
 * row (value, mrr, hr@10) per value. */
MIGTF_API migtf_status migtf_sweep(const migtf_dataset* dataset, const char* kind,
                                   const double* values, int64_t n_values,
                                   const char* config_json, int threads, const char* csv_path);

/* -- verification ----------------------------------------------------------- */

/* Worst relative error of the analytic gradients against central finite
 * differences on a toy model of the given kind ("tucker", "tptf", "migtf"). */
MIGTF_API migtf_status migtf_gradcheck(const char* model_kind, double beta, uint64_t seed,
                                       double* max_rel_error_out);

#ifdef __cplusplus
}
#endif

#endif /* MIGTF_H */
