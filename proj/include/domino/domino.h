/*
 * C interface to the domino calibration toolkit.
 *
 * All objects are opaque handles created by a domino_*_create/load/...
 * function and released with the matching domino_*_free. Every fallible call
 * returns a domino_status; on failure a message describing the error is
 * available from domino_last_error() on the same thread until the next call.
 * Pointers returned by accessors are borrowed from their owning handle.
 */
#ifndef DOMINO_DOMINO_H
#define DOMINO_DOMINO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DOMINO_BUILDING_LIBRARY)
#define DOMINO_API __declspec(dllexport)
#else
#define DOMINO_API __declspec(dllimport)
#endif
#else
#define DOMINO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum domino_status {
  DOMINO_OK = 0,
  DOMINO_ERR_INDEX = 1,
  DOMINO_ERR_SHAPE = 2,
  DOMINO_ERR_ARGUMENT = 3,
  DOMINO_ERR_PARSE = 4,
  DOMINO_ERR_VALIDATION = 5,
  DOMINO_ERR_NUMERIC = 6,
  DOMINO_ERR_CONFIG = 7,
  DOMINO_ERR_DATASET = 8,
  DOMINO_ERR_UNSUPPORTED = 9,
  DOMINO_ERR_TRAINING = 10,
  DOMINO_ERR_IO = 11,
  DOMINO_ERR_INTERNAL = 12
} domino_status;

typedef enum domino_mode {
  DOMINO_MODE_BASE = 0, /* no regularization */
  DOMINO_MODE_CM = 1,   /* confusion-matrix penalty, three-phase workflow */
  DOMINO_MODE_HC = 2    /* hierarchical-class penalty from the config */
} domino_mode;

typedef struct domino_config domino_config;
typedef struct domino_dataset domino_dataset;
typedef struct domino_matrix domino_matrix;
typedef struct domino_model domino_model;
typedef struct domino_run domino_run;
typedef struct domino_report domino_report;

DOMINO_API const char* domino_version(void);
DOMINO_API const char* domino_status_string(domino_status status);
DOMINO_API const char* domino_last_error(void);

/* ---- configuration ---------------------------------------------------- */

DOMINO_API domino_status domino_config_default(domino_config** out);
DOMINO_API domino_status domino_config_load(const char* path, domino_config** out);
DOMINO_API domino_status domino_config_parse(const char* json_text, domino_config** out);
DOMINO_API void domino_config_free(domino_config* cfg);

/* Sets both the phantom and the training seed. */
DOMINO_API domino_status domino_config_set_seed(domino_config* cfg, uint64_t seed);
DOMINO_API domino_status domino_config_set_beta(domino_config* cfg, double beta);
DOMINO_API domino_status domino_config_set_scale(domino_config* cfg, double scale);
DOMINO_API domino_status domino_config_set_iterations(domino_config* cfg, uint64_t iterations);
DOMINO_API size_t domino_config_num_classes(const domino_config* cfg);
DOMINO_API const char* domino_config_class_name(const domino_config* cfg, size_t index);
DOMINO_API int domino_config_has_hierarchy(const domino_config* cfg);
DOMINO_API int domino_config_has_group_map(const domino_config* cfg);

/* Copies the config as JSON into buf (NUL-terminated). *needed receives the
 * required size including the terminator; buf may be NULL to query it. */
DOMINO_API domino_status domino_config_to_json(const domino_config* cfg, char* buf, size_t cap,
                                               size_t* needed);

/* ---- datasets --------------------------------------------------------- */

DOMINO_API domino_status domino_phantom_generate(const domino_config* cfg, uint64_t first_index,
                                                 size_t count, domino_dataset** out);
DOMINO_API domino_status domino_dataset_load(const domino_config* cfg, const char* dir,
                                             domino_dataset** out);
DOMINO_API domino_status domino_dataset_save(const domino_dataset* ds, const char* dir);
DOMINO_API size_t domino_dataset_size(const domino_dataset* ds);
DOMINO_API domino_status domino_dataset_dims(const domino_dataset* ds, size_t index, int* width,
                                             int* height);
/* Copies the image intensities (row-major) or truth labels of one sample. */
DOMINO_API domino_status domino_dataset_image(const domino_dataset* ds, size_t index, double* out,
                                              size_t cap);
DOMINO_API domino_status domino_dataset_truth(const domino_dataset* ds, size_t index, uint8_t* out,
                                              size_t cap);
DOMINO_API void domino_dataset_free(domino_dataset* ds);

/* ---- matrices (confusion counts, penalty W) --------------------------- */

DOMINO_API domino_status domino_matrix_create(size_t rows, size_t cols, const double* data,
                                              domino_matrix** out);
/* ".csv" paths use headerless CSV, anything else DOM1 f64. */
DOMINO_API domino_status domino_matrix_load(const char* path, domino_matrix** out);
DOMINO_API domino_status domino_matrix_save(const domino_matrix* m, const char* path);
DOMINO_API size_t domino_matrix_rows(const domino_matrix* m);
DOMINO_API size_t domino_matrix_cols(const domino_matrix* m);
DOMINO_API const double* domino_matrix_data(const domino_matrix* m);
DOMINO_API void domino_matrix_free(domino_matrix* m);

/* W from confusion counts (row = true class): S * (1 - row-normalized). */
DOMINO_API domino_status domino_penalty_from_confusion(const domino_matrix* counts, double scale,
                                                       domino_matrix** out);
/* W from the config hierarchy (max and within-group penalties). */
DOMINO_API domino_status domino_penalty_from_hierarchy(const domino_config* cfg,
                                                       domino_matrix** out);
/* Checks the penalty invariants: square, zero diagonal, non-negative. */
DOMINO_API domino_status domino_penalty_validate(const domino_matrix* w);

/* ---- training --------------------------------------------------------- */

/* heldout is required for DOMINO_MODE_CM and ignored otherwise. */
DOMINO_API domino_status domino_train(const domino_config* cfg, domino_mode mode,
                                      const domino_dataset* train, const domino_dataset* heldout,
                                      domino_run** out);
DOMINO_API const domino_model* domino_run_model(const domino_run* run);
/* Phase-one model of the CM workflow; NULL for other modes. */
DOMINO_API const domino_model* domino_run_base_model(const domino_run* run);
/* NULL for DOMINO_MODE_BASE. */
DOMINO_API const domino_matrix* domino_run_penalty(const domino_run* run);
/* Held-out confusion counts; NULL unless DOMINO_MODE_CM. */
DOMINO_API const domino_matrix* domino_run_confusion(const domino_run* run);
DOMINO_API domino_status domino_run_write_trace(const domino_run* run, const char* path);
DOMINO_API size_t domino_run_warning_count(const domino_run* run);
DOMINO_API const char* domino_run_warning(const domino_run* run, size_t index);
DOMINO_API void domino_run_free(domino_run* run);

/* ---- models ----------------------------------------------------------- */

DOMINO_API domino_status domino_model_load(const char* path, domino_model** out);
DOMINO_API domino_status domino_model_save(const domino_model* model, const char* path);
DOMINO_API size_t domino_model_num_classes(const domino_model* model);
/* Softmax output for one sample, pixels x classes, row-major. */
DOMINO_API domino_status domino_model_predict(const domino_model* model, const domino_dataset* ds,
                                              size_t index, double* out, size_t cap);
DOMINO_API void domino_model_free(domino_model* model);

/* ---- evaluation ------------------------------------------------------- */

/* merged != 0 adds the coarse report using the config group map. */
DOMINO_API domino_status domino_evaluate(const domino_model* model, const domino_dataset* ds,
                                         const domino_config* cfg, int merged,
                                         domino_report** out);
DOMINO_API domino_status domino_report_write(const domino_report* report, const char* dir);
DOMINO_API domino_status domino_report_top_n(const domino_report* report, int merged, size_t n,
                                             double* out);
DOMINO_API domino_status domino_report_mean_ece(const domino_report* report, int merged,
                                                double* out);
DOMINO_API size_t domino_report_num_classes(const domino_report* report, int merged);
DOMINO_API size_t domino_report_warning_count(const domino_report* report);
DOMINO_API const char* domino_report_warning(const domino_report* report, size_t index);
DOMINO_API void domino_report_free(domino_report* report);

/* Renders every reliability_*.csv in in_dir to an SVG in out_dir. */
DOMINO_API domino_status domino_render_reliability(const char* in_dir, const char* out_dir,
                                                   size_t* written);

#ifdef __cplusplus
}
#endif

#endif /* DOMINO_DOMINO_H */
