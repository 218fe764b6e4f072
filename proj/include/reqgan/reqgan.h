/* reqgan: quantum-GAN generator laboratory, C interface.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns a reqgan_status; on failure a description of
 * the last error on the calling thread is available via reqgan_last_error().
 * Output strings are copied into caller buffers using the snprintf
 * convention: *needed receives the full length (excluding the terminator).
 */
#ifndef REQGAN_H
#define REQGAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(REQGAN_BUILDING)
#    define REQGAN_API __declspec(dllexport)
#  else
#    define REQGAN_API __declspec(dllimport)
#  endif
#else
#  define REQGAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum reqgan_status {
  REQGAN_OK = 0,
  REQGAN_ERR_CONFIG = 1,      /* invalid configuration or shape mismatch */
  REQGAN_ERR_USAGE = 2,       /* API misuse: null handle, bad argument, wrong order */
  REQGAN_ERR_PARSE = 3,       /* malformed file (IDX, checkpoint, PGM) */
  REQGAN_ERR_IO = 4,          /* file could not be opened or written */
  REQGAN_ERR_NUMERICAL = 5,   /* NaN/Inf during training */
  REQGAN_ERR_DEGENERATE = 6,  /* ancilla post-selection below the acceptance floor */
  REQGAN_ERR_INTERNAL = 7
} reqgan_status;

typedef struct reqgan_config reqgan_config;
typedef struct reqgan_session reqgan_session;
typedef struct reqgan_dataset reqgan_dataset;
typedef struct reqgan_images reqgan_images;

typedef struct reqgan_epoch_log {
  uint64_t epoch;
  double wasserstein_estimate;
  double critic_loss;
  double generator_loss;
  double mean_acceptance;
  double mean_brightness;
  double mean_rms_contrast;
  uint64_t generator_steps;
  uint64_t critic_steps;
  uint64_t aborted_batches;
  double wall_seconds;
  double pixel_mmd;      /* NaN when not evaluated */
  double pixel_frechet;  /* NaN when not evaluated */
} reqgan_epoch_log;

typedef struct reqgan_eval_report {
  double pixel_mmd;
  double pixel_frechet;
  double brightness_mean;
  double brightness_std;
  double contrast_mean;
  double contrast_std;
} reqgan_eval_report;

REQGAN_API const char* reqgan_version(void);
REQGAN_API const char* reqgan_last_error(void);
REQGAN_API const char* reqgan_status_name(reqgan_status status);

/* ---- configuration ---------------------------------------------------- */

REQGAN_API reqgan_status reqgan_config_create(reqgan_config** out);
REQGAN_API void reqgan_config_destroy(reqgan_config* cfg);
/* Applies a key = value text file on top of the current values. */
REQGAN_API reqgan_status reqgan_config_load_file(reqgan_config* cfg, const char* path);
REQGAN_API reqgan_status reqgan_config_parse(reqgan_config* cfg, const char* text);
/* key is "section.key", e.g. "train.epochs". */
REQGAN_API reqgan_status reqgan_config_set(reqgan_config* cfg, const char* key, const char* value);
REQGAN_API reqgan_status reqgan_config_get(const reqgan_config* cfg, const char* key, char* buf,
                                           size_t cap, size_t* needed);
/* Fails with REQGAN_ERR_CONFIG listing every violated constraint. */
REQGAN_API reqgan_status reqgan_config_validate(const reqgan_config* cfg);
REQGAN_API reqgan_status reqgan_config_render(const reqgan_config* cfg, char* buf, size_t cap,
                                              size_t* needed);

/* ---- data ----------------------------------------------------------- */

/* Loads, filters, splits and resizes the dataset named by the config. */
REQGAN_API reqgan_status reqgan_dataset_load(const reqgan_config* cfg, reqgan_dataset** out);
REQGAN_API void reqgan_dataset_destroy(reqgan_dataset* ds);
REQGAN_API size_t reqgan_dataset_train_size(const reqgan_dataset* ds);
REQGAN_API size_t reqgan_dataset_test_size(const reqgan_dataset* ds);
/* Copies the test split (or the train split when `train` is nonzero). */
REQGAN_API reqgan_status reqgan_dataset_images(const reqgan_dataset* ds, int train,
                                               reqgan_images** out);

/* ---- sessions (model + optimizer state) -------------------------------- */

REQGAN_API reqgan_status reqgan_session_create(const reqgan_config* cfg, reqgan_session** out);
REQGAN_API reqgan_status reqgan_session_open(const char* checkpoint_path, reqgan_session** out);
REQGAN_API void reqgan_session_destroy(reqgan_session* s);
REQGAN_API reqgan_status reqgan_session_save(const reqgan_session* s, const char* path);
REQGAN_API uint64_t reqgan_session_epoch(const reqgan_session* s);
/* Copies the session's resolved config into a new handle. */
REQGAN_API reqgan_status reqgan_session_config(const reqgan_session* s, reqgan_config** out);

REQGAN_API reqgan_status reqgan_session_train_epoch(reqgan_session* s, const reqgan_dataset* ds,
                                                    reqgan_epoch_log* out);
REQGAN_API reqgan_status reqgan_session_generate(const reqgan_session* s, size_t count,
                                                 uint64_t seed, reqgan_images** out);
/* Generated (`samples` images, seed) versus the dataset's test split. */
REQGAN_API reqgan_status reqgan_session_evaluate(const reqgan_session* s,
                                                 const reqgan_dataset* ds, size_t samples,
                                                 uint64_t seed, reqgan_eval_report* out);
/* Summary of the checkpoint tensor table, one "name shape" line per tensor. */
REQGAN_API reqgan_status reqgan_session_describe(const reqgan_session* s, char* buf, size_t cap,
                                                 size_t* needed);

/* ---- image batches ---------------------------------------------------- */

REQGAN_API void reqgan_images_destroy(reqgan_images* im);
REQGAN_API size_t reqgan_images_count(const reqgan_images* im);
/* Side length of the visible square (28 for pad_crop, canvas side otherwise). */
REQGAN_API size_t reqgan_images_side(const reqgan_images* im);
/* Visible-region pixels, row-major, count * side * side doubles in [0,1]. */
REQGAN_API const double* reqgan_images_pixels(const reqgan_images* im);
/* format: "pgm" or "png". Writes <prefix>_NNNN.<ext> and, if montage, <prefix>_grid.<ext>. */
REQGAN_API reqgan_status reqgan_images_export(const reqgan_images* im, const char* dir,
                                              const char* prefix, const char* format,
                                              int montage);
/* Unbiased pixel-feature MMD^2 and Frechet distance between two batches. */
REQGAN_API reqgan_status reqgan_images_compare(const reqgan_images* a, const reqgan_images* b,
                                               double* pixel_mmd, double* pixel_frechet);
REQGAN_API reqgan_status reqgan_images_stats(const reqgan_images* im, double* brightness_mean,
                                             double* brightness_std, double* contrast_mean,
                                             double* contrast_std);

/* ---- CSV helpers ------------------------------------------------------ */

REQGAN_API const char* reqgan_epoch_log_csv_header(void);
REQGAN_API reqgan_status reqgan_epoch_log_csv_row(const reqgan_epoch_log* log, char* buf,
                                                  size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* REQGAN_H */
