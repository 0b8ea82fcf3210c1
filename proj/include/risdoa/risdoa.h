/*
 * C interface to the gridless direction estimation library.
 *
 * Every function returns RISDOA_OK (zero) on success or a negative error
 * code; risdoa_strerror names the code and risdoa_last_error returns the
 * failure message of the most recent call on this thread. Handles are
 * opaque and must be released with their matching _free function. Output
 * arrays follow one convention: pass a buffer and its capacity through the
 * count pointer; on success the count holds the number of values written,
 * and when the buffer is null or too small the count is set to the required
 * size (a null buffer is a plain size query and succeeds, a short buffer
 * fails with RISDOA_ERR_BUFFER_TOO_SMALL).
 */

#ifndef RISDOA_H
#define RISDOA_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32) && defined(RISDOA_BUILDING)
#define RISDOA_API __declspec(dllexport)
#elif defined(__GNUC__)
#define RISDOA_API __attribute__((visibility("default")))
#else
#define RISDOA_API
#endif

#define RISDOA_VERSION_STRING "0.1.0"

enum RISDOA_ERROR {
  RISDOA_OK = 0,
  RISDOA_ERR_INVALID_ARGUMENT = -1,
  RISDOA_ERR_BAD_HANDLE = -2,
  RISDOA_ERR_PARSE = -3,
  RISDOA_ERR_IO = -4,
  RISDOA_ERR_NUMERIC = -5,
  RISDOA_ERR_UNKNOWN_METHOD = -6,
  RISDOA_ERR_BUFFER_TOO_SMALL = -7,
  RISDOA_ERR_NULL_POINTER = -8,
  RISDOA_ERR_INTERNAL = -100
};

RISDOA_API const char* risdoa_version(void);
RISDOA_API const char* risdoa_strerror(int err);
RISDOA_API const char* risdoa_last_error(void);

/*
 * Configuration: the flat key=value schema of the config file format.
 * risdoa_config_set accepts the same keys and value syntax as a file line
 * and validates the whole configuration before committing the change.
 * risdoa_config_get serializes the effective value of one key.
 */
typedef struct risdoa_config_struct* risdoa_config_t;

RISDOA_API int risdoa_config_create(risdoa_config_t* cfg);
RISDOA_API int risdoa_config_load(risdoa_config_t* cfg, const char* path);
RISDOA_API int risdoa_config_parse(risdoa_config_t* cfg, const char* text);
RISDOA_API int risdoa_config_set(risdoa_config_t cfg, const char* key, const char* value);
RISDOA_API int risdoa_config_get(risdoa_config_t cfg, const char* key, char* value,
                                 size_t* value_len);
RISDOA_API int risdoa_config_free(risdoa_config_t cfg);

/*
 * Snapshots: one synthesized or loaded observation window together with the
 * scene description needed to rebuild its reflection schedule. Samples are
 * returned interleaved (re, im, re, im, ...), so the received buffer needs
 * two doubles per slot.
 */
typedef struct risdoa_snapshot_struct* risdoa_snapshot_t;

RISDOA_API int risdoa_synthesize(risdoa_snapshot_t* snap, risdoa_config_t cfg);
RISDOA_API int risdoa_snapshot_load(risdoa_snapshot_t* snap, const char* path);
RISDOA_API int risdoa_snapshot_save(risdoa_snapshot_t snap, const char* path);
RISDOA_API int risdoa_snapshot_n_elements(risdoa_snapshot_t snap, int* n);
RISDOA_API int risdoa_snapshot_n_slots(risdoa_snapshot_t snap, int* m);
RISDOA_API int risdoa_snapshot_noise_variance(risdoa_snapshot_t snap, double* variance);
RISDOA_API int risdoa_snapshot_has_truth(risdoa_snapshot_t snap, int* flag);
RISDOA_API int risdoa_snapshot_true_angles_deg(risdoa_snapshot_t snap, double* angles,
                                               size_t* count);
RISDOA_API int risdoa_snapshot_received(risdoa_snapshot_t snap, double* re_im,
                                        size_t* count);
RISDOA_API int risdoa_snapshot_free(risdoa_snapshot_t snap);

/*
 * Estimation: runs one method ("adpp", "anm", "omp" or "fft") on a snapshot
 * under the given configuration. Angles come back in degrees, ascending.
 * Offsets (wavelengths, one per element) are only available from adpp.
 */
typedef struct risdoa_result_struct* risdoa_result_t;

RISDOA_API int risdoa_estimate(risdoa_result_t* result, risdoa_config_t cfg,
                               risdoa_snapshot_t snap, const char* method);
RISDOA_API int risdoa_result_k_detected(risdoa_result_t result, int* k);
RISDOA_API int risdoa_result_angles_deg(risdoa_result_t result, double* angles,
                                        size_t* count);
RISDOA_API int risdoa_result_peak_heights(risdoa_result_t result, double* heights,
                                          size_t* count);
RISDOA_API int risdoa_result_offsets(risdoa_result_t result, double* offsets,
                                     size_t* count);
RISDOA_API int risdoa_result_free(risdoa_result_t result);

/*
 * Batch outputs written straight to CSV files. The dual polynomial is
 * evaluated after solving on the snapshot with the offset estimate selected
 * by perturbation_mode: 0 assumes an ideal array, 1 uses the true offsets
 * stored in the snapshot (requires ground truth), 2 first estimates the
 * offsets with the full alternating method.
 */
RISDOA_API int risdoa_sweep_csv(risdoa_config_t cfg, const char* path);
RISDOA_API int risdoa_crb_csv(risdoa_config_t cfg, const char* path);
RISDOA_API int risdoa_dual_poly_csv(risdoa_config_t cfg, risdoa_snapshot_t snap,
                                    int perturbation_mode, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* RISDOA_H */
