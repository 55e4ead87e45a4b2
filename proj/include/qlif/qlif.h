/* C interface to the qlif library. Every call returns a qlif_status; on
 * failure the message of the last error on the calling thread is available
 * through qlif_last_error(). Handles are opaque and owned by the caller. */
#ifndef QLIF_QLIF_H
#define QLIF_QLIF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QLIF_API __declspec(dllexport)
#else
#define QLIF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qlif_status {
    QLIF_OK = 0,
    QLIF_ERR_INVALID_ARGUMENT = 1,
    QLIF_ERR_SINGULAR_REGION = 2,
    QLIF_ERR_STEP_TOO_LARGE = 3,
    QLIF_ERR_DEGENERATE_METRIC = 4,
    QLIF_ERR_ZERO_NORM = 5,
    QLIF_ERR_GRID_MISMATCH = 6,
    QLIF_ERR_OFF_GRID_TRANSLATION = 7,
    QLIF_ERR_WRONG_FRAME = 8,
    QLIF_ERR_MISSING_TETRAD_RECORD = 9,
    QLIF_ERR_QUADRATURE_NON_CONVERGENCE = 10,
    QLIF_ERR_INFINITE_LIFETIME = 11,
    QLIF_ERR_CONFIG = 12,
    QLIF_ERR_IO = 13,
    QLIF_ERR_FORMAT = 14,
    QLIF_ERR_INTERNAL = 99
} qlif_status;

typedef enum qlif_frame { QLIF_FRAME_R = 0, QLIF_FRAME_P = 1 } qlif_frame;

typedef enum qlif_shape { QLIF_UNIFORM_SPHERE = 0, QLIF_GAUSSIAN = 1 } qlif_shape;

typedef struct qlif_metric qlif_metric;
typedef struct qlif_state qlif_state;
typedef struct qlif_scenario qlif_scenario;

/* Thread-local; valid until the next failing call on the same thread. */
QLIF_API const char* qlif_last_error(void);
/* {"status":"error","code":...,"message":...} for the last failure. */
QLIF_API const char* qlif_last_error_record(void);
/* Summary text of the last successful run or self-test. */
QLIF_API const char* qlif_last_message(void);
QLIF_API const char* qlif_status_name(qlif_status status);

/* metric_json: {"kind": ..., ...}; units_json may be NULL (geometric). */
QLIF_API qlif_status qlif_metric_create(const char* metric_json, const char* units_json, qlif_metric** out);
QLIF_API void qlif_metric_destroy(qlif_metric* metric);
/* g: 16 values, row-major. */
QLIF_API qlif_status qlif_metric_eval(const qlif_metric* metric, const double x[4], double g[16]);
QLIF_API qlif_status qlif_metric_sqrt_neg_det(const qlif_metric* metric, const double x[4], double* out);
/* gamma[(mu * 4 + nu) * 4 + rho] = Gamma^mu_{nu rho} */
QLIF_API qlif_status qlif_metric_christoffel(const qlif_metric* metric, const double x[4], double gamma[64]);
/* Canonical tetrad at x; b and f row-major. */
QLIF_API qlif_status qlif_tetrad_build(const qlif_metric* metric, const double x[4], double b[16], double f[16]);

QLIF_API qlif_status qlif_state_load(const char* path, qlif_state** out);
QLIF_API qlif_status qlif_state_save(const qlif_state* state, const char* path);
QLIF_API void qlif_state_destroy(qlif_state* state);
QLIF_API qlif_status qlif_state_norm(const qlif_state* state, double* out);
QLIF_API qlif_status qlif_state_frame(const qlif_state* state, qlif_frame* out);
QLIF_API qlif_status qlif_state_branch_count(const qlif_state* state, size_t* out);
QLIF_API qlif_status qlif_state_inner_product(const qlif_state* a, const qlif_state* b, double* re, double* im);
/* max_deviation may be NULL. */
QLIF_API qlif_status qlif_state_to_qlif(const qlif_state* state, unsigned threads, qlif_state** out,
                                        double* max_deviation);
QLIF_API qlif_status qlif_state_from_qlif(const qlif_state* state, qlif_state** out);

/* Two copies of one distribution separated by d. */
QLIF_API qlif_status qlif_collapse_energy(qlif_shape shape, double mass, double size, double d, double G,
                                          double* energy);
QLIF_API qlif_status qlif_collapse_time(qlif_shape shape, double mass, double size, double d, double G,
                                        double hbar, double* time);

QLIF_API qlif_status qlif_scenario_load(const char* path, qlif_scenario** out);
QLIF_API qlif_status qlif_scenario_parse(const char* json_text, qlif_scenario** out);
QLIF_API void qlif_scenario_destroy(qlif_scenario* scenario);
QLIF_API qlif_status qlif_scenario_build_state(const qlif_scenario* scenario, qlif_state** out);

/* command: "transform", "geodesics" or "collapse". threads = 0 keeps the
 * configured value. exit_code receives 0, 1 or 2. Files are written even
 * when the command itself fails; the status is then the failure. */
QLIF_API qlif_status qlif_run_command(const qlif_scenario* scenario, const char* command, const char* out_dir,
                                      unsigned threads, int* exit_code);

/* Writes one line per check to qlif_last_message(). */
QLIF_API qlif_status qlif_selftest(uint64_t seed, double tolerance_scale, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
