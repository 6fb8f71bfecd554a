/* C interface to the mixed local/nonlocal operator lab. */
#ifndef MIXLAB_H
#define MIXLAB_H

#include <stddef.h>

#if defined(MIXLAB_BUILDING_LIBRARY)
#define MIXLAB_API __attribute__((visibility("default")))
#else
#define MIXLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mixlab_status {
    MIXLAB_OK = 0,
    MIXLAB_CHECK_FAILED = 1,     /* a verification check did not pass */
    MIXLAB_INVALID_ARGUMENT = 2, /* bad input or configuration */
    MIXLAB_NUMERIC_FAILURE = 3,  /* solver/eigensolver did not converge, evaluation error */
    MIXLAB_IO_ERROR = 4,
    MIXLAB_INTERNAL_ERROR = 5
} mixlab_status;

typedef enum mixlab_normalization {
    MIXLAB_NORMALIZATION_STANDARD = 0,
    MIXLAB_NORMALIZATION_UNIT = 1
} mixlab_normalization;

typedef struct mixlab_config mixlab_config;
typedef struct mixlab_operator mixlab_operator;

MIXLAB_API const char* mixlab_version(void);

/* Message of the last failure on this thread ("" if none). */
MIXLAB_API const char* mixlab_last_error(void);
/* `FAIL <op> <reason> <residual>` for the last numeric failure on this thread, or "". */
MIXLAB_API const char* mixlab_last_failure_line(void);

/* ---- configuration ---------------------------------------------------- */

MIXLAB_API mixlab_status mixlab_config_create(mixlab_config** out);
MIXLAB_API void mixlab_config_destroy(mixlab_config* cfg);
/* Reads a key=value file; keys already set are overwritten. */
MIXLAB_API mixlab_status mixlab_config_load(mixlab_config* cfg, const char* path);
MIXLAB_API mixlab_status mixlab_config_set(mixlab_config* cfg, const char* key, const char* value);
/* Writes the whole configuration as key=value lines into buf (NUL-terminated).
   *needed receives the required size including the terminator. */
MIXLAB_API mixlab_status mixlab_config_dump(const mixlab_config* cfg, char* buf, size_t len, size_t* needed);
MIXLAB_API mixlab_status mixlab_config_validate(const mixlab_config* cfg);

/* ---- commands ----------------------------------------------------------
   Output paths may be NULL: the primary output then goes to stdout and the
   optional ones are skipped. */

MIXLAB_API mixlab_status mixlab_run_solve(const mixlab_config* cfg, const char* solution_path,
                                          const char* history_path);
MIXLAB_API mixlab_status mixlab_run_eig(const mixlab_config* cfg, const char* out_path,
                                        const char* eigenfunction_path);
MIXLAB_API mixlab_status mixlab_run_moser(const mixlab_config* cfg, const char* out_path);
MIXLAB_API mixlab_status mixlab_run_regularity(const mixlab_config* cfg, const char* out_path,
                                               const char* report_path);
/* verdict receives "pass", "fail", "vacuous" or "rejected" (static storage). */
MIXLAB_API mixlab_status mixlab_run_maxprinciple(const mixlab_config* cfg, const char* out_path,
                                                 const char** verdict);
/* Runs the configured suite; exit_code receives 0 pass, 1 check failure,
   2 usage/config error, 3 numeric failure. */
MIXLAB_API mixlab_status mixlab_run_suite(const mixlab_config* cfg, const char* summary_path, int* exit_code);

/* ---- operators --------------------------------------------------------- */

MIXLAB_API mixlab_status mixlab_operator_create(double a, double b, size_t n, double s, double t,
                                                mixlab_normalization norm, mixlab_operator** out);
MIXLAB_API void mixlab_operator_destroy(mixlab_operator* op);
MIXLAB_API mixlab_status mixlab_operator_size(const mixlab_operator* op, size_t* n);
/* out = A(t) u; both arrays hold n values. */
MIXLAB_API mixlab_status mixlab_operator_apply(const mixlab_operator* op, const double* u, double* out);
/* Solves A(t) u = f by CG to relative residual tol. */
MIXLAB_API mixlab_status mixlab_operator_solve(const mixlab_operator* op, const double* f, double tol, double* u);
/* Two smallest eigenvalues; phi1 (n values, may be NULL) receives the principal eigenfunction. */
MIXLAB_API mixlab_status mixlab_operator_eigen(const mixlab_operator* op, double tol, double* lambda1,
                                               double* lambda2, double* phi1);

#ifdef __cplusplus
}
#endif

#endif /* MIXLAB_H */
