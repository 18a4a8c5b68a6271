#ifndef TORSIONLAB_H
#define TORSIONLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TL_API __declspec(dllexport)
#else
#define TL_API __attribute__((visibility("default")))
#endif

/* Return codes; the CLI uses the same values as exit codes. */
typedef enum tl_status {
  TL_OK = 0,
  TL_CHECK_FAILED = 1,
  TL_INPUT_ERROR = 2,
  TL_DIVERGENT = 3,
  TL_INTERNAL_ERROR = 4
} tl_status;

typedef struct tl_operator tl_operator;
typedef struct tl_complex tl_complex;
typedef struct tl_report tl_report;

TL_API const char* tl_version(void);

/* Message of the last failure on the calling thread; empty after a success. */
TL_API const char* tl_last_error(void);

/* Operators. Matrices are row-major; `im` may be NULL for real entries. */
TL_API tl_status tl_operator_from_json(const char* json, tl_operator** out);
TL_API tl_status tl_operator_scalar(size_t rows, size_t cols, const double* re, const double* im,
                                    tl_operator** out);
/* Circle-fibered symbol sum_n c_n e^{2 pi i n t}: `count` coefficient matrices of size rows x cols,
   stored consecutively, with frequencies `powers`. */
TL_API tl_status tl_operator_trig_poly(size_t rows, size_t cols, size_t count, const int* powers,
                                       const double* re, const double* im, tl_operator** out);
TL_API void tl_operator_free(tl_operator* op);
TL_API tl_status tl_operator_fk_log_det(const tl_operator* op, double* log_det, int* determinant_class);

/* Complexes: differentials[q] maps degree q to q + 1; `count` differentials and count + 1 modules. */
TL_API tl_status tl_complex_from_json(const char* json, tl_complex** out);
TL_API tl_status tl_complex_create(size_t count, const size_t* dims, const tl_operator* const* differentials,
                                   tl_complex** out);
TL_API void tl_complex_free(tl_complex* c);
TL_API tl_status tl_complex_log_torsion(const tl_complex* c, double* out);
/* Writes min(capacity, modules) reduced betti numbers and the module count. */
TL_API tl_status tl_complex_reduced_betti(const tl_complex* c, double* betti, size_t capacity, size_t* modules);

/* Commands. On TL_OK, TL_CHECK_FAILED and TL_DIVERGENT with a computed report, *out holds the
   report and the return value is its status. On input or internal errors *out is NULL. */
TL_API tl_status tl_cmd_torsion(const char* complex_path, tl_report** out);
TL_API tl_status tl_cmd_fkdet(const char* operator_path, tl_report** out);
/* check: "volume", "composition", "cmm" or "milnor". */
TL_API tl_status tl_cmd_cone(const char* input_path, const char* check, tl_report** out);

/* anomaly: NULL or "" for plain torsion, "hermitian" or "subdivision". mu_path may be NULL.
   `at` < 0 picks the middle of the first cell. */
TL_API tl_status tl_cmd_morse(const char* morse_path, const char* rep_path, const char* mu_path,
                              const char* anomaly, double at, double spacing, tl_report** out);

typedef struct tl_circle_args {
  const char* mode; /* det, relative, witten, euler, product */
  int has_theta;
  double theta;
  const char* holonomy_path; /* may be NULL */
  const char* mu_path;       /* may be NULL */
  int chi_n;
  const double* witten_t;
  size_t witten_t_count;
  size_t grid;
} tl_circle_args;

TL_API void tl_circle_args_init(tl_circle_args* args);
TL_API tl_status tl_cmd_circle(const tl_circle_args* args, tl_report** out);

/* NULL arrays keep the default basis {t, log t, t log t, 1} without remainder. */
TL_API tl_status tl_cmd_fit(const char* csv_path, const double* exponents, size_t n_exponents,
                            const double* log_exponents, size_t n_log_exponents, const double* remainder,
                            size_t n_remainder, tl_report** out);

/* profile: "smoke", "desk" or "deep". threads = 0 uses TORSIONLAB_THREADS or the core count. */
TL_API tl_status tl_cmd_verify_all(uint64_t seed, const char* profile, unsigned threads, tl_report** out);

TL_API tl_status tl_report_status(const tl_report* r);
/* Owned by the report; valid until the next call on it or tl_report_free. */
TL_API const char* tl_report_json(tl_report* r, int pretty, int timing);
TL_API void tl_report_free(tl_report* r);

#ifdef __cplusplus
}
#endif

#endif
