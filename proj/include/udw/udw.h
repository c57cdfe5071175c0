#ifndef UDW_UDW_H
#define UDW_UDW_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(UDW_BUILDING)
#define UDW_API __attribute__((visibility("default")))
#else
#define UDW_API
#endif

/* Command statuses double as process exit codes (0..3). */
typedef enum udw_status {
    UDW_OK = 0,
    UDW_ERR_INPUT = 1,
    UDW_ERR_CONFLICT = 2,
    UDW_ERR_INVARIANT = 3,
    UDW_ERR_ARGUMENT = 4,
    UDW_ERR_INTERNAL = 5
} udw_status;

typedef enum udw_format { UDW_FORMAT_CSV = 0, UDW_FORMAT_SUMMARY = 1 } udw_format;

typedef struct udw_scenario udw_scenario;
typedef struct udw_options udw_options;
typedef struct udw_result udw_result;

UDW_API const char* udw_version(void);

/* Message of the last failed call on this thread; never NULL. */
UDW_API const char* udw_last_error(void);

UDW_API udw_status udw_scenario_load(const char* path, udw_scenario** out);
UDW_API udw_status udw_scenario_parse(const char* text, udw_scenario** out);
UDW_API udw_status udw_scenario_default(udw_scenario** out);
UDW_API void udw_scenario_free(udw_scenario* s);
UDW_API int udw_scenario_dimension(const udw_scenario* s);
UDW_API size_t udw_scenario_detector_count(const udw_scenario* s);

/* Writes the aggregate region label of one event (t, x1, ..) into buf, NUL-terminated. */
UDW_API udw_status udw_classify_point(const udw_scenario* s, const double* coords, size_t n, char* buf, size_t buflen);

UDW_API udw_status udw_options_new(udw_options** out);
UDW_API void udw_options_free(udw_options* o);
UDW_API udw_status udw_options_set_seed(udw_options* o, uint64_t seed);
UDW_API udw_status udw_options_set_samples(udw_options* o, size_t samples);
UDW_API udw_status udw_options_set_tol(udw_options* o, double tol);
UDW_API udw_status udw_options_set_trials(udw_options* o, size_t trials);
/* "pgm", "algebraic-selective" or "algebraic-nonselective". */
UDW_API udw_status udw_options_set_prescription(udw_options* o, const char* p);
/* "pgm-classes" or "algebraic-global". */
UDW_API udw_status udw_options_set_semantics(udw_options* o, const char* s);
UDW_API udw_status udw_options_set_format(udw_options* o, udw_format f);
UDW_API udw_status udw_options_set_conflicts_as_errors(udw_options* o, int on);
UDW_API udw_status udw_options_set_detector(udw_options* o, const char* label);

/* Commands. On return *out holds the output text and the exit status even when the
   status is nonzero; only UDW_ERR_ARGUMENT and UDW_ERR_INTERNAL leave it NULL.
   A NULL scenario means the built-in default; a NULL options means defaults. */
UDW_API udw_status udw_classify(const udw_scenario* s, const char* points_csv, const udw_options* o, udw_result** out);
UDW_API udw_status udw_simulate(const udw_scenario* s, const udw_options* o, udw_result** out);
/* grid "t0:t1:nt,x0:x1:nx" and anchor "t,x" are optional. */
UDW_API udw_status udw_twopoint(const udw_scenario* s, const char* grid, const char* anchor, const udw_options* o,
                                udw_result** out);
/* suite: appA, appB, appC, nosignal, bell, trivial-kraus. */
UDW_API udw_status udw_verify(const char* suite, const udw_scenario* s, const udw_options* o, udw_result** out);
UDW_API udw_status udw_run(const udw_scenario* s, const udw_options* o, udw_result** out);

UDW_API const char* udw_result_text(const udw_result* r);
UDW_API const char* udw_result_error(const udw_result* r);
UDW_API int udw_result_exit_code(const udw_result* r);
UDW_API void udw_result_free(udw_result* r);

#ifdef __cplusplus
}
#endif

#endif
