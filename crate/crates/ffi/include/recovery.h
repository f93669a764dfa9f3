#ifndef RECOVERY_H
#define RECOVERY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RecMethod {
  REC_METHOD_BCG = 0,
  REC_METHOD_SEQ_OE = 1,
  REC_METHOD_SEQ_UE = 2,
} RecMethod;

typedef enum RecRunStatus {
  REC_RUN_STATUS_SOLVED = 0,
  REC_RUN_STATUS_TIME_LIMIT = 1,
  REC_RUN_STATUS_STALLED = 2,
  REC_RUN_STATUS_GATE_INFEASIBLE = 3,
} RecRunStatus;

typedef enum RecStatus {
  REC_STATUS_OK = 0,
  REC_STATUS_NULL_ARGUMENT = 1,
  // Input string is not UTF-8.
  REC_STATUS_ENCODING = 2,
  // Malformed or inconsistent instance.
  REC_STATUS_INPUT = 3,
  // The solver failed (LP trouble, budget, capacity).
  REC_STATUS_SOLVER = 4,
  // A Rust panic was caught at the boundary.
  REC_STATUS_INTERNAL = 5,
} RecStatus;

// Opaque parsed instance.
typedef struct RecInstance RecInstance;

// Opaque solver report.
typedef struct RecReport RecReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *rec_last_error(void);

// Library version as a static NUL-terminated string.
const char *rec_version(void);

// Parses and validates an instance document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RecStatus rec_instance_from_json(const char *json, struct RecInstance **out);

// # Safety
// `inst` must come from [`rec_instance_from_json`] or be null.
void rec_instance_free(struct RecInstance *inst);

// Overrides the wall-clock limit in seconds.
//
// # Safety
// `inst` must be a live handle.
enum RecStatus rec_instance_set_time_limit(struct RecInstance *inst, double seconds);

// Number of flights, pseudo flights included.
//
// # Safety
// `inst` must be a live handle or null (returns 0).
size_t rec_instance_flight_count(const struct RecInstance *inst);

// Solves with the chosen method. A report is produced for every run that
// finishes, including time-limited and gate-infeasible ones.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum RecStatus rec_solve(const struct RecInstance *inst,
                         enum RecMethod method,
                         struct RecReport **out);

// # Safety
// `report` must come from [`rec_solve`] or be null.
void rec_report_free(struct RecReport *report);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum RecStatus rec_report_status(const struct RecReport *report, enum RecRunStatus *out);

// Total recovery cost. Fails with `Solver` when the run produced no plan.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum RecStatus rec_report_total_cost(const struct RecReport *report, double *out);

// Full report as JSON. Release with [`rec_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum RecStatus rec_report_to_json(const struct RecReport *report, char **out);

// # Safety
// `s` must come from this library or be null.
void rec_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECOVERY_H */
