#ifndef SUNNY_H
#define SUNNY_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of fallible calls.
typedef enum SunnyStatus {
  SUNNY_STATUS_OK = 0,
  SUNNY_STATUS_NULL_ARGUMENT = 1,
  SUNNY_STATUS_INVALID_UTF8 = 2,
  SUNNY_STATUS_IO = 3,
  SUNNY_STATUS_PARSE = 4,
  SUNNY_STATUS_INVALID_INPUT = 5,
  SUNNY_STATUS_UNKNOWN_ID = 6,
  SUNNY_STATUS_DIMENSION_MISMATCH = 7,
  SUNNY_STATUS_K_TOO_LARGE = 8,
  SUNNY_STATUS_RUNNER = 9,
  SUNNY_STATUS_INDEX_OUT_OF_RANGE = 10,
  SUNNY_STATUS_PANIC = 11,
} SunnyStatus;

// Loaded knowledge base plus scaling fitted on all of its instances.
typedef struct SunnyKnowledgeBase SunnyKnowledgeBase;

typedef struct SunnySchedule SunnySchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call on this thread.
const char *sunny_last_error(void);

// Loads a knowledge base from its features and runtimes files.
//
// # Safety
// Path arguments must be NUL-terminated strings; `out` must be writable.
enum SunnyStatus sunny_kb_load(const char *features_path,
                               const char *runtimes_path,
                               double timeout_seconds,
                               struct SunnyKnowledgeBase **out);

// # Safety
// `kb` must come from `sunny_kb_load` and not be used afterwards. Null is ignored.
void sunny_kb_free(struct SunnyKnowledgeBase *kb);

// # Safety
// `kb` must be a live handle or null (which yields 0).
size_t sunny_kb_num_instances(const struct SunnyKnowledgeBase *kb);

// # Safety
// `kb` must be a live handle or null (which yields 0).
size_t sunny_kb_num_solvers(const struct SunnyKnowledgeBase *kb);

// Raw feature dimension expected by `sunny_schedule_build`.
//
// # Safety
// `kb` must be a live handle or null (which yields 0).
size_t sunny_kb_dimension(const struct SunnyKnowledgeBase *kb);

// Builds the schedule for a raw feature vector over every solver of the
// knowledge base with its timeout. A null `backup` elects the solver that
// solves the most instances.
//
// # Safety
// `query` must point to `len` doubles; `backup` is null or a NUL-terminated
// string; `out` must be writable.
enum SunnyStatus sunny_schedule_build(const struct SunnyKnowledgeBase *kb,
                                      const double *query,
                                      size_t len,
                                      size_t k,
                                      const char *backup,
                                      struct SunnySchedule **out);

// Parses a schedule document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SunnyStatus sunny_schedule_from_json(const char *json, struct SunnySchedule **out);

// # Safety
// `schedule` must come from this library and not be used afterwards. Null is ignored.
void sunny_schedule_free(struct SunnySchedule *schedule);

// Number of entries; 0 for null.
//
// # Safety
// `schedule` must be a live handle or null.
size_t sunny_schedule_len(const struct SunnySchedule *schedule);

// # Safety
// `schedule` must be a live handle or null.
uint64_t sunny_schedule_slots(const struct SunnySchedule *schedule);

// Solver of entry `index`, or null when out of range. Borrowed from the
// schedule.
//
// # Safety
// `schedule` must be a live handle or null.
const char *sunny_schedule_solver(const struct SunnySchedule *schedule, size_t index);

// Seconds allotted to entry `index`, or a negative value when out of range.
//
// # Safety
// `schedule` must be a live handle or null.
double sunny_schedule_seconds(const struct SunnySchedule *schedule, size_t index);

// Serializes the schedule document into a new string.
//
// # Safety
// `schedule` must be a live handle; `out` must be writable. Release the
// string with `sunny_string_free`.
enum SunnyStatus sunny_schedule_to_json(const struct SunnySchedule *schedule, char **out);

// # Safety
// `s` must come from this library and not be used afterwards. Null is ignored.
void sunny_string_free(char *s);

// Replays a schedule on a knowledge-base instance using its recorded
// runtimes and feature cost.
//
// # Safety
// Handles must be live; `instance` NUL-terminated; `solved` and `seconds`
// writable.
enum SunnyStatus sunny_simulate(const struct SunnyKnowledgeBase *kb,
                                const struct SunnySchedule *schedule,
                                const char *instance,
                                bool *solved,
                                double *seconds);

// Index-checked variant for bindings that prefer status codes over sentinels.
//
// # Safety
// `schedule` must be a live handle; `seconds` writable.
enum SunnyStatus sunny_schedule_entry_seconds(const struct SunnySchedule *schedule,
                                              size_t index,
                                              double *seconds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUNNY_H */
