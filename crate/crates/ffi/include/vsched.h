#ifndef VSCHED_H
#define VSCHED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define VSCHED_BUFFER_FIRST 0

#define VSCHED_QUALITY_FIRST 1

#define VSCHED_FILL 2

#define VSCHED_EXACT 3

typedef enum VschedStatus {
  VSCHED_STATUS_OK = 0,
  VSCHED_STATUS_NULL_ARGUMENT = 1,
  VSCHED_STATUS_INVALID_ARGUMENT = 2,
  VSCHED_STATUS_PARSE_ERROR = 3,
  VSCHED_STATUS_INFEASIBLE = 4,
  VSCHED_STATUS_BUDGET_EXCEEDED = 5,
  VSCHED_STATUS_OUT_OF_RANGE = 6,
  VSCHED_STATUS_INVALID_SCHEDULE = 7,
  VSCHED_STATUS_INTERNAL = 99,
} VschedStatus;

typedef struct VschedLadder VschedLadder;

typedef struct VschedScenario VschedScenario;

typedef struct VschedSchedule VschedSchedule;

// Scheduler settings. A zero `max_nodes` or `time_limit_seconds` leaves
// that limit off.
typedef struct VschedOptions {
  double lateness_weight;
  double quality_weight;
  double buffer_weight;
  uint32_t max_buffer_segments;
  uint64_t max_nodes;
  double time_limit_seconds;
} VschedOptions;

// A segment's download slot and quality level, or `placed == false` when
// the segment was never downloaded.
typedef struct VschedPlacement {
  bool placed;
  size_t slot;
  size_t quality;
} VschedPlacement;

typedef struct VschedMetrics {
  double avg_quality_mb;
  double avg_lateness_seconds;
  double avg_buffer_segments;
  double objective_value;
} VschedMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on the calling thread, or null. The
// pointer stays valid until the next failing call on the same thread.
const char *vsched_last_error(void);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void vsched_string_free(char *s);

// Defaults: weights 440, 10 and 1, a three-segment greedy buffer, no solver
// limits.
struct VschedOptions vsched_options_default(void);

// The reference ladder: 1.77, 3.69 and 4.51 MB.
//
// # Safety
// `out` must be valid for writes.
enum VschedStatus vsched_ladder_reference(struct VschedLadder **out);

// Builds a ladder from `len` strictly increasing segment sizes and their
// bandwidths. Labels default to `q0`, `q1`, ...
//
// # Safety
// `sizes_mb` and `bandwidths_bps` must point to `len` readable elements and
// `out` must be valid for writes.
enum VschedStatus vsched_ladder_new(const double *sizes_mb,
                                    const uint64_t *bandwidths_bps,
                                    size_t len,
                                    struct VschedLadder **out);

// # Safety
// `ladder` must be null or a handle from this library and not yet freed.
void vsched_ladder_free(struct VschedLadder *ladder);

// Builds a scenario from a row-major `num_users` by `num_slots` matrix of
// per-slot capacities in MB.
//
// # Safety
// `capacities_mb` must point to `num_users * num_slots` readable values and
// `out` must be valid for writes.
enum VschedStatus vsched_scenario_new(const double *capacities_mb,
                                      size_t num_users,
                                      size_t num_slots,
                                      size_t num_segments,
                                      double slot_seconds,
                                      struct VschedScenario **out);

// Parses scenario CSV text (`user,slot,capacity_mb`, 1-based). A zero
// `num_segments` means one segment per slot.
//
// # Safety
// `csv` must be a NUL-terminated string and `out` valid for writes.
enum VschedStatus vsched_scenario_from_csv(const char *csv,
                                           size_t num_segments,
                                           double slot_seconds,
                                           struct VschedScenario **out);

// # Safety
// `scenario` must be null or a handle from this library and not yet freed.
void vsched_scenario_free(struct VschedScenario *scenario);

// Runs one of the `VSCHED_*` schedulers. `options` may be null for the
// defaults. When the exact solver exhausts its budget with a complete
// incumbent, that schedule is still written to `out` and the call returns
// `BudgetExceeded`; otherwise `out` is left untouched on failure.
//
// # Safety
// `scenario` and `ladder` must be live handles, `options` null or readable,
// and `out` valid for writes.
enum VschedStatus vsched_run_scheduler(const struct VschedScenario *scenario,
                                       const struct VschedLadder *ladder,
                                       uint32_t scheduler,
                                       const struct VschedOptions *options,
                                       struct VschedSchedule **out);

// Parses schedule CSV text (`user,segment,slot,quality_index,quality_mb`).
//
// # Safety
// `csv` must be a NUL-terminated string and `out` valid for writes.
enum VschedStatus vsched_schedule_from_csv(const char *csv, struct VschedSchedule **out);

// # Safety
// `schedule` must be null or a handle from this library and not yet freed.
void vsched_schedule_free(struct VschedSchedule *schedule);

// # Safety
// `schedule` must be a live handle and `out` valid for writes.
enum VschedStatus vsched_schedule_num_users(const struct VschedSchedule *schedule, size_t *out);

// # Safety
// `schedule` must be a live handle and `out` valid for writes.
enum VschedStatus vsched_schedule_num_segments(const struct VschedSchedule *schedule,
                                               size_t user,
                                               size_t *out);

// # Safety
// `schedule` must be a live handle and `out` valid for writes.
enum VschedStatus vsched_schedule_placement(const struct VschedSchedule *schedule,
                                            size_t user,
                                            size_t segment,
                                            struct VschedPlacement *out);

// Validates `schedule` against `scenario` and computes its metrics.
// `options` may be null for the default weights. Returns
// `InvalidSchedule` with the first violation when the schedule breaks a
// capacity or shape rule.
//
// # Safety
// All handles must be live, `options` null or readable, `out` valid for
// writes.
enum VschedStatus vsched_schedule_metrics(const struct VschedSchedule *schedule,
                                          const struct VschedScenario *scenario,
                                          const struct VschedLadder *ladder,
                                          const struct VschedOptions *options,
                                          struct VschedMetrics *out);

// Writes the schedule as CSV into a new string owned by the caller.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum VschedStatus vsched_schedule_to_csv(const struct VschedSchedule *schedule,
                                         const struct VschedLadder *ladder,
                                         char **out);

// Joins variant media playlists into the playlist served to `user` during
// `slot`. `variants[i]` is the media playlist of the i-th variant listed in
// `master`. The result is a new string owned by the caller.
//
// # Safety
// `master` and each of the `num_variants` entries of `variants` must be
// NUL-terminated strings, `schedule` a live handle, `out` valid for writes.
enum VschedStatus vsched_join_playlists(const char *master,
                                        const char *const *variants,
                                        size_t num_variants,
                                        const struct VschedSchedule *schedule,
                                        size_t user,
                                        size_t slot,
                                        uint64_t refresh_seconds,
                                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VSCHED_H */
