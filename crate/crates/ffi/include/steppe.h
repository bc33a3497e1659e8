#ifndef STEPPE_H
#define STEPPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Zero is success.
typedef enum SteppeStatus {
  STEPPE_STATUS_OK = 0,
  STEPPE_STATUS_NULL_ARGUMENT = 1,
  STEPPE_STATUS_INVALID_UTF8 = 2,
  STEPPE_STATUS_INVALID_JSON = 3,
  STEPPE_STATUS_NO_ENTITY = 4,
  STEPPE_STATUS_RANGE = 5,
  STEPPE_STATUS_BAD_TICK = 6,
  STEPPE_STATUS_INTERNAL = 7,
  STEPPE_STATUS_PANIC = 8,
} SteppeStatus;

// Opaque simulation handle: a model, its recorded timeline and the state at
// the timeline cursor.
typedef struct SteppeSim SteppeSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a simulation of `model` at tick 0.
//
// `params_json` is a JSON object of parameter overrides, or null for
// defaults. On success `*out` receives a handle to free with
// [`steppe_sim_free`].
//
// # Safety
// `model` must be a valid C string, `params_json` null or a valid C string,
// and `out` a valid pointer to writable storage.
enum SteppeStatus steppe_sim_new(const char *model,
                                 const char *params_json,
                                 uint64_t seed,
                                 struct SteppeSim **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `sim` must be null or a handle from [`steppe_sim_new`] not yet freed.
void steppe_sim_free(struct SteppeSim *sim);

// Advances `count` ticks from the cursor, recording each one. Stepping from
// a rewound tick replays the recorded future while it matches and branches
// when it does not.
//
// # Safety
// `sim` must be a live handle.
enum SteppeStatus steppe_sim_step(struct SteppeSim *sim, uint64_t count);

// Moves the cursor to a recorded tick.
//
// # Safety
// `sim` must be a live handle.
enum SteppeStatus steppe_sim_rewind(struct SteppeSim *sim, uint64_t tick);

// Tick of the state at the cursor, or 0 for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
uint64_t steppe_sim_tick(const struct SteppeSim *sim);

// Last recorded tick, or 0 for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
uint64_t steppe_sim_max_tick(const struct SteppeSim *sim);

// Number of times an edit or a diverging replay discarded recorded ticks.
//
// # Safety
// `sim` must be null or a live handle.
uint64_t steppe_sim_branch_count(const struct SteppeSim *sim);

// 64-bit digest of the state at the cursor, or 0 for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
uint64_t steppe_sim_hash(const struct SteppeSim *sim);

// Sets one attribute of the state at the cursor. `value_json` is a JSON
// scalar (`true`, `3`, `0.5`, `"text"`). A change discards the recorded
// ticks after the cursor.
//
// # Safety
// `sim` must be a live handle; `kind`, `attr` and `value_json` valid C strings.
enum SteppeStatus steppe_sim_set_attribute(struct SteppeSim *sim,
                                           const char *kind,
                                           uint64_t index,
                                           const char *attr,
                                           const char *value_json);

// Writes a JSON object `{"entity","cell","attrs"}` describing one entity.
//
// # Safety
// `sim` must be a live handle, `kind` a valid C string and `out` writable.
enum SteppeStatus steppe_sim_inspect_json(struct SteppeSim *sim,
                                          const char *kind,
                                          uint64_t index,
                                          char **out);

// Writes a JSON object mapping each probe name to its value at the cursor
// (`null` when the probe fails).
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum SteppeStatus steppe_sim_probes_json(struct SteppeSim *sim, char **out);

// Writes the frame for point of view `pov` in the wire encoding.
//
// # Safety
// `sim` must be a live handle, `pov` a valid C string and `out` writable.
enum SteppeStatus steppe_sim_render_json(struct SteppeSim *sim, const char *pov, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void steppe_string_free(char *s);

// Message for the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call into the library on this
// thread.
const char *steppe_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEPPE_H */
