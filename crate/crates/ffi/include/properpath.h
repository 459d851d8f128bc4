#ifndef PROPERPATH_H
#define PROPERPATH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PpStatus {
  PpStatus_Ok = 0,
  PpStatus_InvalidArgument = 1,
  PpStatus_NotConverged = 2,
  PpStatus_InputError = 3,
  PpStatus_CapExceeded = 4,
  PpStatus_Internal = 5,
} PpStatus;

/**
 * Parsed game.
 */
typedef struct PpGame PpGame;

/**
 * Outcome of one trace.
 */
typedef struct PpSolveResult PpSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the library.
 */
const char *pp_last_error(void);

/**
 * Parse a game from text in the tree file format.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` writable.
 */
enum PpStatus pp_game_parse(const char *text, struct PpGame **out);

/**
 * Load a bundled game by name (`fig1`, `fig2`, `fig3`).
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` writable.
 */
enum PpStatus pp_game_fixture(const char *name, struct PpGame **out);

/**
 * Random game of type 1 or 2.
 *
 * # Safety
 * `out` must be writable.
 */
enum PpStatus pp_game_generate(uint32_t kind,
                               uintptr_t players,
                               uintptr_t depth,
                               uintptr_t actions,
                               uint64_t seed,
                               struct PpGame **out);

/**
 * # Safety
 * `game` must be null or a handle from this library, not yet freed.
 */
void pp_game_free(struct PpGame *game);

/**
 * # Safety
 * `game` must be a live handle and `out` writable.
 */
enum PpStatus pp_game_num_players(const struct PpGame *game, uintptr_t *out);

/**
 * Trace from a seeded random start. `method` is `lgpr` or `etpr`; `max_iterations`
 * of 0 keeps the default cap. A result handle is produced whenever the trace ran,
 * so non-convergence (status 2) and caps (status 4) can still be inspected.
 *
 * # Safety
 * `game` must be a live handle, `method` a NUL-terminated string, `out` writable.
 */
enum PpStatus pp_solve(const struct PpGame *game,
                       const char *method,
                       uint64_t seed,
                       uintptr_t max_iterations,
                       bool certify,
                       struct PpSolveResult **out);

/**
 * # Safety
 * `result` must be null or a handle from this library, not yet freed.
 */
void pp_result_free(struct PpSolveResult *result);

/**
 * # Safety
 * `result` must be a live handle; the out pointers writable (any may be null).
 */
enum PpStatus pp_result_summary(const struct PpSolveResult *result,
                                bool *converged,
                                uintptr_t *iterations,
                                double *final_t);

/**
 * Expected payoffs, one per player. `len` must be at least the player count;
 * the count is written to `written`.
 *
 * # Safety
 * `buf` must hold `len` doubles; `written` writable.
 */
enum PpStatus pp_result_payoffs(const struct PpSolveResult *result,
                                double *buf,
                                uintptr_t len,
                                uintptr_t *written);

/**
 * Realization plan of `player` (0-based), in sequence order including the root.
 *
 * # Safety
 * `buf` must hold `len` doubles; `written` writable.
 */
enum PpStatus pp_result_plan(const struct PpSolveResult *result,
                             uintptr_t player,
                             double *buf,
                             uintptr_t len,
                             uintptr_t *written);

/**
 * Full report as JSON; free with `pp_string_free`.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum PpStatus pp_result_to_json(const struct PpSolveResult *result, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void pp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROPERPATH_H */
