/* SPDX-License-Identifier: Apache-2.0 */

#ifndef IFOG_H
#define IFOG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IfogStatus {
  IfogStatus_Ok = 0,
  IfogStatus_NullPointer = 1,
  IfogStatus_InvalidUtf8 = 2,
  IfogStatus_ParseError = 3,
  IfogStatus_InvalidModel = 4,
  IfogStatus_BadRequest = 5,
  IfogStatus_BudgetExhausted = 6,
  IfogStatus_UnknownSession = 7,
  IfogStatus_IllegalMove = 8,
  IfogStatus_Panic = 99,
} IfogStatus;

/**
 * A parsed formula.
 */
typedef struct IfogFormula IfogFormula;

/**
 * A validated Kripke model.
 */
typedef struct IfogModel IfogModel;

/**
 * A set of game sessions.
 */
typedef struct IfogSessions IfogSessions;

/**
 * Search budgets, passed by value.
 */
typedef struct IfogCaps {
  uintptr_t max_model;
  uintptr_t max_depth;
  uint64_t max_nodes;
} IfogCaps;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next ifog call on the same thread.
 */
const char *ifog_last_error(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ifog_string_free(char *s);

struct IfogCaps ifog_caps_default(void);

/**
 * # Safety
 * `src` is a NUL-terminated string; `out` is writable.
 */
enum IfogStatus ifog_formula_parse(const char *src, struct IfogFormula **out);

/**
 * Canonical text of the formula.
 *
 * # Safety
 * `f` is a live handle; `out` is writable.
 */
enum IfogStatus ifog_formula_to_string(const struct IfogFormula *f, char **out);

/**
 * 1 if closed, 0 if open or `f` is NULL.
 *
 * # Safety
 * `f` is NULL or a live handle.
 */
int32_t ifog_formula_is_closed(const struct IfogFormula *f);

/**
 * # Safety
 * `f` is NULL or a live handle, freed at most once.
 */
void ifog_formula_free(struct IfogFormula *f);

/**
 * Loads and validates a model from its JSON file form.
 *
 * # Safety
 * `src` is a NUL-terminated string; `out` is writable.
 */
enum IfogStatus ifog_model_from_json(const char *src, struct IfogModel **out);

/**
 * `|C| + |⋃A|`, or 0 for NULL.
 *
 * # Safety
 * `m` is NULL or a live handle.
 */
uintptr_t ifog_model_size(const struct IfogModel *m);

/**
 * Whether state `state` forces the closed formula `f`.
 *
 * # Safety
 * `m` and `f` are live handles; `out` is writable.
 */
enum IfogStatus ifog_model_forces(const struct IfogModel *m,
                                  uintptr_t state,
                                  const struct IfogFormula *f,
                                  bool *out);

/**
 * # Safety
 * `m` is NULL or a live handle, freed at most once.
 */
void ifog_model_free(struct IfogModel *m);

/**
 * Satisfiability over all models; writes the JSON response with witness.
 * Returns `BudgetExhausted` (with the response still written) when the
 * caps run out.
 *
 * # Safety
 * `f` is a live handle; `out` is writable.
 */
enum IfogStatus ifog_decide(const struct IfogFormula *f, struct IfogCaps caps, char **out);

/**
 * Provability; JSON as for `POST /prove`. `BudgetExhausted` when unknown.
 *
 * # Safety
 * `f` is a live handle; `out` is writable.
 */
enum IfogStatus ifog_prove(const struct IfogFormula *f, struct IfogCaps caps, char **out);

struct IfogSessions *ifog_sessions_new(void);

/**
 * Opens a game; writes the session view JSON.
 *
 * # Safety
 * `s` is a live handle; `formula` is a NUL-terminated string; `out` is
 * writable.
 */
enum IfogStatus ifog_session_create(const struct IfogSessions *s,
                                    const char *formula,
                                    struct IfogCaps caps,
                                    char **out);

/**
 * Plays a move given as `MoveRequest` JSON; writes the new view.
 *
 * # Safety
 * `s` is a live handle; `id` and `request` are NUL-terminated strings;
 * `out` is writable.
 */
enum IfogStatus ifog_session_move(const struct IfogSessions *s,
                                  const char *id,
                                  const char *request,
                                  char **out);

/**
 * Current session view JSON.
 *
 * # Safety
 * `s` is a live handle; `id` is a NUL-terminated string; `out` is writable.
 */
enum IfogStatus ifog_session_view(const struct IfogSessions *s, const char *id, char **out);

/**
 * # Safety
 * `s` is NULL or a live handle, freed at most once.
 */
void ifog_sessions_free(struct IfogSessions *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IFOG_H */
