#ifndef RPBIS_H
#define RPBIS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Modal logic fragments accepted by [`rpbis_distinguish`].
 */
typedef enum RpbisLogic {
  RPBIS_LOGIC_NEG_AND = 0,
  RPBIS_LOGIC_NEG_OR = 1,
  RPBIS_LOGIC_AND = 2,
  RPBIS_LOGIC_OR = 3,
} RpbisLogic;

/**
 * Result codes of the C interface.
 */
typedef enum RpbisStatus {
  RPBIS_STATUS_OK = 0,
  RPBIS_STATUS_NULL_ARGUMENT = 1,
  RPBIS_STATUS_INVALID_UTF8 = 2,
  RPBIS_STATUS_PARSE_ERROR = 3,
  RPBIS_STATUS_INVALID_SYSTEM = 4,
  RPBIS_STATUS_UNKNOWN_STATE = 5,
  RPBIS_STATUS_INTERNAL_ERROR = 6,
} RpbisStatus;

/**
 * Opaque parsed system.
 */
typedef struct RpbisSystem RpbisSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a system from its text form. On success `*out` holds a new handle.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RpbisStatus rpbis_system_parse(const char *source, struct RpbisSystem **out);

/**
 * Releases a system handle. Null is ignored.
 *
 * # Safety
 * `sys` must come from [`rpbis_system_parse`] and not be used afterwards.
 */
void rpbis_system_free(struct RpbisSystem *sys);

/**
 * Number of states, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t rpbis_system_num_states(const struct RpbisSystem *sys);

/**
 * Decides whether two named states are bisimilar.
 *
 * # Safety
 * Pointers must be valid; names NUL-terminated.
 */
enum RpbisStatus rpbis_bisimilar(const struct RpbisSystem *sys,
                                 const char *s1,
                                 const char *s2,
                                 bool *out);

/**
 * Synthesizes a formula of `logic` that holds in exactly one of the states.
 * For bisimilar states `*formula` is set to null. Otherwise it receives the
 * formula text and `*holds_in` is 1 or 2 for the satisfying state.
 *
 * # Safety
 * Pointers must be valid; names NUL-terminated.
 */
enum RpbisStatus rpbis_distinguish(const struct RpbisSystem *sys,
                                   const char *s1,
                                   const char *s2,
                                   enum RpbisLogic logic,
                                   char **formula,
                                   int32_t *holds_in);

/**
 * Checks whether a state satisfies a formula given in text form.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum RpbisStatus rpbis_check(const struct RpbisSystem *sys,
                             const char *state_name,
                             const char *formula,
                             bool *out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rpbis_string_free(char *s);

/**
 * Message for the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next call into the library on this thread.
 */
const char *rpbis_last_error(void);

/**
 * Library version as a static string.
 */
const char *rpbis_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RPBIS_H */
