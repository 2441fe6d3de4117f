#ifndef DYNMATCH_H
#define DYNMATCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Zero is success.
typedef enum DmStatus {
  DM_STATUS_OK = 0,
  DM_STATUS_NULL_POINTER = 1,
  DM_STATUS_INVALID_EDGE = 2,
  DM_STATUS_INVALID_VERTEX = 3,
  DM_STATUS_CONFIG = 4,
  DM_STATUS_INVALID_ARGUMENT = 5,
  DM_STATUS_MALFORMED_INSTANCE = 6,
  DM_STATUS_PARSE = 7,
  DM_STATUS_INVARIANT = 8,
  DM_STATUS_IO = 9,
  DM_STATUS_BUFFER_TOO_SMALL = 10,
  DM_STATUS_PANIC = 11,
} DmStatus;

// Opaque engine handle.
typedef struct DmEngine DmEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an engine on `n` vertices. With `multiplicative` nonzero the
// engine keeps a `(1 - epsilon)` approximation; otherwise the guarantee is
// additive `epsilon * n`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum DmStatus dm_engine_new(size_t n,
                            double epsilon,
                            uint64_t seed,
                            int32_t multiplicative,
                            struct DmEngine **out);

// Releases a handle. Null is accepted.
//
// # Safety
// `h` must be null or a handle from [`dm_engine_new`] not yet freed.
void dm_engine_free(struct DmEngine *h);

// Inserts edge `{u, v}`.
//
// # Safety
// `h` must be a live handle.
enum DmStatus dm_engine_insert(struct DmEngine *h, size_t u, size_t v);

// Deletes edge `{u, v}`.
//
// # Safety
// `h` must be a live handle.
enum DmStatus dm_engine_delete(struct DmEngine *h, size_t u, size_t v);

// Writes the current matching size to `out`.
//
// # Safety
// `h` must be a live handle and `out` writable.
enum DmStatus dm_engine_matching_size(struct DmEngine *h, size_t *out);

// Copies the matching into `pairs` as `u0, v0, u1, v1, ...`. `cap` counts
// edges. The edge count is always written to `out_len`; if it exceeds `cap`
// nothing is copied and `BUFFER_TOO_SMALL` is returned.
//
// # Safety
// `h` must be a live handle, `out_len` writable and `pairs` valid for
// `2 * cap` elements (it may be null when `cap` is 0).
enum DmStatus dm_engine_matching(struct DmEngine *h, size_t *pairs, size_t cap, size_t *out_len);

// Work counters and rebuild count so far.
//
// # Safety
// `h` must be a live handle; each out pointer must be writable or null.
enum DmStatus dm_engine_stats(struct DmEngine *h,
                              uint64_t *matrix_probes,
                              uint64_t *list_reads,
                              uint64_t *rebuilds);

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *dm_last_error_message(void);

// Static name of a status code.
const char *dm_status_string(enum DmStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNMATCH_H */
