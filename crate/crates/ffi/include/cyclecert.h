#ifndef CYCLECERT_H
#define CYCLECERT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_UTF8 = 2,
  CC_STATUS_IO = 3,
  CC_STATUS_PARSE = 4,
  CC_STATUS_INVALID_NETWORK = 5,
  CC_STATUS_NUMERIC = 6,
  CC_STATUS_BUFFER_SIZE = 7,
  CC_STATUS_PANIC = 8,
} CcStatus;

typedef enum CcVerdict {
  CC_VERDICT_CERTIFIED = 0,
  CC_VERDICT_INCONCLUSIVE = 1,
} CcVerdict;

/**
 * Opaque certification result.
 */
typedef struct CcCertificate CcCertificate;

/**
 * Opaque validated lossless network.
 */
typedef struct CcNetwork CcNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *cc_last_error(void);

/**
 * Loads a MATPOWER or JSON case with flat voltages and balanced injections.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CcStatus cc_network_from_file(const char *path, struct CcNetwork **out);

/**
 * Same as [`cc_network_from_file`] for in-memory case text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CcStatus cc_network_from_str(const char *text, struct CcNetwork **out);

/**
 * Bus count, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t cc_network_bus_count(const struct CcNetwork *net);

/**
 * Branch count after merging parallel branches, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t cc_network_branch_count(const struct CcNetwork *net);

/**
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void cc_network_free(struct CcNetwork *net);

/**
 * Certifies the network at its own injections with default options.
 *
 * # Safety
 * `net` must be a live handle and `out` a writable pointer.
 */
enum CcStatus cc_certify(const struct CcNetwork *net,
                         bool recover_solution,
                         struct CcCertificate **out);

/**
 * # Safety
 * `cert` must be a live handle and `out` a writable pointer.
 */
enum CcStatus cc_certificate_verdict(const struct CcCertificate *cert, enum CcVerdict *out);

/**
 * Copies the recovered angles (radians, one per bus) into `theta`.
 * Fails with `BufferSize` when `len` differs from the bus count and with
 * `Numeric` when no angles were recovered.
 *
 * # Safety
 * `cert` must be a live handle and `theta` must hold `len` doubles.
 */
enum CcStatus cc_certificate_theta(const struct CcCertificate *cert, double *theta, size_t len);

/**
 * Certificate as JSON; release with [`cc_string_free`]. Null on failure.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
char *cc_certificate_to_json(const struct CcCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a handle not yet freed.
 */
void cc_certificate_free(struct CcCertificate *cert);

/**
 * Certified and Newton-Raphson load margins under uniform scaling.
 * Non-positive `y_max` or `tol` select the defaults (20 and 1e-3).
 *
 * # Safety
 * `net` must be a live handle; `y_cert` and `y_nr` writable pointers.
 */
enum CcStatus cc_sweep(const struct CcNetwork *net,
                       double y_max,
                       double tol,
                       double *y_cert,
                       double *y_nr);

/**
 * Newton-Raphson from the angles in `theta` (length = bus count); the
 * final iterate is written back. `converged` reports convergence with every
 * branch angle within pi/2.
 *
 * # Safety
 * `net` must be a live handle, `theta` must hold `len` doubles and
 * `converged` must be writable.
 */
enum CcStatus cc_nr_solve(const struct CcNetwork *net, double *theta, size_t len, bool *converged);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void cc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYCLECERT_H */
