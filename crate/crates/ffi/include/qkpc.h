#ifndef QKPC_H
#define QKPC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QkpcStatus {
  QKPC_STATUS_OK = 0,
  QKPC_STATUS_NULL_POINTER = 1,
  QKPC_STATUS_DOMAIN = 2,
  QKPC_STATUS_USAGE = 3,
  QKPC_STATUS_NUMERICAL = 4,
  QKPC_STATUS_CONSISTENCY = 5,
  QKPC_STATUS_IO = 6,
  QKPC_STATUS_PANIC = 7,
} QkpcStatus;

typedef enum QkpcTieRule {
  QKPC_TIE_RULE_ALWAYS_ZERO = 0,
  QKPC_TIE_RULE_ALWAYS_ONE = 1,
  QKPC_TIE_RULE_RANDOM = 2,
} QkpcTieRule;

typedef enum QkpcScheme {
  QKPC_SCHEME_OOK_THRESHOLD1 = 0,
  QKPC_SCHEME_OOK_PNR = 1,
  QKPC_SCHEME_PM = 2,
  QKPC_SCHEME_PM_CONSTRAINED = 3,
  QKPC_SCHEME_USD = 4,
} QkpcScheme;

typedef enum QkpcReceiver {
  QKPC_RECEIVER_THRESHOLD = 0,
  QKPC_RECEIVER_MAJORITY = 1,
} QkpcReceiver;

/**
 * Opaque link: efficiency, noise and interception fraction.
 */
typedef struct QkpcLink QkpcLink;

/**
 * `eps_xy = P(Bob outputs y | x sent)`.
 */
typedef struct QkpcChannel {
  double eps00;
  double eps01;
  double eps10;
  double eps11;
} QkpcChannel;

/**
 * Optimum found by [`qkpc_optimize`]. `threshold_k` is 0 for the majority
 * receiver; `theta` and `kappa` are 0 for the threshold receiver.
 */
typedef struct QkpcCapacity {
  double c_p;
  double i_bob;
  double i_eve;
  enum QkpcReceiver receiver;
  double mean_photons;
  uint32_t threshold_k;
  double theta;
  double kappa;
  double q0;
} QkpcCapacity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a link. `eta` and `gamma` lie in (0, 1]; `delta` is the mean noise
 * clicks per pulse per detector. Free with [`qkpc_link_free`].
 */
enum QkpcStatus qkpc_link_new(double eta, double delta, double gamma, struct QkpcLink **out);

/**
 * Releases a link. Null is ignored.
 */
void qkpc_link_free(struct QkpcLink *link);

/**
 * Whether Eve's exponent includes Bob's efficiency `eta` (the default).
 */
enum QkpcStatus qkpc_link_set_eve_receiver_efficiency(struct QkpcLink *link, bool included);

enum QkpcStatus qkpc_ook_channel(const struct QkpcLink *link,
                                 double mean_photons,
                                 uint32_t threshold_k,
                                 double q0,
                                 struct QkpcChannel *out);

enum QkpcStatus qkpc_pm_channel(const struct QkpcLink *link,
                                double mean_photons,
                                double theta,
                                double kappa,
                                double q0,
                                enum QkpcTieRule tie,
                                struct QkpcChannel *out);

/**
 * Eve's minimum error probability against on-off keying.
 */
enum QkpcStatus qkpc_eve_error_ook(const struct QkpcLink *link, double mean_photons, double *out);

/**
 * Eve's minimum error probability against the polarization encoding.
 */
enum QkpcStatus qkpc_eve_error_pm(const struct QkpcLink *link,
                                  double mean_photons,
                                  double theta,
                                  double kappa,
                                  double *out);

/**
 * Maximizes the private capacity of `scheme` on `link` with default bounds.
 */
enum QkpcStatus qkpc_optimize(const struct QkpcLink *link,
                              enum QkpcScheme scheme,
                              struct QkpcCapacity *out);

/**
 * Background photons per gate for the sky-conditions scene at `brightness`
 * (W m⁻² sr⁻¹ µm⁻¹).
 */
enum QkpcStatus qkpc_standard_photons_per_pulse(double brightness, double *out);

/**
 * Mean photons lost by a detector split into `n` intervals.
 */
enum QkpcStatus qkpc_expected_lost_photons(double mean_photons, uint32_t n, double *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or
 * 0 when the last call succeeded.
 */
size_t qkpc_last_error_message(char *buf, size_t len);

/**
 * Library version, a static NUL-terminated string.
 */
const char *qkpc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QKPC_H */
