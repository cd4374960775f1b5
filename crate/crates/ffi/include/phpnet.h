/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef PHPNET_H
#define PHPNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PhpnetApproach {
  PHPNET_APPROACH_BASELINE_PPP = 0,
  PHPNET_APPROACH_EQUIVALENT_DENSITY = 1,
  PHPNET_APPROACH_SERVING_HOLE = 2,
  PHPNET_APPROACH_NEAREST_HOLES = 3,
  PHPNET_APPROACH_ALL_HOLES = 4,
} PhpnetApproach;

typedef enum PhpnetLinkState {
  PHPNET_LINK_STATE_LOS = 0,
  PHPNET_LINK_STATE_NLOS = 1,
} PhpnetLinkState;

typedef enum PhpnetStatus {
  PHPNET_STATUS_OK = 0,
  PHPNET_STATUS_NULL_POINTER = 1,
  PHPNET_STATUS_INVALID_ARGUMENT = 2,
  PHPNET_STATUS_CONFIG = 3,
  PHPNET_STATUS_NUMERICAL = 4,
  PHPNET_STATUS_IO = 5,
  PHPNET_STATUS_PANIC = 6,
} PhpnetStatus;

typedef enum PhpnetTier {
  PHPNET_TIER_MACRO = 0,
  PHPNET_TIER_SMALL = 1,
} PhpnetTier;

// Opaque network configuration.
typedef struct PhpnetConfig PhpnetConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the next call.
const char *phpnet_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *phpnet_version(void);

// Loads a built-in preset ("setup1" or "setup2") into a new handle.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum PhpnetStatus phpnet_config_from_preset(const char *name, struct PhpnetConfig **out);

// Parses a TOML configuration into a new handle.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum PhpnetStatus phpnet_config_from_toml(const char *toml, struct PhpnetConfig **out);

// Copies a handle.
//
// # Safety
// `cfg` must come from this library and `out` must be a valid pointer.
enum PhpnetStatus phpnet_config_clone(const struct PhpnetConfig *cfg, struct PhpnetConfig **out);

// Releases a handle; NULL is ignored.
//
// # Safety
// `cfg` must come from this library and not be used afterwards.
void phpnet_config_free(struct PhpnetConfig *cfg);

// Sets the SINR threshold of both tiers, in dB.
//
// # Safety
// `cfg` must come from this library.
enum PhpnetStatus phpnet_config_set_threshold_db(struct PhpnetConfig *cfg, double tau_db);

// Sets the hole radius (m) and central angle (rad).
//
// # Safety
// `cfg` must come from this library.
enum PhpnetStatus phpnet_config_set_holes(struct PhpnetConfig *cfg,
                                          double radius,
                                          double central_angle);

// Writes the NUL-terminated parameter fingerprint into `buf` of `len` bytes (17 suffice).
//
// # Safety
// `cfg` must come from this library and `buf` must hold `len` bytes.
enum PhpnetStatus phpnet_config_fingerprint(const struct PhpnetConfig *cfg, char *buf, size_t len);

// Density of the PPP with the same mean SBS count as the hole process, per m².
//
// # Safety
// `cfg` must come from this library and `out` must be a valid pointer.
enum PhpnetStatus phpnet_equivalent_density(const struct PhpnetConfig *cfg, double *out);

// Probability that the UE is served by a BS of `tier` in `state`.
//
// # Safety
// `cfg` must come from this library and `out` must be a valid pointer.
enum PhpnetStatus phpnet_association_probability(const struct PhpnetConfig *cfg,
                                                 enum PhpnetTier tier,
                                                 enum PhpnetLinkState state,
                                                 double *out);

// Analytical coverage at each of `len` thresholds in dB; `rel_tol` ≤ 0 selects the default.
//
// # Safety
// `cfg` must come from this library; `tau_db` and `out` must hold `len` values.
enum PhpnetStatus phpnet_coverage(const struct PhpnetConfig *cfg,
                                  enum PhpnetApproach approach,
                                  const double *tau_db,
                                  size_t len,
                                  double rel_tol,
                                  double *out);

// Monte Carlo coverage at each of `len` thresholds in dB, with standard errors.
//
// # Safety
// `cfg` must come from this library; `tau_db`, `out` and `stderr_out` must hold `len` values
// (`stderr_out` may be NULL).
enum PhpnetStatus phpnet_simulate_coverage(const struct PhpnetConfig *cfg,
                                           const double *tau_db,
                                           size_t len,
                                           uint64_t trials,
                                           uint64_t seed,
                                           double *out,
                                           double *stderr_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHPNET_H */
