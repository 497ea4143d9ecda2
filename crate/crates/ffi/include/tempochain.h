#ifndef TEMPOCHAIN_H
#define TEMPOCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_INVALID_ARGUMENT = 1,
  TC_STATUS_BAD_RECORD = 2,
  TC_STATUS_TEMPORAL_ACCESS = 3,
  TC_STATUS_UNKNOWN_PHOTON = 4,
  TC_STATUS_EMPTY_CHAIN = 5,
  TC_STATUS_CONFIG_ERROR = 6,
  TC_STATUS_IO_ERROR = 7,
  TC_STATUS_BUFFER_TOO_SMALL = 8,
  TC_STATUS_RUNTIME_ERROR = 9,
  TC_STATUS_PANIC = 10,
} TcStatus;

/**
 * A quantum chain plus the random source its measurements draw from.
 */
typedef struct TcChain TcChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an empty chain whose measurements are seeded by `seed`.
 *
 * # Safety
 * `out_chain` must be a valid pointer.
 */
enum TcStatus tc_chain_new(uint64_t seed, struct TcChain **out_chain);

/**
 * Releases a chain. Null is ignored.
 *
 * # Safety
 * `chain` must come from [`tc_chain_new`] and not be used afterwards.
 */
void tc_chain_free(struct TcChain *chain);

/**
 * Appends records given as a string of `0`/`1` whose length is a multiple of
 * two. Chains are capped at 10 blocks; longer requests are rejected whole.
 *
 * # Safety
 * `chain` must be a live handle and `records` a NUL-terminated string.
 */
enum TcStatus tc_chain_extend(struct TcChain *chain, const char *records);

/**
 * # Safety
 * `chain` must be a live handle and `out_count` a valid pointer.
 */
enum TcStatus tc_chain_block_count(const struct TcChain *chain, size_t *out_count);

/**
 * Id of the one photon still live, i.e. the last late photon.
 *
 * # Safety
 * `chain` must be a live handle and `out_photon` a valid pointer.
 */
enum TcStatus tc_chain_live_photon(const struct TcChain *chain, uint64_t *out_photon);

/**
 * Measures a copy of the chain in the GHZ basis and writes the decoded bits.
 *
 * On `TC_STATUS_BUFFER_TOO_SMALL` nothing is written except `required`.
 *
 * # Safety
 * `chain` must be a live handle; `buf` must hold `len` bytes; `required` may be null.
 */
enum TcStatus tc_chain_decode(struct TcChain *chain, char *buf, size_t len, size_t *required);

/**
 * One sampled validation of the chain against `expected`.
 *
 * # Safety
 * `chain` must be a live handle, `expected` NUL-terminated, `out_passed` valid.
 */
enum TcStatus tc_chain_validate(struct TcChain *chain, const char *expected, bool *out_passed);

/**
 * Exact probability that validation against `expected` passes.
 *
 * # Safety
 * `chain` must be a live handle, `expected` NUL-terminated, `out_probability` valid.
 */
enum TcStatus tc_chain_validation_probability(const struct TcChain *chain,
                                              const char *expected,
                                              double *out_probability);

/**
 * Attacks one photon. `kind` is `bit_flip`, `phase_flip`, `random_unitary`
 * or `z_measure`; `seed` drives any randomness the attack needs.
 * Absorbed photons give `TC_STATUS_TEMPORAL_ACCESS` and leave the chain as it was.
 *
 * # Safety
 * `chain` must be a live handle and `kind` NUL-terminated.
 */
enum TcStatus tc_chain_tamper(struct TcChain *chain,
                              const char *kind,
                              uint64_t photon,
                              uint64_t seed);

/**
 * Runs a scenario described by TOML text and writes its report to `out_path`.
 * `assertions_passed` receives the scenario's own verdict.
 *
 * # Safety
 * `config_toml` and `out_path` must be NUL-terminated; `assertions_passed` may be null.
 */
enum TcStatus tc_run_scenario(const char *config_toml,
                              const char *out_path,
                              bool *assertions_passed);

/**
 * Copies the calling thread's last error message (empty after success)
 * into `buf`, truncating to fit. Returns the full message length.
 *
 * # Safety
 * `buf` must hold `len` bytes, or be null with `len` 0.
 */
size_t tc_last_error(char *buf, size_t len);

/**
 * Static name of a status code.
 */
const char *tc_status_name(enum TcStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEMPOCHAIN_H */
