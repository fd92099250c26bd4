#ifndef SOFIC_LAB_H
#define SOFIC_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every call.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_INPUT = 2,
  SL_STATUS_DOMAIN = 3,
  SL_STATUS_SCALE = 4,
  SL_STATUS_UNSUPPORTED = 5,
  SL_STATUS_SOLVER = 6,
  SL_STATUS_IO = 7,
  SL_STATUS_PANIC = 8,
} SlStatus;

/**
 * Opaque homomorphism handle.
 */
typedef struct SlHom SlHom;

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sl_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sl_string_free(char *s);

/**
 * Samples a uniform homomorphism with `d` generators of order `k` on `n` points.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SlStatus sl_hom_sample_uniform(size_t d,
                                    size_t k,
                                    size_t n,
                                    uint64_t seed,
                                    uint64_t stream,
                                    struct SlHom **out);

/**
 * Samples a homomorphism for which the equitable coloring `chi` (length `n`,
 * entries 0 or 1) is proper.
 *
 * # Safety
 * `chi` must point to `n` readable bytes; `out` as in [`sl_hom_sample_uniform`].
 */
enum SlStatus sl_hom_sample_planted(size_t d,
                                    size_t k,
                                    size_t n,
                                    const uint8_t *chi,
                                    uint64_t seed,
                                    uint64_t stream,
                                    struct SlHom **out);

/**
 * Parses a JSON homomorphism record.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` as in [`sl_hom_sample_uniform`].
 */
enum SlStatus sl_hom_from_json(const char *json, struct SlHom **out);

/**
 * Serializes a handle to JSON; free the result with [`sl_string_free`].
 *
 * # Safety
 * `hom` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_hom_to_json(const struct SlHom *hom, char **out);

/**
 * # Safety
 * `hom` must be NULL or a handle from this library that has not been freed.
 */
void sl_hom_free(struct SlHom *hom);

/**
 * Writes `(d, k, n)` of a handle.
 *
 * # Safety
 * `hom` must be a live handle; each out pointer must be writable.
 */
enum SlStatus sl_hom_params(const struct SlHom *hom, size_t *d, size_t *k, size_t *n);

/**
 * Copies the permutation of generator `g` into `buf`, which holds `len >= n` entries.
 *
 * # Safety
 * `hom` must be a live handle and `buf` must point to `len` writable entries.
 */
enum SlStatus sl_hom_image(const struct SlHom *hom, size_t g, size_t *buf, size_t len);

/**
 * Whether `chi` (length `n`) properly 2-colors the hypergraph of `hom`.
 *
 * # Safety
 * `hom` must be a live handle, `chi` must hold `len` bytes, `out` writable.
 */
enum SlStatus sl_hom_is_proper(const struct SlHom *hom, const uint8_t *chi, size_t len, bool *out);

/**
 * Exact count of colorings with at most `(eps_num/eps_den) n` monochromatic
 * edges, as a decimal string freed with [`sl_string_free`].
 *
 * # Safety
 * `hom` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_count_proper(const struct SlHom *hom,
                              int64_t eps_num,
                              int64_t eps_den,
                              char **out);

/**
 * Size of the rigid set `C_l ∪ A_l \ A'_l` relative to `chi`.
 *
 * # Safety
 * `hom` must be a live handle, `chi` must hold `len` bytes, `out` writable.
 */
enum SlStatus sl_rigid_set_size(const struct SlHom *hom,
                                const uint8_t *chi,
                                size_t len,
                                size_t level,
                                size_t *out);

/**
 * First-moment exponent `f(d, k)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SlStatus sl_f_dk(uint64_t d, size_t k, double *out);

/**
 * Second-moment exponent `ψ₀(δ)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SlStatus sl_psi0(double delta, uint64_t d, size_t k, double *out);

#endif  /* SOFIC_LAB_H */
