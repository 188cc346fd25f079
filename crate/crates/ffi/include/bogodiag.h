#ifndef BOGODIAG_H
#define BOGODIAG_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BogoStatus {
  BOGO_STATUS_OK = 0,
  BOGO_STATUS_NULL_POINTER = 1,
  BOGO_STATUS_INVALID_INPUT = 2,
  BOGO_STATUS_NOT_DIAGONALIZABLE = 3,
  BOGO_STATUS_NOT_POSITIVE_DEFINITE = 4,
  BOGO_STATUS_INVARIANT_VIOLATED = 5,
  BOGO_STATUS_NUMERICAL_FAILURE = 6,
  BOGO_STATUS_BUFFER_TOO_SMALL = 7,
  BOGO_STATUS_PANIC = 8,
} BogoStatus;

typedef enum BogoMatrix {
  BOGO_MATRIX_U = 0,
  BOGO_MATRIX_V = 1,
  BOGO_MATRIX_XI = 2,
  BOGO_MATRIX_GAMMA = 3,
  BOGO_MATRIX_ALPHA = 4,
} BogoMatrix;

/**
 * Result of a symplectic diagonalization.
 */
typedef struct BogoDiagonalization BogoDiagonalization;

/**
 * Validated quadratic Hamiltonian.
 */
typedef struct BogoHamiltonian BogoHamiltonian;

typedef struct BogoCondition {
  double norm_g;
  double hs_g;
  double hs_kh_half;
  double lower_bound;
  bool diagonalizable;
  bool implementable;
  bool bounded_below;
} BogoCondition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *bogo_last_error(void);

const char *bogo_version(void);

/**
 * Build a Hamiltonian from row-major `n x n` blocks `h` and `k`.
 *
 * # Safety
 * `h_re` and `k_re` must point to `n * n` doubles, as must `h_im` and `k_im`
 * when non-null. `out` must be a valid pointer.
 */
enum BogoStatus bogo_hamiltonian_new(size_t n,
                                     const double *h_re,
                                     const double *h_im,
                                     const double *k_re,
                                     const double *k_im,
                                     struct BogoHamiltonian **out);

/**
 * Two-mode `(p, -p)` sector of the weakly interacting Bose gas.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BogoStatus bogo_hamiltonian_pair(double p,
                                      double rho,
                                      double vhat,
                                      struct BogoHamiltonian **out);

/**
 * # Safety
 * `h` must be null or a handle from `bogo_hamiltonian_new` not yet freed.
 */
void bogo_hamiltonian_free(struct BogoHamiltonian *h);

/**
 * Number of modes, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t bogo_hamiltonian_modes(const struct BogoHamiltonian *h);

/**
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum BogoStatus bogo_hamiltonian_classify(const struct BogoHamiltonian *h,
                                          struct BogoCondition *out);

/**
 * Lowest `count` eigenvalues of the normal-ordered operator on the Fock
 * space truncated at total number `cutoff`.
 *
 * # Safety
 * `h` must be a live handle and `out` must hold `count` doubles.
 */
enum BogoStatus bogo_fock_spectrum(const struct BogoHamiltonian *h,
                                   size_t cutoff,
                                   size_t count,
                                   double *out);

/**
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum BogoStatus bogo_diagonalize(const struct BogoHamiltonian *h, struct BogoDiagonalization **out);

/**
 * # Safety
 * `d` must be null or a handle from `bogo_diagonalize` not yet freed.
 */
void bogo_diagonalization_free(struct BogoDiagonalization *d);

/**
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum BogoStatus bogo_diagonalization_ground_energy(const struct BogoDiagonalization *d,
                                                   double *out);

/**
 * Quasiparticle energies in ascending order.
 *
 * # Safety
 * `d` must be a live handle and `out` must hold `len` doubles.
 */
enum BogoStatus bogo_diagonalization_xi_eigs(const struct BogoDiagonalization *d,
                                             double *out,
                                             size_t len);

/**
 * Copy an `n x n` result matrix in row-major order.
 *
 * # Safety
 * `d` must be a live handle, `re` must hold `len` doubles and `im` must be
 * null or hold `len` doubles.
 */
enum BogoStatus bogo_diagonalization_matrix(const struct BogoDiagonalization *d,
                                            enum BogoMatrix which,
                                            double *re,
                                            double *im,
                                            size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOGODIAG_H */
