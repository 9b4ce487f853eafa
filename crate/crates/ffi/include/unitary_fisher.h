#ifndef UNITARY_FISHER_H
#define UNITARY_FISHER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes returned by every function in this library.
typedef enum UfStatus {
  UF_STATUS_OK = 0,
  UF_STATUS_NULL_POINTER = 1,
  UF_STATUS_INVALID_ARGUMENT = 2,
  UF_STATUS_DIMENSION_MISMATCH = 3,
  UF_STATUS_DOMAIN = 4,
  UF_STATUS_INVALID_POVM = 5,
  UF_STATUS_SINGULAR_OUTCOME = 6,
  UF_STATUS_NOT_POSITIVE_DEFINITE = 7,
  UF_STATUS_NON_IDENTIFIABLE = 8,
  UF_STATUS_NOT_ACHIEVABLE = 9,
  UF_STATUS_NO_CONVERGENCE = 10,
  UF_STATUS_PARSE = 11,
  UF_STATUS_IO = 12,
  UF_STATUS_BUFFER_TOO_SMALL = 13,
  UF_STATUS_PANIC = 14,
} UfStatus;

// Opaque POVM handle.
typedef struct UfPovm UfPovm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *uf_version(void);

// Copy the calling thread's last error message into `buf`.
//
// Returns the number of bytes needed including the terminator, or 0 when no
// error is recorded. The copy is truncated when `len` is too small.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t uf_last_error_message(char *buf, size_t len);

// Two-qubit Bell-basis measurement.
//
// # Safety
// `out` must be valid for writes.
enum UfStatus uf_povm_bell(struct UfPovm **out);

// Bell measurement that resolves only Bell state `k` (1..=4).
//
// # Safety
// `out` must be valid for writes.
enum UfStatus uf_povm_reduced_bell(size_t k, struct UfPovm **out);

// Linear-optics Bell measurement resolving Bell states `k` and `l` (1..=4, distinct).
//
// # Safety
// `out` must be valid for writes.
enum UfStatus uf_povm_linear_optics_bell(size_t k, size_t l, struct UfPovm **out);

// Time-shared local spin measurement on two qubits.
//
// # Safety
// `out` must be valid for writes.
enum UfStatus uf_povm_local_spin(struct UfPovm **out);

// Random product-basis measurement on `d x d`, time-shared over `n_bases` bases.
//
// # Safety
// `out` must be valid for writes.
enum UfStatus uf_povm_random_product(size_t d, size_t n_bases, uint64_t seed, struct UfPovm **out);

// Read a POVM from a JSON file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for writes.
enum UfStatus uf_povm_load(const char *path, struct UfPovm **out);

// Write a POVM to a JSON file.
//
// # Safety
// `povm` must be a live handle and `path` a NUL-terminated string.
enum UfStatus uf_povm_save(const struct UfPovm *povm, const char *path);

// Release a handle. Null is ignored.
//
// # Safety
// `povm` must be null or a handle not yet freed.
void uf_povm_free(struct UfPovm *povm);

// Number of outcomes, or 0 for a null handle.
//
// # Safety
// `povm` must be null or a live handle.
size_t uf_povm_len(const struct UfPovm *povm);

// Hilbert-space dimension the POVM acts on, or 0 for a null handle.
//
// # Safety
// `povm` must be null or a live handle.
size_t uf_povm_dim(const struct UfPovm *povm);

// Quantum Fisher information of the singlet probe at polar angles, as a
// row-major 3x3 matrix.
//
// # Safety
// `out` must be valid for `out_len` doubles.
enum UfStatus uf_qfi_su2(double alpha, double theta, double phi, double *out, size_t out_len);

// Classical Fisher information of `povm` on the singlet probe, row-major 3x3.
//
// # Safety
// `povm` must be a live handle and `out` valid for `out_len` doubles.
enum UfStatus uf_fisher_su2(const struct UfPovm *povm,
                            double alpha,
                            double theta,
                            double phi,
                            double *out,
                            size_t out_len);

// Merit `tr H^{-1} I` of `povm` on the singlet probe.
//
// # Safety
// `povm` must be a live handle and `out` valid for one double.
enum UfStatus uf_merit_su2(const struct UfPovm *povm,
                           double alpha,
                           double theta,
                           double phi,
                           double *out);

// Quantum Fisher information of the maximally entangled `d x d` probe in
// exponential coordinates. `theta` holds `d*d - 1` values; `out` receives a
// row-major square matrix of that size.
//
// # Safety
// `theta` must be valid for `theta_len` doubles and `out` for `out_len`.
enum UfStatus uf_qfi_exp_maxent(size_t d,
                                const double *theta,
                                size_t theta_len,
                                double *out,
                                size_t out_len);

// Merit of `povm` on the maximally entangled `d x d` probe in exponential
// coordinates.
//
// # Safety
// `povm` must be a live handle, `theta` valid for `theta_len` doubles and
// `out` for one double.
enum UfStatus uf_merit_exp_maxent(const struct UfPovm *povm,
                                  size_t d,
                                  const double *theta,
                                  size_t theta_len,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNITARY_FISHER_H */
