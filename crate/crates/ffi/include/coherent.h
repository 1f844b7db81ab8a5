#ifndef COHERENT_H
#define COHERENT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Classical gate selector for [`coherent_truth_table_csv`].
 */
typedef enum CoherentGateKind {
  COHERENT_GATE_KIND_OR = 0,
  COHERENT_GATE_KIND_AND = 1,
  COHERENT_GATE_KIND_XOR = 2,
  COHERENT_GATE_KIND_NOT = 3,
  COHERENT_GATE_KIND_CNOT = 4,
} CoherentGateKind;

/**
 * Result code of every fallible entry point.
 */
typedef enum CoherentStatus {
  COHERENT_STATUS_OK = 0,
  COHERENT_STATUS_NULL_POINTER = 1,
  COHERENT_STATUS_BUFFER_TOO_SMALL = 2,
  COHERENT_STATUS_INVALID_ARGUMENT = 3,
  COHERENT_STATUS_PARSE = 4,
  COHERENT_STATUS_DUPLICATE_LABEL = 5,
  COHERENT_STATUS_NON_FINITE_LABEL = 6,
  COHERENT_STATUS_NOT_A_SUBSET = 7,
  COHERENT_STATUS_TOO_LARGE = 8,
  COHERENT_STATUS_INADEQUATE_TRUNCATION = 9,
  COHERENT_STATUS_DIMENSION_MISMATCH = 10,
  COHERENT_STATUS_ILL_CONDITIONED = 11,
  COHERENT_STATUS_DEGENERATE_SPECTRUM = 12,
  COHERENT_STATUS_WRONG_SPACE_SIZE = 13,
  COHERENT_STATUS_NOT_IN_SPACE = 14,
  COHERENT_STATUS_NOT_TRACE_CLASS = 15,
  COHERENT_STATUS_NOT_A_DENSITY_MATRIX = 16,
  COHERENT_STATUS_GRID_TOO_SMALL = 17,
  COHERENT_STATUS_PANIC = 99,
} CoherentStatus;

/**
 * Opaque quantum controlled gate on two coherent spaces.
 */
typedef struct CoherentGate CoherentGate;

/**
 * Opaque residue-calculus operator kernel.
 */
typedef struct CoherentKernel CoherentKernel;

/**
 * Opaque coherent space.
 */
typedef struct CoherentSpace CoherentSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *coherent_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *coherent_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void coherent_string_free(char *s);

/**
 * Builds a coherent space from `n` labels given as `2n` doubles.
 *
 * # Safety
 * `labels_re_im` must point to `2n` doubles; `out` must be writable.
 */
enum CoherentStatus coherent_space_new(const double *labels_re_im,
                                       size_t n,
                                       struct CoherentSpace **out);

/**
 * # Safety
 * `space` must come from [`coherent_space_new`] or be NULL.
 */
void coherent_space_free(struct CoherentSpace *space);

/**
 * Number of labels, or 0 for NULL.
 *
 * # Safety
 * `space` must be a live handle or NULL.
 */
size_t coherent_space_dim(const struct CoherentSpace *space);

/**
 * Gram metric g as an n x n row-major complex matrix (`2n^2` doubles).
 *
 * # Safety
 * `out` must hold `cap` doubles.
 */
enum CoherentStatus coherent_space_gram(const struct CoherentSpace *space, double *out, size_t cap);

/**
 * Inverse metric G, same layout as [`coherent_space_gram`].
 *
 * # Safety
 * `out` must hold `cap` doubles.
 */
enum CoherentStatus coherent_space_inverse_gram(const struct CoherentSpace *space,
                                                double *out,
                                                size_t cap);

/**
 * Eigenvalues of g in descending order into `n` doubles.
 *
 * # Safety
 * `out` must hold `cap` doubles.
 */
enum CoherentStatus coherent_space_eigenvalues(const struct CoherentSpace *space,
                                               double *out,
                                               size_t cap);

/**
 * Trace of the truncated-Fock projector onto the space.
 *
 * # Safety
 * `out_trace` must be writable.
 */
enum CoherentStatus coherent_space_projector_trace(const struct CoherentSpace *space,
                                                   size_t n_max,
                                                   double *out_trace);

/**
 * Generalized Q-function `Tr[P(S) rho]` for a `d x d` row-major density
 * matrix embedded in the Fock space truncated at `n_max`.
 *
 * # Safety
 * `rho_re_im` must hold `2 d^2` doubles; `out_q` must be writable.
 */
enum CoherentStatus coherent_q_function(const struct CoherentSpace *space,
                                        const double *rho_re_im,
                                        size_t d,
                                        size_t n_max,
                                        double *out_q);

/**
 * Metric-aware controlled gate with control space `a` and target space `b`
 * of equal size (CNOT for two points).
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum CoherentStatus coherent_gate_controlled(const struct CoherentSpace *a,
                                             const struct CoherentSpace *b,
                                             struct CoherentGate **out);

/**
 * # Safety
 * `gate` must come from this library or be NULL.
 */
void coherent_gate_free(struct CoherentGate *gate);

/**
 * Applies the gate to a coordinate vector of length `|A| |B|` (control index
 * major); `out` receives the same number of complex entries.
 *
 * # Safety
 * `v_re_im` holds `2 len` doubles; `out` holds `cap` doubles.
 */
enum CoherentStatus coherent_gate_apply(const struct CoherentGate *gate,
                                        const double *v_re_im,
                                        size_t len,
                                        double *out,
                                        size_t cap);

/**
 * Metric unitarity residual `max |U (G x G) U^+ - g x g|`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CoherentStatus coherent_gate_unitarity_residual(const struct CoherentGate *gate, double *out);

/**
 * Kernel of the projector onto `space`.
 *
 * # Safety
 * `space` must be live; `out` writable.
 */
enum CoherentStatus coherent_kernel_projector(const struct CoherentSpace *space,
                                              struct CoherentKernel **out);

/**
 * Operator product `k1 k2` by residues.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum CoherentStatus coherent_kernel_product(const struct CoherentKernel *k1,
                                            const struct CoherentKernel *k2,
                                            struct CoherentKernel **out);

/**
 * Trace by residues; fails with `NotTraceClass` for kernels containing the
 * identity.
 *
 * # Safety
 * `k` must be live; `out_re`, `out_im` writable.
 */
enum CoherentStatus coherent_kernel_trace(const struct CoherentKernel *k,
                                          double *out_re,
                                          double *out_im);

/**
 * Kernel as a JSON string; release it with [`coherent_string_free`].
 *
 * # Safety
 * `k` must be live; `out` writable.
 */
enum CoherentStatus coherent_kernel_to_json(const struct CoherentKernel *k, char **out);

/**
 * # Safety
 * `k` must come from this library or be NULL.
 */
void coherent_kernel_free(struct CoherentKernel *k);

/**
 * Classical CNOT on ideal codes over the base set `R`:
 * `(c1, c2) -> (c1, code(S1 + S2))`.
 *
 * # Safety
 * `base_re_im` holds `2 n` doubles; outputs writable.
 */
enum CoherentStatus coherent_cnot_classical(const double *base_re_im,
                                            size_t n,
                                            uint64_t c1,
                                            uint64_t c2,
                                            uint64_t *out_c1,
                                            uint64_t *out_c2);

/**
 * Truth table as CSV text; release it with [`coherent_string_free`].
 *
 * # Safety
 * `base_re_im` holds `2 n` doubles; `out` writable.
 */
enum CoherentStatus coherent_truth_table_csv(enum CoherentGateKind kind,
                                             const double *base_re_im,
                                             size_t n,
                                             bool first_varying,
                                             char **out);

/**
 * Parses labels from a JSON string `[[re, im], ...]` into a new space.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
enum CoherentStatus coherent_space_from_json(const char *json, struct CoherentSpace **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COHERENT_H */
