#ifndef DOFINETTI_H
#define DOFINETTI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum DfStatus {
  DF_STATUS_OK = 0,
  DF_STATUS_NULL_POINTER = 1,
  DF_STATUS_INVALID_ARGUMENT = 2,
  DF_STATUS_UNKNOWN_AXIS = 3,
  DF_STATUS_ZERO_MASS = 4,
  DF_STATUS_INCONSISTENT_QUERY = 5,
  DF_STATUS_CYCLIC = 6,
  DF_STATUS_INSUFFICIENT_DATA = 7,
  DF_STATUS_IO = 8,
  DF_STATUS_PANIC = 9,
} DfStatus;

/*
 Opaque grouped dataset.
 */
typedef struct DfDataset DfDataset;

/*
 Opaque joint probability table.
 */
typedef struct DfTable DfTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *df_last_error_message(void);

/*
 Samples a bivariate dataset; variable 0 is X and variable 1 is Y.
 */
enum DfStatus df_dataset_simulate(int32_t graph,
                                  double alpha,
                                  double beta,
                                  uintptr_t num_envs,
                                  uintptr_t num_positions,
                                  uint64_t seed,
                                  struct DfDataset **out);

/*
 Builds a dataset from values laid out environment-major, then position,
 then variable.
 */
enum DfStatus df_dataset_new(uintptr_t num_envs,
                             uintptr_t num_positions,
                             const uintptr_t *cardinalities,
                             uintptr_t num_vars,
                             const uint32_t *values,
                             uintptr_t num_values,
                             struct DfDataset **out);

void df_dataset_free(struct DfDataset *ds);

/*
 Writes the environment, position and variable counts.
 */
enum DfStatus df_dataset_shape(const struct DfDataset *ds,
                               uintptr_t *num_envs,
                               uintptr_t *num_positions,
                               uintptr_t *num_vars);

/*
 Value of `var` at `pos` in environment `env`.
 */
enum DfStatus df_dataset_get(const struct DfDataset *ds,
                             uintptr_t env,
                             uintptr_t pos,
                             uintptr_t var,
                             uintptr_t *out);

/*
 Bivariate graph discovered from positions 0 and 1.
 */
enum DfStatus df_discover_bivariate(const struct DfDataset *ds,
                                    double significance,
                                    int32_t *out_graph);

/*
 Empirical joint table of one environment block.
 */
enum DfStatus df_fit_joint(const struct DfDataset *ds, struct DfTable **out);

void df_table_free(struct DfTable *t);

/*
 Number of axes and of cells.
 */
enum DfStatus df_table_shape(const struct DfTable *t, uintptr_t *num_axes, uintptr_t *num_cells);

/*
 Variable, position and cardinality of axis `index`; axis 0 varies slowest.
 */
enum DfStatus df_table_axis(const struct DfTable *t,
                            uintptr_t index,
                            uintptr_t *var,
                            uintptr_t *pos,
                            uintptr_t *card);

/*
 Copies the cell probabilities in row-major order; `len` must equal the cell count.
 */
enum DfStatus df_table_probs(const struct DfTable *t, double *buf, uintptr_t len);

/*
 Post-interventional block table from the exchangeable truncated
 factorization. The DAG has `num_vars` nodes and edges
 `edge_from[k] -> edge_to[k]`; the intervention forces
 `(vars[k], positions[k])` to `values[k]`.
 */
enum DfStatus df_truncated_factorization(const struct DfTable *t,
                                         uintptr_t num_vars,
                                         const uintptr_t *edge_from,
                                         const uintptr_t *edge_to,
                                         uintptr_t num_edges,
                                         const uintptr_t *vars,
                                         const uintptr_t *positions,
                                         const uintptr_t *values,
                                         uintptr_t num_interventions,
                                         struct DfTable **out);

/*
 Exact post-interventional bivariate block table under a Beta prior.
 */
enum DfStatus df_analytic_post_interventional(int32_t graph,
                                              double alpha,
                                              double beta,
                                              uintptr_t num_positions,
                                              const uintptr_t *vars,
                                              const uintptr_t *positions,
                                              const uintptr_t *values,
                                              uintptr_t num_interventions,
                                              struct DfTable **out);

/*
 Sum of squared cell differences after aligning axes.
 */
enum DfStatus df_table_squared_error(const struct DfTable *a, const struct DfTable *b, double *out);

/*
 Log-probability of a binary `(x, y)` sequence under the causal Pólya urn.
 */
enum DfStatus df_urn_log_prob(const uint8_t *xs,
                              const uint8_t *ys,
                              uintptr_t len,
                              double alpha,
                              double beta,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOFINETTI_H */
