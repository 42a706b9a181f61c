#ifndef COVGEN_H
#define COVGEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CovgenStatus {
  COVGEN_STATUS_OK = 0,
  COVGEN_STATUS_NULL_POINTER = 1,
  COVGEN_STATUS_INVALID_UTF8 = 2,
  COVGEN_STATUS_INVALID_ARGUMENT = 3,
  COVGEN_STATUS_PARSE = 4,
  COVGEN_STATUS_IO = 5,
  COVGEN_STATUS_RUNTIME = 6,
  COVGEN_STATUS_PANIC = 7,
} CovgenStatus;

/**
 * Trained SMILES generator.
 */
typedef struct CovgenGenerator CovgenGenerator;

/**
 * Parsed molecular graph.
 */
typedef struct CovgenMolecule CovgenMolecule;

/**
 * Scorer registry built from a preset.
 */
typedef struct CovgenRegistry CovgenRegistry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *covgen_last_error(void);

/**
 * Static engine version string.
 */
const char *covgen_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void covgen_string_free(char *s);

/**
 * # Safety
 * `smiles` must be a NUL-terminated string; `out` must be writable.
 */
enum CovgenStatus covgen_molecule_parse(const char *smiles, struct CovgenMolecule **out);

/**
 * # Safety
 * `m` must come from [`covgen_molecule_parse`] and not have been freed.
 */
void covgen_molecule_free(struct CovgenMolecule *m);

/**
 * Heavy-atom count.
 *
 * # Safety
 * `m` must be a live molecule handle; `out` must be writable.
 */
enum CovgenStatus covgen_molecule_atom_count(const struct CovgenMolecule *m, uintptr_t *out);

/**
 * Canonical SMILES; release with [`covgen_string_free`].
 *
 * # Safety
 * `m` must be a live molecule handle; `out` must be writable.
 */
enum CovgenStatus covgen_molecule_canonical(const struct CovgenMolecule *m, char **out);

/**
 * # Safety
 * `query` and `target` must be live molecule handles; `out` must be writable.
 */
enum CovgenStatus covgen_molecule_has_substructure(const struct CovgenMolecule *query,
                                                   const struct CovgenMolecule *target,
                                                   bool *out);

/**
 * Tanimoto similarity of the Morgan fingerprints of two molecules.
 *
 * # Safety
 * `a` and `b` must be live molecule handles; `out` must be writable.
 */
enum CovgenStatus covgen_tanimoto(const struct CovgenMolecule *a,
                                  const struct CovgenMolecule *b,
                                  double *out);

/**
 * Scorer registry for a preset name such as `egfr-3`.
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum CovgenStatus covgen_registry_new(const char *preset, struct CovgenRegistry **out);

/**
 * # Safety
 * `r` must come from [`covgen_registry_new`] and not have been freed.
 */
void covgen_registry_free(struct CovgenRegistry *r);

/**
 * Number of active scorers.
 *
 * # Safety
 * `r` must be a live registry handle; `out` must be writable.
 */
enum CovgenStatus covgen_registry_active_count(const struct CovgenRegistry *r, uintptr_t *out);

/**
 * Scores one SMILES. Invalid molecules succeed with reward 0, valid false.
 *
 * # Safety
 * `r` must be a live registry handle, `smiles` a NUL-terminated string and
 * every out-pointer writable.
 */
enum CovgenStatus covgen_registry_score(const struct CovgenRegistry *r,
                                        const char *smiles,
                                        double *reward,
                                        bool *valid,
                                        bool *desirable);

/**
 * Loads a generator checkpoint (the sidecar manifest must sit next to it).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CovgenStatus covgen_generator_load(const char *path, struct CovgenGenerator **out);

/**
 * # Safety
 * `g` must come from [`covgen_generator_load`] and not have been freed.
 */
void covgen_generator_free(struct CovgenGenerator *g);

/**
 * Samples `n` SMILES, returned newline-separated; release with
 * [`covgen_string_free`]. Identical arguments give identical output.
 *
 * # Safety
 * `g` must be a live generator handle; `out` must be writable.
 */
enum CovgenStatus covgen_generator_sample(const struct CovgenGenerator *g,
                                          uintptr_t n,
                                          double temperature,
                                          uint64_t seed,
                                          char **out);

/**
 * Pareto front index of each of `n` solutions with `m` objectives
 * (row-major `points`, all maximised); front 0 is non-dominated.
 *
 * # Safety
 * `points` must hold `n * m` doubles and `ranks` room for `n` values.
 */
enum CovgenStatus covgen_pareto_ranks(const double *points,
                                      uintptr_t n,
                                      uintptr_t m,
                                      uintptr_t *ranks);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVGEN_H */
