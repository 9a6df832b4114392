#ifndef CONTRASTIVE_EDITS_H
#define CONTRASTIVE_EDITS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every call.
 */
typedef enum CeStatus {
  CE_STATUS_OK = 0,
  CE_STATUS_NULL_ARGUMENT = 1,
  CE_STATUS_INVALID_UTF8 = 2,
  CE_STATUS_INVALID_ARGUMENT = 3,
  CE_STATUS_IO = 4,
  CE_STATUS_PARSE = 5,
  CE_STATUS_NOT_FOUND = 6,
  CE_STATUS_UNDEFINED = 7,
  CE_STATUS_PANIC = 8,
} CeStatus;

/**
 * Part of speech selector.
 */
typedef enum CePos {
  CE_POS_ADJ = 0,
  CE_POS_NOUN = 1,
  CE_POS_VERB = 2,
  CE_POS_ADP = 3,
} CePos;

/**
 * Opaque editor handle: a lexicon, a color table and a dataset, with
 * substitution maps built on first use and cached per code.
 */
typedef struct CeEditor CeEditor;

/**
 * Opaque lexicon handle.
 */
typedef struct CeLexicon CeLexicon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call on the same thread.
 */
const char *ce_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ce_string_free(char *s);

/**
 * Loads a WordNet database directory or a JSON-lines lexicon.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable pointer.
 */
enum CeStatus ce_lexicon_load(const char *path, struct CeLexicon **out);

/**
 * # Safety
 * `lex` must come from [`ce_lexicon_load`] and not have been freed.
 */
void ce_lexicon_free(struct CeLexicon *lex);

/**
 * Path similarity of two lemmas. `CE_STATUS_NOT_FOUND` when either lemma
 * is unknown or the two are not connected.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum CeStatus ce_path_similarity(const struct CeLexicon *lex,
                                 const char *a,
                                 const char *b,
                                 enum CePos pos,
                                 double *out);

/**
 * First hypernym lemma of the first sense; free the result with [`ce_string_free`].
 *
 * # Safety
 * Pointers must be valid; `word` NUL-terminated.
 */
enum CeStatus ce_hypernym_of(const struct CeLexicon *lex,
                             const char *word,
                             enum CePos pos,
                             char **out);

/**
 * First hyponym lemma of the first sense; free the result with [`ce_string_free`].
 *
 * # Safety
 * Pointers must be valid; `word` NUL-terminated.
 */
enum CeStatus ce_hyponym_of(const struct CeLexicon *lex,
                            const char *word,
                            enum CePos pos,
                            char **out);

/**
 * First antonym; free the result with [`ce_string_free`].
 *
 * # Safety
 * Pointers must be valid; `word` NUL-terminated.
 */
enum CeStatus ce_antonym_of(const struct CeLexicon *lex,
                            const char *word,
                            enum CePos pos,
                            char **out);

/**
 * Minimum-weight maximum-cover matching over a row-major
 * `n_sources x n_targets` weight matrix, NaN marking a missing edge.
 * `assignment` receives `n_sources` entries: the matched target or -1.
 *
 * # Safety
 * `weights` must hold `n_sources * n_targets` values and `assignment`
 * room for `n_sources`.
 */
enum CeStatus ce_matching_solve(const double *weights,
                                uintptr_t n_sources,
                                uintptr_t n_targets,
                                int64_t *assignment,
                                double *total_weight);

/**
 * `|o - o_star| / o / n * scale`. `CE_STATUS_UNDEFINED` when `o` is zero
 * or `n` is zero; `CE_STATUS_INVALID_ARGUMENT` when `scale` is not a power
 * of ten.
 *
 * # Safety
 * `out` must be writable.
 */
enum CeStatus ce_ace(double o, double o_star, uintptr_t n, uint64_t scale, double *out);

/**
 * Loads everything an editor needs. The dataset is tagged with the
 * built-in tagger unless `pretagged` is true.
 *
 * # Safety
 * Strings must be NUL-terminated; `out` writable.
 */
enum CeStatus ce_editor_new(const char *lexicon_path,
                            const char *colors_path,
                            const char *dataset_path,
                            bool pretagged,
                            struct CeEditor **out);

/**
 * # Safety
 * `editor` must come from [`ce_editor_new`] and not have been freed.
 */
void ce_editor_free(struct CeEditor *editor);

/**
 * Number of queries in the editor's dataset.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CeStatus ce_editor_query_count(const struct CeEditor *editor, uintptr_t *out);

/**
 * Applies intervention `code` to query `query_id` and returns the edited
 * query as a JSON object `{query_id, code, seed, edited_text,
 * substitutions, n_perturbed}`. Free the result with [`ce_string_free`].
 * Safe to call from several threads on one editor.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum CeStatus ce_editor_edit(const struct CeEditor *editor,
                             const char *code,
                             uint64_t seed,
                             const char *query_id,
                             char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTRASTIVE_EDITS_H */
