/* C API for the research idea generation pipeline.
 *
 * All functions return ra_status (RA_OK == 0); the message for the most
 * recent failure on the calling thread is available via ra_last_error().
 * Objects are opaque handles released with their ra_*_free function.
 * Strings returned through out-parameters are heap-allocated and must be
 * released with ra_string_free.
 */
#ifndef RESEARCHAGENT_H
#define RESEARCHAGENT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RA_API __declspec(dllexport)
#else
#define RA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ra_status {
  RA_OK = 0,
  RA_ERR_INVALID_INPUT = 1,
  RA_ERR_NOT_FOUND = 2,
  RA_ERR_PARSE = 3,
  RA_ERR_RENDER = 4,
  RA_ERR_EXTRACTION = 5,
  RA_ERR_TRANSPORT = 6,
  RA_ERR_REPLAY_MISS = 7,
  RA_ERR_IO = 8,
  RA_ERR_STAGE = 9,
  RA_ERR_INDUCTION = 10,
  RA_ERR_UNDEFINED = 11,
  RA_ERR_INTERNAL = 12
} ra_status;

typedef struct ra_config ra_config;
typedef struct ra_store ra_store;

/* Message for the last failed call on this thread; never NULL. */
RA_API const char* ra_last_error(void);

RA_API void ra_string_free(char* s);

/* --- configuration ------------------------------------------------------ */

RA_API ra_status ra_config_load(const char* path, ra_config** out);
RA_API ra_status ra_config_default(ra_config** out);
/* Flag-style override; keys match the config file keys. */
RA_API ra_status ra_config_set(ra_config* cfg, const char* key,
                               const char* value);
RA_API void ra_config_free(ra_config* cfg);

/* --- pipeline subcommands ------------------------------------------------ */
/* Each writes its human-readable report into *report (may be NULL). */

RA_API ra_status ra_build_store(const ra_config* cfg, char** report);
RA_API ra_status ra_generate(const ra_config* cfg, const char* core_id,
                             char** report);
RA_API ra_status ra_review(const ra_config* cfg, const char* idea_path,
                           char** report);
RA_API ra_status ra_refine(const ra_config* cfg, const char* idea_path,
                           char** report);
RA_API ra_status ra_evaluate(const ra_config* cfg, const char* scores_csv,
                             char** report);
RA_API ra_status ra_compare(const ra_config* cfg, const char* idea_a_path,
                            const char* idea_b_path, const char* stage,
                            char** report);
RA_API ra_status ra_induce_criteria(const ra_config* cfg,
                                    const char* annotations_path,
                                    char** report);
RA_API ra_status ra_stats(const ra_config* cfg, char** report);

/* --- knowledge store queries --------------------------------------------- */

RA_API ra_status ra_store_open(const char* path, ra_store** out);
RA_API void ra_store_free(ra_store* store);
RA_API ra_status ra_store_size(const ra_store* store, int64_t* m,
                               int64_t* total_occurrences,
                               int64_t* pair_entries);
RA_API ra_status ra_store_prior(const ra_store* store, const char* entity,
                                double* out);
RA_API ra_status ra_store_conditional(const ra_store* store,
                                      const char* given, const char* entity,
                                      double alpha, double* out);
/* JSON array of {"entity": ..., "log_score": ...}; context is a JSON object
 * {name: count}. */
RA_API ra_status ra_store_retrieve(const ra_store* store,
                                   const char* context_json, int k,
                                   double alpha, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* RESEARCHAGENT_H */
