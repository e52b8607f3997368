/*
 * Copyright 2026 The simpop Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libsimpop: similarity-popularity embeddings for
 * session-based recommendation.
 *
 * Every object is an opaque handle released with its *_free function
 * (NULL is accepted). Functions return a simpop_status; on failure the
 * message of the calling thread's last error is available from
 * simpop_last_error() until the next failing call on that thread.
 * Output handles are only written on success, except where noted.
 */

#ifndef SIMPOP_SIMPOP_H
#define SIMPOP_SIMPOP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SIMPOP_BUILDING_LIBRARY)
#    define SIMPOP_API __declspec(dllexport)
#  else
#    define SIMPOP_API __declspec(dllimport)
#  endif
#else
#  define SIMPOP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum simpop_status {
    SIMPOP_OK = 0,
    SIMPOP_ERR_INVALID_ARGUMENT = 1,
    SIMPOP_ERR_IO = 2,
    SIMPOP_ERR_PARSE = 3,
    SIMPOP_ERR_VALIDATION = 4,
    SIMPOP_ERR_MISSING_ITEM = 5,
    SIMPOP_ERR_DOMAIN = 6,
    SIMPOP_ERR_DIVERGENCE = 7,
    SIMPOP_ERR_NO_ANCHOR = 8,
    SIMPOP_ERR_INTERNAL = 99
} simpop_status;

typedef enum simpop_role { SIMPOP_ROLE_TRAIN = 0, SIMPOP_ROLE_TEST = 1 } simpop_role;

SIMPOP_API const char* simpop_version(void);
SIMPOP_API const char* simpop_last_error(void);
/* Line number of the last parse error on this thread, 0 if none. */
SIMPOP_API size_t simpop_last_error_line(void);
SIMPOP_API const char* simpop_status_name(simpop_status status);

/* ---- sessions ---------------------------------------------------------- */

typedef struct simpop_corpus simpop_corpus;
typedef struct simpop_truth simpop_truth;

/* schema: "field=column,..." overrides or NULL; ".gz" paths are inflated.
 * drop_invalid != 0 drops invalid sessions instead of failing;
 * dropped (may be NULL) receives their count. */
SIMPOP_API simpop_status simpop_corpus_load(const char* path, const char* schema, simpop_role role,
                                            int drop_invalid, simpop_corpus** out, size_t* dropped);
SIMPOP_API simpop_status simpop_corpus_parse(const char* text, size_t length, const char* schema,
                                             simpop_role role, simpop_corpus** out);
SIMPOP_API simpop_status simpop_corpus_save(const simpop_corpus* corpus, const char* path);
SIMPOP_API void simpop_corpus_free(simpop_corpus* corpus);
SIMPOP_API size_t simpop_corpus_session_count(const simpop_corpus* corpus);
SIMPOP_API size_t simpop_corpus_action_count(const simpop_corpus* corpus);
SIMPOP_API size_t simpop_corpus_item_count(const simpop_corpus* corpus);
SIMPOP_API simpop_role simpop_corpus_role(const simpop_corpus* corpus);
/* Id of the index-th session (file order); NULL when out of range. */
SIMPOP_API const char* simpop_corpus_session_id(const simpop_corpus* corpus, size_t index);

SIMPOP_API simpop_status simpop_corpus_filter_bookable(const simpop_corpus* train, simpop_corpus** out,
                                                       size_t* dropped);
SIMPOP_API simpop_status simpop_corpus_hide_targets(const simpop_corpus* test, simpop_corpus** hidden,
                                                    simpop_truth** truth);
/* Truncates each session after its last valid clickout (role becomes TEST). */
SIMPOP_API simpop_status simpop_corpus_truncate_to_clickout(const simpop_corpus* corpus, simpop_corpus** out);
/* Holds out the latest `fraction` of sessions as hidden-target validation. */
SIMPOP_API simpop_status simpop_corpus_split_holdout(const simpop_corpus* corpus, double fraction,
                                                     simpop_corpus** train, simpop_corpus** validation,
                                                     simpop_truth** truth);

SIMPOP_API simpop_status simpop_truth_load(const char* path, simpop_truth** out);
SIMPOP_API simpop_status simpop_truth_save(const simpop_truth* truth, const char* path);
SIMPOP_API size_t simpop_truth_count(const simpop_truth* truth);
SIMPOP_API void simpop_truth_free(simpop_truth* truth);

/* ---- affinity graph ---------------------------------------------------- */

typedef struct simpop_graph simpop_graph;

/* max_pairs_per_item == 0 keeps every pair. */
SIMPOP_API simpop_status simpop_graph_build(const simpop_corpus* train, int min_sessions, int max_pairs_per_item,
                                            simpop_graph** out);
SIMPOP_API simpop_status simpop_graph_load(const char* pairs_path, const char* popularity_path,
                                           simpop_graph** out);
SIMPOP_API simpop_status simpop_graph_save(const simpop_graph* graph, const char* pairs_path,
                                           const char* popularity_path);
SIMPOP_API size_t simpop_graph_item_count(const simpop_graph* graph);
SIMPOP_API size_t simpop_graph_pair_count(const simpop_graph* graph);
/* *p = 0 when the pair is not stored. */
SIMPOP_API simpop_status simpop_graph_lookup(const simpop_graph* graph, const char* i, const char* j, double* p);
SIMPOP_API void simpop_graph_free(simpop_graph* graph);

/* ---- embedding --------------------------------------------------------- */

typedef struct simpop_fit_config {
    int dim;
    double alpha;
    double lambda;
    uint64_t seed;
    double init_scale;
    int max_iterations;
    double gradient_tolerance; /* relative to the initial gradient norm */
    int memory;
    int threads;
    int deterministic; /* non-zero: bit-reproducible reduction order */
    int zero_init;     /* non-zero: start from all-zero coordinates */
} simpop_fit_config;

SIMPOP_API void simpop_fit_config_init(simpop_fit_config* config);

typedef struct simpop_model simpop_model;
typedef struct simpop_trace simpop_trace;

/* On SIMPOP_ERR_DIVERGENCE *trace is still set (the model is not). */
SIMPOP_API simpop_status simpop_fit(const simpop_graph* graph, const simpop_fit_config* config,
                                    simpop_model** model, simpop_trace** trace);
SIMPOP_API simpop_status simpop_trace_save(const simpop_trace* trace, const char* path);
SIMPOP_API int simpop_trace_iterations(const simpop_trace* trace);
SIMPOP_API double simpop_trace_final_objective(const simpop_trace* trace);
SIMPOP_API double simpop_trace_final_grad_norm(const simpop_trace* trace);
SIMPOP_API double simpop_trace_wall_seconds(const simpop_trace* trace);
SIMPOP_API const char* simpop_trace_stop_reason(const simpop_trace* trace);
SIMPOP_API void simpop_trace_free(simpop_trace* trace);

SIMPOP_API simpop_status simpop_model_load(const char* path, simpop_model** out);
SIMPOP_API simpop_status simpop_model_save(const simpop_model* model, const char* path);
SIMPOP_API size_t simpop_model_item_count(const simpop_model* model);
SIMPOP_API int simpop_model_dim(const simpop_model* model);
SIMPOP_API double simpop_model_alpha(const simpop_model* model);
SIMPOP_API simpop_status simpop_model_connection_probability(const simpop_model* model, const char* i,
                                                             const char* j, double* p);
/* Count of monotonicity violations over the model's pairs (expected 0). */
SIMPOP_API simpop_status simpop_model_regime_check(const simpop_model* model, size_t* checks, size_t* violations);
/* Random model with ids "i0".."i{n-1}", coordinates in [-extent, extent]
 * and kappa log-uniform in [kappa_min, kappa_max]. */
SIMPOP_API simpop_status simpop_model_plant(size_t n_items, int dim, double alpha, double kappa_min,
                                            double kappa_max, double extent, uint64_t seed, simpop_model** out);
SIMPOP_API void simpop_model_free(simpop_model* model);

SIMPOP_API double simpop_connection_probability(double d2, double kappa_i, double kappa_j, double alpha);
SIMPOP_API simpop_status simpop_derive_squared_distance(double p, double kappa_i, double kappa_j, double alpha,
                                                        double* d2);

/* Bernoulli edge per unordered pair; writes `i<TAB>j` lines to path. */
SIMPOP_API simpop_status simpop_synthesize_network(const simpop_model* model, uint64_t seed, const char* path,
                                                   size_t* edge_count);

/* Synthetic browsing sessions drawn from a planted model. Each session
 * focuses on one popular item; touched items and the final clickout are
 * drawn with weight p(focus, j), impressions add popularity distractors. */
typedef struct simpop_sim_config {
    size_t n_items;
    size_t n_sessions;
    int dim;
    double alpha;
    double kappa_min;
    double kappa_max;
    double extent;
    size_t min_actions;
    size_t max_actions;
    size_t impressions;
    double non_item_rate;
    uint64_t seed;
} simpop_sim_config;

SIMPOP_API void simpop_sim_config_init(simpop_sim_config* config);
/* Either output may be NULL. The corpus has role TRAIN. */
SIMPOP_API simpop_status simpop_simulate(const simpop_sim_config* config, simpop_model** planted,
                                         simpop_corpus** sessions);
/* Writes `item<TAB>prop|prop` metadata where nearby items share cells. */
SIMPOP_API simpop_status simpop_simulate_metadata(const simpop_model* model, double cell, uint64_t seed,
                                                  const char* path);

/* ---- ranking ----------------------------------------------------------- */

typedef struct simpop_ranker simpop_ranker;
typedef struct simpop_ranked_list simpop_ranked_list;

typedef struct simpop_ranker_options {
    int include_anchor;      /* proposed: keep the anchor in the output */
    int session_frequency;   /* proposed: anchor by in-session count */
    int clickout_only;       /* knn: previous item must come from a clickout */
    size_t k;                /* knn neighbourhood size */
} simpop_ranker_options;

SIMPOP_API void simpop_ranker_options_init(simpop_ranker_options* options);

/* popularity (may be NULL): orders candidates unknown to the model. */
SIMPOP_API simpop_status simpop_ranker_proposed(const simpop_model* model, const simpop_graph* popularity,
                                                const simpop_ranker_options* options, simpop_ranker** out);
SIMPOP_API simpop_status simpop_ranker_random(uint64_t seed, simpop_ranker** out);
SIMPOP_API simpop_status simpop_ranker_ipop(const simpop_corpus* train, simpop_ranker** out);
SIMPOP_API simpop_status simpop_ranker_icpop(const simpop_corpus* train, simpop_ranker** out);
SIMPOP_API simpop_status simpop_ranker_icknn(const simpop_graph* graph, const simpop_ranker_options* options,
                                             simpop_ranker** out);
/* metadata file: item_id<TAB>prop|prop|...; popularity from the graph. */
SIMPOP_API simpop_status simpop_ranker_imknn(const char* metadata_path, const simpop_graph* popularity,
                                             const simpop_ranker_options* options, simpop_ranker** out);
SIMPOP_API const char* simpop_ranker_name(const simpop_ranker* ranker);
SIMPOP_API void simpop_ranker_free(simpop_ranker* ranker);

/* Ranks candidates for session `session_id` of `sessions` (a trailing
 * blanked clickout is ignored). candidates == NULL asks the proposed
 * ranker for the t nearest model items; other rankers need candidates. */
SIMPOP_API simpop_status simpop_rank(const simpop_ranker* ranker, const simpop_corpus* sessions,
                                     const char* session_id, const char* const* candidates, size_t n_candidates,
                                     size_t t, simpop_ranked_list** out);
SIMPOP_API size_t simpop_ranked_list_size(const simpop_ranked_list* list);
SIMPOP_API const char* simpop_ranked_list_item(const simpop_ranked_list* list, size_t index);
SIMPOP_API double simpop_ranked_list_score(const simpop_ranked_list* list, size_t index);
SIMPOP_API const char* simpop_ranked_list_anchor(const simpop_ranked_list* list);
SIMPOP_API int simpop_ranked_list_fallback(const simpop_ranked_list* list);
SIMPOP_API void simpop_ranked_list_free(simpop_ranked_list* list);

/* ---- evaluation -------------------------------------------------------- */

typedef struct simpop_report simpop_report;

/* cutoffs == NULL uses {1, 3, 5, 10}. */
SIMPOP_API simpop_status simpop_evaluate(const simpop_ranker* ranker, const simpop_corpus* test,
                                         const simpop_truth* truth, const int* cutoffs, size_t n_cutoffs,
                                         int threads, simpop_report** out);
SIMPOP_API simpop_status simpop_report_add_param(simpop_report* report, const char* key, const char* value);
SIMPOP_API simpop_status simpop_report_save(const simpop_report* report, const char* path);
SIMPOP_API double simpop_report_mrr(const simpop_report* report);
/* Negative when n was not among the cutoffs. */
SIMPOP_API double simpop_report_map_at(const simpop_report* report, int n);
SIMPOP_API size_t simpop_report_session_count(const simpop_report* report);
SIMPOP_API size_t simpop_report_skipped_count(const simpop_report* report);
SIMPOP_API void simpop_report_free(simpop_report* report);

typedef struct simpop_grid_result simpop_grid_result;

/* NULL arrays select the default grid values. `config` supplies every
 * non-grid fit setting. */
SIMPOP_API simpop_status simpop_grid_search(const simpop_graph* graph, const simpop_corpus* validation,
                                            const simpop_truth* truth, const int* dims, size_t n_dims,
                                            const double* lambdas, size_t n_lambdas, const double* alphas,
                                            size_t n_alphas, const simpop_fit_config* config, const uint64_t* seeds,
                                            size_t n_seeds, int workers, const simpop_ranker_options* options,
                                            simpop_grid_result** out);
SIMPOP_API size_t simpop_grid_row_count(const simpop_grid_result* result);
SIMPOP_API size_t simpop_grid_failed_count(const simpop_grid_result* result);
/* Writes the best cell's settings into *config; SIMPOP_ERR_VALIDATION when
 * every cell failed. */
SIMPOP_API simpop_status simpop_grid_best(const simpop_grid_result* result, simpop_fit_config* config,
                                          double* mrr);
SIMPOP_API simpop_status simpop_grid_save(const simpop_grid_result* result, const char* path);
SIMPOP_API void simpop_grid_free(simpop_grid_result* result);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SIMPOP_SIMPOP_H */
