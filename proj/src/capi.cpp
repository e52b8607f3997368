// Copyright 2026 The simpop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simpop/simpop.h"

#include "simpop/affinity.hpp"
#include "simpop/baselines.hpp"
#include "simpop/embedder.hpp"
#include "simpop/errors.hpp"
#include "simpop/evaluator.hpp"
#include "simpop/hms_model.hpp"
#include "simpop/recommender.hpp"
#include "simpop/session_store.hpp"
#include "simpop/simulate.hpp"
#include "simpop/text_io.hpp"

#include <memory>
#include <new>
#include <string>
#include <vector>

struct simpop_corpus {
    simpop::SessionCorpus value;
};
struct simpop_truth {
    simpop::TruthMap value;
};
struct simpop_graph {
    simpop::AffinityGraph value;
};
struct simpop_model {
    simpop::EmbeddingModel value;
};
struct simpop_trace {
    simpop::FitTrace value;
};
struct simpop_ranker {
    std::unique_ptr<simpop::Ranker> value;
    std::string name;
};
struct simpop_ranked_list {
    simpop::RankedList value;
};
struct simpop_report {
    simpop::EvalReport value;
};
struct simpop_grid_result {
    simpop::GridResult value;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_last_line = 0;

simpop_status fail(simpop_status status, const char* what, std::size_t line = 0) {
    g_last_error = what;
    g_last_line = line;
    return status;
}

template <typename Body>
simpop_status guard(Body&& body) noexcept {
    try {
        body();
        return SIMPOP_OK;
    } catch (const simpop::ParseError& e) {
        return fail(SIMPOP_ERR_PARSE, e.what(), e.line());
    } catch (const simpop::ValidationError& e) {
        return fail(SIMPOP_ERR_VALIDATION, e.what());
    } catch (const simpop::MissingItemError& e) {
        return fail(SIMPOP_ERR_MISSING_ITEM, e.what());
    } catch (const simpop::DomainError& e) {
        return fail(SIMPOP_ERR_DOMAIN, e.what());
    } catch (const simpop::UndefinedSimilarity& e) {
        return fail(SIMPOP_ERR_DOMAIN, e.what());
    } catch (const simpop::DivergenceError& e) {
        return fail(SIMPOP_ERR_DIVERGENCE, e.what());
    } catch (const simpop::NoAnchorError& e) {
        return fail(SIMPOP_ERR_NO_ANCHOR, e.what());
    } catch (const simpop::IoError& e) {
        return fail(SIMPOP_ERR_IO, e.what());
    } catch (const simpop::InvalidArgument& e) {
        return fail(SIMPOP_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SIMPOP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SIMPOP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SIMPOP_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* name) {
    if (!p) throw simpop::InvalidArgument(std::string(name) + " must not be NULL");
}

simpop::CorpusRole to_role(simpop_role role) {
    switch (role) {
    case SIMPOP_ROLE_TRAIN: return simpop::CorpusRole::Train;
    case SIMPOP_ROLE_TEST: return simpop::CorpusRole::Test;
    }
    throw simpop::InvalidArgument("unknown corpus role");
}

simpop::FitConfig to_fit_config(const simpop_fit_config& c) {
    simpop::FitConfig cfg;
    cfg.params = simpop::ModelParams{c.alpha, c.dim, c.lambda};
    cfg.seed = c.seed;
    cfg.init_scale = c.init_scale;
    cfg.max_iterations = c.max_iterations;
    cfg.gradient_tolerance = c.gradient_tolerance;
    cfg.memory = c.memory;
    cfg.reduction.threads = c.threads;
    cfg.reduction.deterministic = c.deterministic != 0;
    cfg.initialization = c.zero_init ? simpop::Initialization::Zero : simpop::Initialization::Random;
    return cfg;
}

simpop::RecommendOptions to_recommend_options(const simpop_ranker_options* o) {
    simpop::RecommendOptions opt;
    if (o) {
        opt.rank.exclude_anchor = o->include_anchor == 0;
        opt.anchor_mode =
            o->session_frequency ? simpop::AnchorMode::SessionFrequency : simpop::AnchorMode::GlobalPopularity;
    }
    return opt;
}

simpop_ranker* wrap(std::unique_ptr<simpop::Ranker> r) {
    auto* h = new simpop_ranker{std::move(r), {}};
    h->name = h->value->name();
    return h;
}

} // namespace

extern "C" {

const char* simpop_version(void) {
    return SIMPOP_VERSION_STRING;
}

const char* simpop_last_error(void) {
    return g_last_error.c_str();
}

size_t simpop_last_error_line(void) {
    return g_last_line;
}

const char* simpop_status_name(simpop_status status) {
    switch (status) {
    case SIMPOP_OK: return "ok";
    case SIMPOP_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SIMPOP_ERR_IO: return "io";
    case SIMPOP_ERR_PARSE: return "parse";
    case SIMPOP_ERR_VALIDATION: return "validation";
    case SIMPOP_ERR_MISSING_ITEM: return "missing-item";
    case SIMPOP_ERR_DOMAIN: return "domain";
    case SIMPOP_ERR_DIVERGENCE: return "divergence";
    case SIMPOP_ERR_NO_ANCHOR: return "no-anchor";
    case SIMPOP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

/* sessions */

simpop_status simpop_corpus_load(const char* path, const char* schema, simpop_role role, int drop_invalid,
                                 simpop_corpus** out, size_t* dropped) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        simpop::ParseOptions opt;
        opt.drop_invalid_sessions = drop_invalid != 0;
        simpop::ParseStats stats;
        auto corpus = simpop::load_session_log(path, simpop::Schema::parse(schema ? schema : ""), to_role(role),
                                               opt, &stats);
        *out = new simpop_corpus{std::move(corpus)};
        if (dropped) *dropped = stats.dropped_sessions;
    });
}

simpop_status simpop_corpus_parse(const char* text, size_t length, const char* schema, simpop_role role,
                                  simpop_corpus** out) {
    return guard([&] {
        require(text, "text");
        require(out, "out");
        auto corpus = simpop::parse_session_log(std::string_view(text, length),
                                                simpop::Schema::parse(schema ? schema : ""), to_role(role));
        *out = new simpop_corpus{std::move(corpus)};
    });
}

simpop_status simpop_corpus_save(const simpop_corpus* corpus, const char* path) {
    return guard([&] {
        require(corpus, "corpus");
        require(path, "path");
        simpop::text::write_file(path, simpop::serialize_session_log(corpus->value));
    });
}

void simpop_corpus_free(simpop_corpus* corpus) {
    delete corpus;
}

size_t simpop_corpus_session_count(const simpop_corpus* corpus) {
    return corpus ? corpus->value.size() : 0;
}

size_t simpop_corpus_action_count(const simpop_corpus* corpus) {
    return corpus ? corpus->value.action_count() : 0;
}

size_t simpop_corpus_item_count(const simpop_corpus* corpus) {
    return corpus ? corpus->value.vocabulary().size() : 0;
}

simpop_role simpop_corpus_role(const simpop_corpus* corpus) {
    return corpus && corpus->value.role() == simpop::CorpusRole::Test ? SIMPOP_ROLE_TEST : SIMPOP_ROLE_TRAIN;
}

const char* simpop_corpus_session_id(const simpop_corpus* corpus, size_t index) {
    if (!corpus || index >= corpus->value.size()) return nullptr;
    return corpus->value.sessions()[index].id.c_str();
}

simpop_status simpop_corpus_filter_bookable(const simpop_corpus* train, simpop_corpus** out, size_t* dropped) {
    return guard([&] {
        require(train, "train");
        require(out, "out");
        auto res = simpop::filter_bookable_sessions(train->value);
        *out = new simpop_corpus{std::move(res.corpus)};
        if (dropped) *dropped = res.dropped;
    });
}

simpop_status simpop_corpus_hide_targets(const simpop_corpus* test, simpop_corpus** hidden, simpop_truth** truth) {
    return guard([&] {
        require(test, "test");
        require(hidden, "hidden");
        require(truth, "truth");
        auto res = simpop::hide_test_targets(test->value);
        auto c = std::make_unique<simpop_corpus>(simpop_corpus{std::move(res.corpus)});
        *truth = new simpop_truth{std::move(res.truth)};
        *hidden = c.release();
    });
}

simpop_status simpop_corpus_truncate_to_clickout(const simpop_corpus* corpus, simpop_corpus** out) {
    return guard([&] {
        require(corpus, "corpus");
        require(out, "out");
        *out = new simpop_corpus{simpop::truncate_to_last_clickout(corpus->value)};
    });
}

simpop_status simpop_corpus_split_holdout(const simpop_corpus* corpus, double fraction, simpop_corpus** train,
                                          simpop_corpus** validation, simpop_truth** truth) {
    return guard([&] {
        require(corpus, "corpus");
        require(train, "train");
        require(validation, "validation");
        require(truth, "truth");
        auto split = simpop::split_holdout(corpus->value, fraction);
        auto t = std::make_unique<simpop_corpus>(simpop_corpus{std::move(split.train)});
        auto v = std::make_unique<simpop_corpus>(simpop_corpus{std::move(split.validation.corpus)});
        *truth = new simpop_truth{std::move(split.validation.truth)};
        *train = t.release();
        *validation = v.release();
    });
}

simpop_status simpop_truth_load(const char* path, simpop_truth** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new simpop_truth{simpop::parse_truth(simpop::text::read_file(path))};
    });
}

simpop_status simpop_truth_save(const simpop_truth* truth, const char* path) {
    return guard([&] {
        require(truth, "truth");
        require(path, "path");
        simpop::text::write_file(path, simpop::serialize_truth(truth->value));
    });
}

size_t simpop_truth_count(const simpop_truth* truth) {
    return truth ? truth->value.size() : 0;
}

void simpop_truth_free(simpop_truth* truth) {
    delete truth;
}

/* affinity graph */

simpop_status simpop_graph_build(const simpop_corpus* train, int min_sessions, int max_pairs_per_item,
                                 simpop_graph** out) {
    return guard([&] {
        require(train, "train");
        require(out, "out");
        if (train->value.role() != simpop::CorpusRole::Train) {
            throw simpop::InvalidArgument("affinity graph needs a TRAIN corpus");
        }
        simpop::AffinityOptions opt{min_sessions, max_pairs_per_item};
        *out = new simpop_graph{simpop::build_affinity_graph(train->value, opt)};
    });
}

simpop_status simpop_graph_load(const char* pairs_path, const char* popularity_path, simpop_graph** out) {
    return guard([&] {
        require(pairs_path, "pairs_path");
        require(popularity_path, "popularity_path");
        require(out, "out");
        *out = new simpop_graph{simpop::parse_graph(simpop::text::read_file(pairs_path),
                                                    simpop::text::read_file(popularity_path))};
    });
}

simpop_status simpop_graph_save(const simpop_graph* graph, const char* pairs_path, const char* popularity_path) {
    return guard([&] {
        require(graph, "graph");
        if (pairs_path) simpop::text::write_file(pairs_path, simpop::serialize_pairs(graph->value));
        if (popularity_path) {
            simpop::text::write_file(popularity_path, simpop::serialize_popularity(graph->value.popularity()));
        }
    });
}

size_t simpop_graph_item_count(const simpop_graph* graph) {
    return graph ? graph->value.n_items() : 0;
}

size_t simpop_graph_pair_count(const simpop_graph* graph) {
    return graph ? graph->value.pair_count() : 0;
}

simpop_status simpop_graph_lookup(const simpop_graph* graph, const char* i, const char* j, double* p) {
    return guard([&] {
        require(graph, "graph");
        require(i, "i");
        require(j, "j");
        require(p, "p");
        *p = graph->value.lookup(i, j).value_or(0.0);
    });
}

void simpop_graph_free(simpop_graph* graph) {
    delete graph;
}

/* embedding */

void simpop_fit_config_init(simpop_fit_config* config) {
    if (!config) return;
    const simpop::FitConfig d;
    config->dim = d.params.dim;
    config->alpha = d.params.alpha;
    config->lambda = d.params.lambda;
    config->seed = d.seed;
    config->init_scale = d.init_scale;
    config->max_iterations = d.max_iterations;
    config->gradient_tolerance = d.gradient_tolerance;
    config->memory = d.memory;
    config->threads = d.reduction.threads;
    config->deterministic = d.reduction.deterministic ? 1 : 0;
    config->zero_init = 0;
}

simpop_status simpop_fit(const simpop_graph* graph, const simpop_fit_config* config, simpop_model** model,
                         simpop_trace** trace) {
    return guard([&] {
        require(graph, "graph");
        require(config, "config");
        require(model, "model");
        try {
            auto res = simpop::fit_embedding(graph->value, to_fit_config(*config));
            auto m = std::make_unique<simpop_model>(simpop_model{std::move(res.model)});
            if (trace) *trace = new simpop_trace{std::move(res.trace)};
            *model = m.release();
        } catch (const simpop::FitDivergence& e) {
            if (trace) *trace = new simpop_trace{e.trace()};
            throw;
        }
    });
}

simpop_status simpop_trace_save(const simpop_trace* trace, const char* path) {
    return guard([&] {
        require(trace, "trace");
        require(path, "path");
        simpop::text::write_file(path, simpop::serialize_trace(trace->value));
    });
}

int simpop_trace_iterations(const simpop_trace* trace) {
    return trace ? trace->value.iterations_used : 0;
}

double simpop_trace_final_objective(const simpop_trace* trace) {
    return trace && !trace->value.iterations.empty() ? trace->value.iterations.back().objective : 0.0;
}

double simpop_trace_final_grad_norm(const simpop_trace* trace) {
    return trace ? trace->value.final_grad_norm : 0.0;
}

double simpop_trace_wall_seconds(const simpop_trace* trace) {
    return trace ? trace->value.wall_seconds : 0.0;
}

const char* simpop_trace_stop_reason(const simpop_trace* trace) {
    return trace ? simpop::to_string(trace->value.stop) : "";
}

void simpop_trace_free(simpop_trace* trace) {
    delete trace;
}

simpop_status simpop_model_load(const char* path, simpop_model** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new simpop_model{simpop::parse_model(simpop::text::read_file(path))};
    });
}

simpop_status simpop_model_save(const simpop_model* model, const char* path) {
    return guard([&] {
        require(model, "model");
        require(path, "path");
        simpop::text::write_file(path, simpop::serialize_model(model->value));
    });
}

size_t simpop_model_item_count(const simpop_model* model) {
    return model ? model->value.size() : 0;
}

int simpop_model_dim(const simpop_model* model) {
    return model ? model->value.dim() : 0;
}

double simpop_model_alpha(const simpop_model* model) {
    return model ? model->value.params().alpha : 0.0;
}

simpop_status simpop_model_connection_probability(const simpop_model* model, const char* i, const char* j,
                                                  double* p) {
    return guard([&] {
        require(model, "model");
        require(i, "i");
        require(j, "j");
        require(p, "p");
        *p = simpop::connection_probability(model->value, std::string(i), std::string(j));
    });
}

simpop_status simpop_model_regime_check(const simpop_model* model, size_t* checks, size_t* violations) {
    return guard([&] {
        require(model, "model");
        if (model->value.empty()) throw simpop::InvalidArgument("regime check needs a non-empty model");
        const auto report = simpop::regime_check(model->value);
        if (checks) *checks = report.checks;
        if (violations) *violations = report.violations;
    });
}

simpop_status simpop_model_plant(size_t n_items, int dim, double alpha, double kappa_min, double kappa_max,
                                 double extent, uint64_t seed, simpop_model** out) {
    return guard([&] {
        require(out, "out");
        simpop::ModelParams params{alpha, dim, 0.0};
        *out = new simpop_model{simpop::plant_model(n_items, params, kappa_min, kappa_max, extent, seed)};
    });
}

void simpop_model_free(simpop_model* model) {
    delete model;
}

double simpop_connection_probability(double d2, double kappa_i, double kappa_j, double alpha) {
    return simpop::connection_probability(d2, kappa_i, kappa_j, alpha);
}

simpop_status simpop_derive_squared_distance(double p, double kappa_i, double kappa_j, double alpha, double* d2) {
    return guard([&] {
        require(d2, "d2");
        *d2 = simpop::derive_squared_distance(p, kappa_i, kappa_j, alpha);
    });
}

simpop_status simpop_synthesize_network(const simpop_model* model, uint64_t seed, const char* path,
                                        size_t* edge_count) {
    return guard([&] {
        require(model, "model");
        const auto edges = simpop::generate_synthetic_network(model->value, seed);
        if (path) simpop::text::write_file(path, simpop::serialize_edges(model->value, edges));
        if (edge_count) *edge_count = edges.size();
    });
}

void simpop_sim_config_init(simpop_sim_config* config) {
    if (!config) return;
    const simpop::SimulationConfig d;
    config->n_items = d.n_items;
    config->n_sessions = d.n_sessions;
    config->dim = d.dim;
    config->alpha = d.alpha;
    config->kappa_min = d.kappa_min;
    config->kappa_max = d.kappa_max;
    config->extent = d.extent;
    config->min_actions = d.min_actions;
    config->max_actions = d.max_actions;
    config->impressions = d.impressions;
    config->non_item_rate = d.non_item_rate;
    config->seed = d.seed;
}

simpop_status simpop_simulate(const simpop_sim_config* config, simpop_model** planted, simpop_corpus** sessions) {
    return guard([&] {
        require(config, "config");
        simpop::SimulationConfig c;
        c.n_items = config->n_items;
        c.n_sessions = config->n_sessions;
        c.dim = config->dim;
        c.alpha = config->alpha;
        c.kappa_min = config->kappa_min;
        c.kappa_max = config->kappa_max;
        c.extent = config->extent;
        c.min_actions = config->min_actions;
        c.max_actions = config->max_actions;
        c.impressions = config->impressions;
        c.non_item_rate = config->non_item_rate;
        c.seed = config->seed;
        auto data = simpop::simulate_sessions(c);
        auto m = std::make_unique<simpop_model>(simpop_model{std::move(data.planted)});
        if (sessions) *sessions = new simpop_corpus{std::move(data.sessions)};
        if (planted) *planted = m.release();
    });
}

simpop_status simpop_simulate_metadata(const simpop_model* model, double cell, uint64_t seed, const char* path) {
    return guard([&] {
        require(model, "model");
        require(path, "path");
        simpop::text::write_file(path, simpop::simulate_metadata(model->value, cell, seed));
    });
}

/* ranking */

void simpop_ranker_options_init(simpop_ranker_options* options) {
    if (!options) return;
    options->include_anchor = 0;
    options->session_frequency = 0;
    options->clickout_only = 0;
    options->k = 100;
}

simpop_status simpop_ranker_proposed(const simpop_model* model, const simpop_graph* popularity,
                                     const simpop_ranker_options* options, simpop_ranker** out) {
    return guard([&] {
        require(model, "model");
        require(out, "out");
        simpop::PopularityTable pop = popularity ? popularity->value.popularity() : simpop::PopularityTable{};
        *out = wrap(std::make_unique<simpop::ProposedRanker>(model->value, std::move(pop),
                                                             to_recommend_options(options)));
    });
}

simpop_status simpop_ranker_random(uint64_t seed, simpop_ranker** out) {
    return guard([&] {
        require(out, "out");
        *out = wrap(std::make_unique<simpop::RandomRanker>(seed));
    });
}

simpop_status simpop_ranker_ipop(const simpop_corpus* train, simpop_ranker** out) {
    return guard([&] {
        require(train, "train");
        require(out, "out");
        *out = wrap(std::make_unique<simpop::PopularityRanker>(simpop::ipop_ranker(train->value)));
    });
}

simpop_status simpop_ranker_icpop(const simpop_corpus* train, simpop_ranker** out) {
    return guard([&] {
        require(train, "train");
        require(out, "out");
        *out = wrap(std::make_unique<simpop::PopularityRanker>(simpop::icpop_ranker(train->value)));
    });
}

simpop_status simpop_ranker_icknn(const simpop_graph* graph, const simpop_ranker_options* options,
                                  simpop_ranker** out) {
    return guard([&] {
        require(graph, "graph");
        require(out, "out");
        simpop_ranker_options o;
        simpop_ranker_options_init(&o);
        if (options) o = *options;
        *out = wrap(std::make_unique<simpop::CooccurrenceKnnRanker>(
            graph->value, o.k, o.clickout_only ? simpop::PreviousItem::ClickoutOnly : simpop::PreviousItem::AnyAction));
    });
}

simpop_status simpop_ranker_imknn(const char* metadata_path, const simpop_graph* popularity,
                                  const simpop_ranker_options* options, simpop_ranker** out) {
    return guard([&] {
        require(metadata_path, "metadata_path");
        require(out, "out");
        simpop_ranker_options o;
        simpop_ranker_options_init(&o);
        if (options) o = *options;
        auto meta = simpop::parse_item_metadata(simpop::text::read_file(metadata_path));
        simpop::PopularityTable pop = popularity ? popularity->value.popularity() : simpop::PopularityTable{};
        *out = wrap(std::make_unique<simpop::MetadataKnnRanker>(
            std::move(meta), std::move(pop), o.k,
            o.clickout_only ? simpop::PreviousItem::ClickoutOnly : simpop::PreviousItem::AnyAction));
    });
}

const char* simpop_ranker_name(const simpop_ranker* ranker) {
    return ranker ? ranker->name.c_str() : "";
}

void simpop_ranker_free(simpop_ranker* ranker) {
    delete ranker;
}

simpop_status simpop_rank(const simpop_ranker* ranker, const simpop_corpus* sessions, const char* session_id,
                          const char* const* candidates, size_t n_candidates, size_t t,
                          simpop_ranked_list** out) {
    return guard([&] {
        require(ranker, "ranker");
        require(out, "out");
        std::span<const simpop::Action> context;
        if (sessions && session_id) {
            const simpop::Session* s = sessions->value.find(session_id);
            if (!s) throw simpop::InvalidArgument(std::string("unknown session '") + session_id + "'");
            context = simpop::session_context(*s);
        }
        if (!candidates) {
            const auto* proposed = dynamic_cast<const simpop::ProposedRanker*>(ranker->value.get());
            if (!proposed) throw simpop::InvalidArgument("ranker '" + ranker->name + "' needs candidates");
            const auto& pop = proposed->popularity();
            *out = new simpop_ranked_list{simpop::recommend(proposed->model(), context, nullptr, t,
                                                            pop.empty() ? nullptr : &pop, proposed->options())};
            return;
        }
        std::vector<std::string> list;
        list.reserve(n_candidates);
        for (size_t k = 0; k < n_candidates; ++k) {
            require(candidates[k], "candidate");
            list.emplace_back(candidates[k]);
        }
        if (t == 0) throw simpop::InvalidArgument("t must be >= 1");
        *out = new simpop_ranked_list{ranker->value->rank(context, list, t)};
    });
}

size_t simpop_ranked_list_size(const simpop_ranked_list* list) {
    return list ? list->value.size() : 0;
}

const char* simpop_ranked_list_item(const simpop_ranked_list* list, size_t index) {
    if (!list || index >= list->value.size()) return nullptr;
    return list->value.items[index].item.c_str();
}

double simpop_ranked_list_score(const simpop_ranked_list* list, size_t index) {
    if (!list || index >= list->value.size()) return 0.0;
    return list->value.items[index].score;
}

const char* simpop_ranked_list_anchor(const simpop_ranked_list* list) {
    return list ? list->value.anchor.c_str() : "";
}

int simpop_ranked_list_fallback(const simpop_ranked_list* list) {
    return list && list->value.fallback_used ? 1 : 0;
}

void simpop_ranked_list_free(simpop_ranked_list* list) {
    delete list;
}

/* evaluation */

simpop_status simpop_evaluate(const simpop_ranker* ranker, const simpop_corpus* test, const simpop_truth* truth,
                              const int* cutoffs, size_t n_cutoffs, int threads, simpop_report** out) {
    return guard([&] {
        require(ranker, "ranker");
        require(test, "test");
        require(truth, "truth");
        require(out, "out");
        simpop::EvalOptions opt;
        if (cutoffs) opt.cutoffs.assign(cutoffs, cutoffs + n_cutoffs);
        opt.threads = threads;
        *out = new simpop_report{simpop::evaluate(*ranker->value, test->value, truth->value, opt)};
    });
}

simpop_status simpop_report_add_param(simpop_report* report, const char* key, const char* value) {
    return guard([&] {
        require(report, "report");
        require(key, "key");
        require(value, "value");
        report->value.params.emplace_back(key, value);
    });
}

simpop_status simpop_report_save(const simpop_report* report, const char* path) {
    return guard([&] {
        require(report, "report");
        require(path, "path");
        simpop::text::write_file(path, simpop::serialize_report(report->value));
    });
}

double simpop_report_mrr(const simpop_report* report) {
    return report ? report->value.mrr : 0.0;
}

double simpop_report_map_at(const simpop_report* report, int n) {
    if (!report) return -1.0;
    const auto it = report->value.map_at.find(n);
    return it == report->value.map_at.end() ? -1.0 : it->second;
}

size_t simpop_report_session_count(const simpop_report* report) {
    return report ? report->value.session_count : 0;
}

size_t simpop_report_skipped_count(const simpop_report* report) {
    return report ? report->value.skipped.size() : 0;
}

void simpop_report_free(simpop_report* report) {
    delete report;
}

simpop_status simpop_grid_search(const simpop_graph* graph, const simpop_corpus* validation,
                                 const simpop_truth* truth, const int* dims, size_t n_dims, const double* lambdas,
                                 size_t n_lambdas, const double* alphas, size_t n_alphas,
                                 const simpop_fit_config* config, const uint64_t* seeds, size_t n_seeds, int workers,
                                 const simpop_ranker_options* options, simpop_grid_result** out) {
    return guard([&] {
        require(graph, "graph");
        require(validation, "validation");
        require(truth, "truth");
        require(out, "out");
        simpop::GridSpec grid;
        if (dims) grid.dims.assign(dims, dims + n_dims);
        if (lambdas) grid.lambdas.assign(lambdas, lambdas + n_lambdas);
        if (alphas) grid.alphas.assign(alphas, alphas + n_alphas);
        simpop::GridOptions opt;
        if (config) opt.base = to_fit_config(*config);
        if (seeds) opt.seeds.assign(seeds, seeds + n_seeds);
        opt.workers = workers;
        opt.recommend = to_recommend_options(options);
        *out = new simpop_grid_result{simpop::grid_search(graph->value, validation->value, truth->value, grid, opt)};
    });
}

size_t simpop_grid_row_count(const simpop_grid_result* result) {
    return result ? result->value.rows.size() : 0;
}

size_t simpop_grid_failed_count(const simpop_grid_result* result) {
    if (!result) return 0;
    size_t n = 0;
    for (const auto& r : result->value.rows) n += r.failed ? 1 : 0;
    return n;
}

simpop_status simpop_grid_best(const simpop_grid_result* result, simpop_fit_config* config, double* mrr) {
    return guard([&] {
        require(result, "result");
        if (!result->value.best) throw simpop::ValidationError("every grid cell failed");
        const auto& row = result->value.rows[*result->value.best];
        if (config) {
            config->dim = row.params.dim;
            config->alpha = row.params.alpha;
            config->lambda = row.params.lambda;
        }
        if (mrr) *mrr = row.mrr;
    });
}

simpop_status simpop_grid_save(const simpop_grid_result* result, const char* path) {
    return guard([&] {
        require(result, "result");
        require(path, "path");
        simpop::text::write_file(path, simpop::serialize_grid(result->value));
    });
}

void simpop_grid_free(simpop_grid_result* result) {
    delete result;
}

} // extern "C"
