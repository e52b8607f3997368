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

// simpop command-line front end. Everything goes through the C API.

#include "simpop/simpop.h"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInternal = 1;

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const noexcept { Free(p); }
};
using Corpus = std::unique_ptr<simpop_corpus, Deleter<simpop_corpus, simpop_corpus_free>>;
using Truth = std::unique_ptr<simpop_truth, Deleter<simpop_truth, simpop_truth_free>>;
using Graph = std::unique_ptr<simpop_graph, Deleter<simpop_graph, simpop_graph_free>>;
using Model = std::unique_ptr<simpop_model, Deleter<simpop_model, simpop_model_free>>;
using Trace = std::unique_ptr<simpop_trace, Deleter<simpop_trace, simpop_trace_free>>;
using Ranker = std::unique_ptr<simpop_ranker, Deleter<simpop_ranker, simpop_ranker_free>>;
using RankedList = std::unique_ptr<simpop_ranked_list, Deleter<simpop_ranked_list, simpop_ranked_list_free>>;
using Report = std::unique_ptr<simpop_report, Deleter<simpop_report, simpop_report_free>>;
using Grid = std::unique_ptr<simpop_grid_result, Deleter<simpop_grid_result, simpop_grid_free>>;

struct ExitError {
    int code;
    std::string message;
};

int exit_code_for(simpop_status status) {
    switch (status) {
    case SIMPOP_OK: return kExitOk;
    case SIMPOP_ERR_DIVERGENCE:
    case SIMPOP_ERR_DOMAIN: return kExitNumeric;
    case SIMPOP_ERR_INTERNAL: return kExitInternal;
    default: return kExitInput;
    }
}

void check(simpop_status status, const std::string& context) {
    if (status == SIMPOP_OK) return;
    std::string msg = context + ": " + simpop_last_error();
    throw ExitError{exit_code_for(status), msg};
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ExitError{kExitInput, "cannot open '" + path + "'"};
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 15];
    }
    return out;
}

/// One manifest per run, written next to the primary output.
class Manifest {
public:
    Manifest() : start_(std::chrono::steady_clock::now()) {}

    void command(const CLI::App& sub) {
        doc_["command"] = sub.get_name();
        json flags = json::object();
        for (const CLI::Option* opt : sub.get_options()) {
            if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
            json value;
            if (opt->get_expected_max() == 0) {
                value = opt->count() > 0 ? opt->as<bool>() : opt->get_default_str() == "true";
            } else if (opt->count() > 0) {
                const auto& r = opt->results();
                value = r.size() == 1 ? json(r.front()) : json(r);
            } else {
                value = opt->get_default_str();
            }
            flags[opt->get_single_name()] = value;
        }
        doc_["flags"] = flags;
    }
    void input(const std::string& path) {
        if (!path.empty()) inputs_[path] = sha256_file(path);
    }
    void output(const std::string& path) { outputs_.push_back(path); }
    void seed(std::uint64_t s) { seeds_.push_back(s); }
    void note(const std::string& key, json value) { extra_[key] = std::move(value); }

    void write(const std::string& primary) {
        doc_["seeds"] = seeds_;
        doc_["inputs"] = inputs_;
        doc_["outputs"] = outputs_;
        if (!extra_.empty()) doc_["result"] = extra_;
        doc_["version"] = simpop_version();
        doc_["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const std::string path = primary + ".manifest.json";
        std::ofstream out(path);
        if (!out) throw ExitError{kExitInput, "cannot write '" + path + "'"};
        out << doc_.dump(2) << '\n';
    }

private:
    std::chrono::steady_clock::time_point start_;
    json doc_ = json::object();
    json inputs_ = json::object();
    json extra_ = json::object();
    std::vector<std::string> outputs_;
    std::vector<std::uint64_t> seeds_;
};

simpop_role parse_role(const std::string& role) {
    return role == "test" ? SIMPOP_ROLE_TEST : SIMPOP_ROLE_TRAIN;
}

Corpus load_corpus(const std::string& path, const std::string& schema, simpop_role role, bool drop_invalid = false,
                   std::size_t* dropped = nullptr) {
    simpop_corpus* c = nullptr;
    check(simpop_corpus_load(path.c_str(), schema.empty() ? nullptr : schema.c_str(), role, drop_invalid ? 1 : 0,
                             &c, dropped),
          path);
    return Corpus(c);
}

Graph load_graph(const std::string& prefix) {
    simpop_graph* g = nullptr;
    const std::string pairs = prefix + ".pairs.tsv";
    const std::string pop = prefix + ".popularity.tsv";
    check(simpop_graph_load(pairs.c_str(), pop.c_str(), &g), prefix);
    return Graph(g);
}

Graph build_graph(const simpop_corpus* train, int min_sessions, int max_pairs) {
    simpop_graph* g = nullptr;
    check(simpop_graph_build(train, min_sessions, max_pairs, &g), "affinity graph");
    return Graph(g);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

// Flags record their default so the manifest can resolve them.
CLI::Option* add_bool_flag(CLI::App* app, const std::string& name, bool& target, const std::string& help) {
    return app->add_flag(name, target, help)->default_str(target ? "true" : "false");
}

// ---- shared flag groups --------------------------------------------------

struct FitFlags {
    int dim = 10;
    double alpha = 2.0;
    double lambda = 0.01;
    std::uint64_t seed = 1;
    double init_scale = 1.0;
    int max_iterations = 500;
    double tolerance = 1e-4;
    int memory = 10;
    int threads = 1;
    bool deterministic = true;
    bool zero_init = false;
    int min_sessions = 2;
    int max_pairs = 500;

    void add_to(CLI::App* app, bool with_grid_params) {
        if (with_grid_params) {
            app->add_option("--dim", dim, "Embedding dimension D")->capture_default_str();
            app->add_option("--alpha", alpha, "Model exponent alpha")->capture_default_str();
            app->add_option("--lambda", lambda, "L2 regularization weight")->capture_default_str();
            app->add_option("--seed", seed, "Seed for the random initialization")->capture_default_str();
        }
        app->add_option("--init-scale", init_scale, "Initial coordinates are uniform in [-s, s]")
            ->capture_default_str();
        app->add_option("--max-iter", max_iterations, "L-BFGS iteration cap")->capture_default_str();
        app->add_option("--tol", tolerance, "Stop when |grad| <= tol * |grad at start|")->capture_default_str();
        app->add_option("--memory", memory, "L-BFGS history length")->capture_default_str();
        app->add_option("--threads", threads, "Worker threads for the objective (env SIMPOP_THREADS)")
            ->envname("SIMPOP_THREADS")
            ->capture_default_str();
        add_bool_flag(app, "--deterministic,!--fast-reduction", deterministic,
                      "Bit-reproducible gradient reduction (default); --fast-reduction trades it for speed");
        add_bool_flag(app, "--zero-init", zero_init, "Start from all-zero coordinates");
        app->add_option("--min-sessions", min_sessions, "Items seen in fewer sessions get no pairs")
            ->capture_default_str();
        app->add_option("--max-pairs", max_pairs, "Strongest pairs kept per item, 0 keeps all")
            ->capture_default_str();
    }

    simpop_fit_config config() const {
        simpop_fit_config c;
        simpop_fit_config_init(&c);
        c.dim = dim;
        c.alpha = alpha;
        c.lambda = lambda;
        c.seed = seed;
        c.init_scale = init_scale;
        c.max_iterations = max_iterations;
        c.gradient_tolerance = tolerance;
        c.memory = memory;
        c.threads = threads;
        c.deterministic = deterministic ? 1 : 0;
        c.zero_init = zero_init ? 1 : 0;
        return c;
    }
};

struct RankerFlags {
    bool include_anchor = false;
    std::string anchor_mode = "global";
    bool clickout_only = false;
    std::size_t k = 100;

    void add_to(CLI::App* app) {
        add_bool_flag(app, "--include-anchor", include_anchor, "Keep the anchor item in the proposed ranking");
        app->add_option("--anchor-mode", anchor_mode, "Anchor choice for the proposed ranker")
            ->check(CLI::IsMember({"global", "session"}))
            ->capture_default_str();
        add_bool_flag(app, "--clickout-only", clickout_only, "KNN: previous item must come from a clickout");
        app->add_option("--k", k, "KNN neighbourhood size")->capture_default_str();
    }

    simpop_ranker_options options() const {
        simpop_ranker_options o;
        simpop_ranker_options_init(&o);
        o.include_anchor = include_anchor ? 1 : 0;
        o.session_frequency = anchor_mode == "session" ? 1 : 0;
        o.clickout_only = clickout_only ? 1 : 0;
        o.k = k;
        return o;
    }
};

// ---- ingest --------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string out;
    std::string schema;
    std::string role = "train";
    std::string truth;
    bool drop_invalid = false;
    bool keep_unbookable = false;
    bool truncate = false;
};

int run_ingest(const IngestArgs& a, Manifest& manifest) {
    manifest.input(a.input);
    std::size_t dropped_invalid = 0;
    Corpus corpus = load_corpus(a.input, a.schema, parse_role(a.role), a.drop_invalid, &dropped_invalid);
    std::size_t dropped_unbookable = 0;
    simpop_truth* truth_raw = nullptr;
    std::string truth_path;

    if (a.role == "train") {
        if (!a.keep_unbookable) {
            simpop_corpus* filtered = nullptr;
            check(simpop_corpus_filter_bookable(corpus.get(), &filtered, &dropped_unbookable), "filter");
            corpus.reset(filtered);
        }
    } else {
        if (a.truncate) {
            simpop_corpus* cut = nullptr;
            check(simpop_corpus_truncate_to_clickout(corpus.get(), &cut), "truncate");
            corpus.reset(cut);
        }
        simpop_corpus* hidden = nullptr;
        check(simpop_corpus_hide_targets(corpus.get(), &hidden, &truth_raw), "hide targets");
        corpus.reset(hidden);
    }
    Truth truth(truth_raw);

    check(simpop_corpus_save(corpus.get(), a.out.c_str()), a.out);
    manifest.output(a.out);
    if (truth) {
        truth_path = a.truth.empty() ? a.out + ".truth.tsv" : a.truth;
        check(simpop_truth_save(truth.get(), truth_path.c_str()), truth_path);
        manifest.output(truth_path);
    }
    const std::size_t sessions = simpop_corpus_session_count(corpus.get());
    const std::size_t items = simpop_corpus_item_count(corpus.get());
    std::cout << "sessions=" << sessions << " actions=" << simpop_corpus_action_count(corpus.get())
              << " items=" << items << " dropped_invalid=" << dropped_invalid
              << " dropped_unbookable=" << dropped_unbookable;
    if (truth) std::cout << " truth=" << simpop_truth_count(truth.get());
    std::cout << '\n';
    manifest.note("sessions", sessions);
    manifest.note("items", items);
    manifest.note("dropped_invalid", dropped_invalid);
    manifest.note("dropped_unbookable", dropped_unbookable);
    manifest.write(a.out);
    return kExitOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
    std::string corpus;
    std::string out;
    std::string schema;
    FitFlags fit;
};

int run_train(const TrainArgs& a, Manifest& manifest) {
    manifest.input(a.corpus);
    manifest.seed(a.fit.seed);
    Corpus corpus = load_corpus(a.corpus, a.schema, SIMPOP_ROLE_TRAIN);
    Graph graph = build_graph(corpus.get(), a.fit.min_sessions, a.fit.max_pairs);
    const std::string pairs = a.out + ".pairs.tsv";
    const std::string pop = a.out + ".popularity.tsv";
    check(simpop_graph_save(graph.get(), pairs.c_str(), pop.c_str()), "affinity artifacts");
    manifest.output(pairs);
    manifest.output(pop);

    const simpop_fit_config config = a.fit.config();
    simpop_model* model_raw = nullptr;
    simpop_trace* trace_raw = nullptr;
    const simpop_status status = simpop_fit(graph.get(), &config, &model_raw, &trace_raw);
    const std::string fit_error = status == SIMPOP_OK ? "" : simpop_last_error();
    Model model(model_raw);
    Trace trace(trace_raw);

    const std::string trace_path = a.out + ".trace.csv";
    if (trace) {
        check(simpop_trace_save(trace.get(), trace_path.c_str()), trace_path);
        manifest.output(trace_path);
        manifest.note("iterations", simpop_trace_iterations(trace.get()));
        manifest.note("stop", simpop_trace_stop_reason(trace.get()));
        manifest.note("objective", simpop_trace_final_objective(trace.get()));
        manifest.note("grad_norm", simpop_trace_final_grad_norm(trace.get()));
    }
    manifest.note("items", simpop_graph_item_count(graph.get()));
    manifest.note("pairs", simpop_graph_pair_count(graph.get()));
    if (status != SIMPOP_OK) {
        manifest.note("error", fit_error);
        manifest.write(a.out);
        throw ExitError{exit_code_for(status), "fit: " + fit_error};
    }

    check(simpop_model_save(model.get(), a.out.c_str()), a.out);
    manifest.output(a.out);
    std::cout << "items=" << simpop_graph_item_count(graph.get()) << " pairs=" << simpop_graph_pair_count(graph.get())
              << " iterations=" << simpop_trace_iterations(trace.get())
              << " stop=" << simpop_trace_stop_reason(trace.get())
              << " objective=" << fmt(simpop_trace_final_objective(trace.get())) << '\n';
    manifest.write(a.out);
    return kExitOk;
}

// ---- recommend -----------------------------------------------------------

struct RecommendArgs {
    std::string model;
    std::string graph;
    std::string session_file;
    std::string session_id;
    std::string candidates;
    std::string schema;
    std::size_t top = 10;
    std::string out;
    RankerFlags ranker;
};

int run_recommend(const RecommendArgs& a, Manifest& manifest) {
    manifest.input(a.model);
    manifest.input(a.session_file);
    simpop_model* m = nullptr;
    check(simpop_model_load(a.model.c_str(), &m), a.model);
    Model model(m);
    Graph graph;
    if (!a.graph.empty()) graph = load_graph(a.graph);
    const simpop_ranker_options opts = a.ranker.options();
    simpop_ranker* r = nullptr;
    check(simpop_ranker_proposed(model.get(), graph.get(), &opts, &r), "ranker");
    Ranker ranker(r);

    Corpus sessions;
    std::string session_id = a.session_id;
    if (!a.session_file.empty()) {
        sessions = load_corpus(a.session_file, a.schema, SIMPOP_ROLE_TRAIN);
        if (session_id.empty()) {
            if (simpop_corpus_session_count(sessions.get()) != 1) {
                throw ExitError{kExitInput, "session file holds " +
                                                std::to_string(simpop_corpus_session_count(sessions.get())) +
                                                " sessions; pick one with --session-id"};
            }
            session_id = simpop_corpus_session_id(sessions.get(), 0);
        }
    } else if (!session_id.empty()) {
        throw ExitError{kExitInput, "--session-id needs --session"};
    }

    const std::vector<std::string> cands = split_list(a.candidates, '|');
    std::vector<const char*> ptrs;
    for (const auto& c : cands) ptrs.push_back(c.c_str());
    const bool nearest = a.candidates.empty();
    simpop_ranked_list* l = nullptr;
    check(simpop_rank(ranker.get(), sessions.get(), session_id.empty() ? nullptr : session_id.c_str(),
                      nearest ? nullptr : ptrs.data(), ptrs.size(), nearest ? a.top : std::min(a.top, ptrs.size()),
                      &l),
          "rank");
    RankedList list(l);

    std::ostringstream text;
    text << "rank,item,score,anchor,fallback\n";
    const std::string anchor = simpop_ranked_list_anchor(list.get());
    const int fallback = simpop_ranked_list_fallback(list.get());
    for (std::size_t k = 0; k < simpop_ranked_list_size(list.get()); ++k) {
        text << k + 1 << ',' << simpop_ranked_list_item(list.get(), k) << ','
             << fmt(simpop_ranked_list_score(list.get(), k)) << ',' << anchor << ',' << fallback << '\n';
    }
    if (a.out.empty()) {
        std::cout << text.str();
        return kExitOk;
    }
    std::ofstream out(a.out);
    if (!out) throw ExitError{kExitInput, "cannot write '" + a.out + "'"};
    out << text.str();
    out.close();
    manifest.output(a.out);
    manifest.write(a.out);
    return kExitOk;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
    std::string ranker_name = "proposed";
    std::string model;
    std::string graph;
    std::string train;
    std::string metadata;
    std::string test;
    std::string truth;
    std::string out;
    std::string schema;
    std::string cutoffs = "1,3,5,10";
    std::uint64_t seed = 1;
    int threads = 1;
    int min_sessions = 2;
    int max_pairs = 500;
    RankerFlags ranker;
};

int run_evaluate(const EvaluateArgs& a, Manifest& manifest) {
    for (const auto* p : {&a.model, &a.train, &a.metadata, &a.test, &a.truth}) manifest.input(*p);
    if (!a.graph.empty()) {
        manifest.input(a.graph + ".pairs.tsv");
        manifest.input(a.graph + ".popularity.tsv");
    }
    simpop_truth* t = nullptr;
    check(simpop_truth_load(a.truth.c_str(), &t), a.truth);
    Truth truth(t);
    Corpus test = load_corpus(a.test, a.schema, SIMPOP_ROLE_TEST);

    const auto require = [](const std::string& value, const char* flag, const std::string& name) {
        if (value.empty()) throw ExitError{kExitInput, "ranker '" + name + "' needs " + flag};
    };
    Corpus train;
    Graph graph;
    const auto need_graph = [&] {
        if (!a.graph.empty()) {
            graph = load_graph(a.graph);
        } else if (!a.train.empty()) {
            train = load_corpus(a.train, a.schema, SIMPOP_ROLE_TRAIN);
            graph = build_graph(train.get(), a.min_sessions, a.max_pairs);
        }
    };

    const simpop_ranker_options opts = a.ranker.options();
    simpop_ranker* r = nullptr;
    const std::string& name = a.ranker_name;
    if (name == "proposed") {
        require(a.model, "--model", name);
        simpop_model* m = nullptr;
        check(simpop_model_load(a.model.c_str(), &m), a.model);
        Model model(m);
        need_graph();
        check(simpop_ranker_proposed(model.get(), graph.get(), &opts, &r), "ranker");
    } else if (name == "random") {
        manifest.seed(a.seed);
        check(simpop_ranker_random(a.seed, &r), "ranker");
    } else if (name == "ipop" || name == "icpop") {
        require(a.train, "--train", name);
        train = load_corpus(a.train, a.schema, SIMPOP_ROLE_TRAIN);
        check(name == "ipop" ? simpop_ranker_ipop(train.get(), &r) : simpop_ranker_icpop(train.get(), &r), "ranker");
    } else if (name == "icknn") {
        if (a.graph.empty()) require(a.train, "--graph or --train", name);
        need_graph();
        check(simpop_ranker_icknn(graph.get(), &opts, &r), "ranker");
    } else if (name == "imknn") {
        require(a.metadata, "--metadata", name);
        need_graph();
        check(simpop_ranker_imknn(a.metadata.c_str(), graph.get(), &opts, &r), "ranker");
    }
    Ranker ranker(r);

    std::vector<int> cutoffs;
    for (const auto& c : split_list(a.cutoffs, ',')) {
        int v = 0;
        const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
        if (res.ec != std::errc() || res.ptr != c.data() + c.size() || v <= 0) {
            throw ExitError{kExitInput, "bad cutoff '" + c + "'"};
        }
        cutoffs.push_back(v);
    }
    simpop_report* rep = nullptr;
    check(simpop_evaluate(ranker.get(), test.get(), truth.get(), cutoffs.data(), cutoffs.size(), a.threads, &rep),
          "evaluate");
    Report report(rep);
    if (name == "random") check(simpop_report_add_param(report.get(), "seed", std::to_string(a.seed).c_str()), "report");
    if (name == "proposed") {
        check(simpop_report_add_param(report.get(), "anchor_mode", a.ranker.anchor_mode.c_str()), "report");
        check(simpop_report_add_param(report.get(), "include_anchor", a.ranker.include_anchor ? "1" : "0"), "report");
    }
    if (name == "icknn" || name == "imknn") {
        check(simpop_report_add_param(report.get(), "k", std::to_string(a.ranker.k).c_str()), "report");
        check(simpop_report_add_param(report.get(), "clickout_only", a.ranker.clickout_only ? "1" : "0"), "report");
    }
    check(simpop_report_save(report.get(), a.out.c_str()), a.out);
    manifest.output(a.out);

    std::cout << "ranker=" << simpop_ranker_name(ranker.get()) << " sessions=" << simpop_report_session_count(report.get())
              << " skipped=" << simpop_report_skipped_count(report.get())
              << " MRR=" << fmt(simpop_report_mrr(report.get()));
    for (int c : cutoffs) std::cout << " MAP@" << c << '=' << fmt(simpop_report_map_at(report.get(), c));
    std::cout << '\n';
    manifest.note("mrr", simpop_report_mrr(report.get()));
    manifest.note("sessions", simpop_report_session_count(report.get()));
    manifest.write(a.out);
    return kExitOk;
}

// ---- gridsearch ----------------------------------------------------------

struct GridArgs {
    std::string train;
    std::string validation;
    std::string truth;
    std::string out;
    std::string schema;
    double holdout = 0.1;
    std::vector<int> dims{5, 10, 20};
    std::vector<double> lambdas{0.1, 0.01};
    std::vector<double> alphas{1, 2, 3};
    std::vector<std::uint64_t> seeds{1};
    int workers = 1;
    FitFlags fit;
    RankerFlags ranker;
};

int run_gridsearch(const GridArgs& a, Manifest& manifest) {
    for (const auto* p : {&a.train, &a.validation, &a.truth}) manifest.input(*p);
    for (auto s : a.seeds) manifest.seed(s);
    Corpus all = load_corpus(a.train, a.schema, SIMPOP_ROLE_TRAIN);
    Corpus train;
    Corpus validation;
    Truth truth;
    if (!a.validation.empty()) {
        if (a.truth.empty()) throw ExitError{kExitInput, "--validation needs --truth"};
        validation = load_corpus(a.validation, a.schema, SIMPOP_ROLE_TEST);
        simpop_truth* t = nullptr;
        check(simpop_truth_load(a.truth.c_str(), &t), a.truth);
        truth.reset(t);
        train = std::move(all);
    } else {
        simpop_corpus* tr = nullptr;
        simpop_corpus* va = nullptr;
        simpop_truth* t = nullptr;
        check(simpop_corpus_split_holdout(all.get(), a.holdout, &tr, &va, &t), "holdout split");
        train.reset(tr);
        validation.reset(va);
        truth.reset(t);
    }
    Graph graph = build_graph(train.get(), a.fit.min_sessions, a.fit.max_pairs);
    const simpop_fit_config base = a.fit.config();
    const simpop_ranker_options opts = a.ranker.options();
    simpop_grid_result* g = nullptr;
    check(simpop_grid_search(graph.get(), validation.get(), truth.get(), a.dims.data(), a.dims.size(),
                             a.lambdas.data(), a.lambdas.size(), a.alphas.data(), a.alphas.size(), &base,
                             a.seeds.data(), a.seeds.size(), a.workers, &opts, &g),
          "grid search");
    Grid grid(g);
    check(simpop_grid_save(grid.get(), a.out.c_str()), a.out);
    manifest.output(a.out);
    const std::size_t rows = simpop_grid_row_count(grid.get());
    const std::size_t failed = simpop_grid_failed_count(grid.get());
    manifest.note("rows", rows);
    manifest.note("failed", failed);
    manifest.note("validation_sessions", simpop_corpus_session_count(validation.get()));

    simpop_fit_config best = base;
    double mrr = 0.0;
    if (simpop_grid_best(grid.get(), &best, &mrr) != SIMPOP_OK) {
        manifest.write(a.out);
        throw ExitError{kExitNumeric, "every grid cell failed"};
    }
    manifest.note("best", json{{"dim", best.dim}, {"lambda", best.lambda}, {"alpha", best.alpha}, {"mrr", mrr}});
    std::cout << "rows=" << rows << " failed=" << failed << " best dim=" << best.dim << " lambda=" << fmt(best.lambda)
              << " alpha=" << fmt(best.alpha) << " MRR=" << fmt(mrr) << '\n';
    manifest.write(a.out);
    return kExitOk;
}

// ---- synth ---------------------------------------------------------------

struct SynthSessionArgs {
    simpop_sim_config sim{};
    std::string out;
    std::string planted;
    std::string metadata;
    std::string test_out;
    double holdout = 0.1;
    double cell = 2.0;
};

int run_synth_sessions(const SynthSessionArgs& a, Manifest& manifest) {
    manifest.seed(a.sim.seed);
    simpop_model* m = nullptr;
    simpop_corpus* c = nullptr;
    check(simpop_simulate(&a.sim, &m, &c), "simulate");
    Model model(m);
    Corpus corpus(c);
    if (!a.test_out.empty()) {
        simpop_corpus* tr = nullptr;
        simpop_corpus* te = nullptr;
        simpop_truth* t = nullptr;
        check(simpop_corpus_split_holdout(corpus.get(), a.holdout, &tr, &te, &t), "holdout split");
        corpus.reset(tr);
        Corpus test(te);
        Truth truth(t);
        const std::string truth_path = a.test_out + ".truth.tsv";
        check(simpop_corpus_save(test.get(), a.test_out.c_str()), a.test_out);
        check(simpop_truth_save(truth.get(), truth_path.c_str()), truth_path);
        manifest.output(a.test_out);
        manifest.output(truth_path);
    }
    check(simpop_corpus_save(corpus.get(), a.out.c_str()), a.out);
    manifest.output(a.out);
    if (!a.planted.empty()) {
        check(simpop_model_save(model.get(), a.planted.c_str()), a.planted);
        manifest.output(a.planted);
    }
    if (!a.metadata.empty()) {
        check(simpop_simulate_metadata(model.get(), a.cell, a.sim.seed, a.metadata.c_str()), a.metadata);
        manifest.output(a.metadata);
    }
    std::cout << "sessions=" << simpop_corpus_session_count(corpus.get())
              << " actions=" << simpop_corpus_action_count(corpus.get())
              << " items=" << simpop_corpus_item_count(corpus.get()) << '\n';
    manifest.write(a.out);
    return kExitOk;
}

struct SynthNetworkArgs {
    std::string model;
    std::string out;
    std::uint64_t seed = 1;
};

int run_synth_network(const SynthNetworkArgs& a, Manifest& manifest) {
    manifest.input(a.model);
    manifest.seed(a.seed);
    simpop_model* m = nullptr;
    check(simpop_model_load(a.model.c_str(), &m), a.model);
    Model model(m);
    std::size_t edges = 0;
    check(simpop_synthesize_network(model.get(), a.seed, a.out.c_str(), &edges), a.out);
    manifest.output(a.out);
    manifest.note("edges", edges);
    std::cout << "items=" << simpop_model_item_count(model.get()) << " edges=" << edges << '\n';
    manifest.write(a.out);
    return kExitOk;
}

struct SynthModelArgs {
    std::size_t n = 100;
    int dim = 2;
    double alpha = 2.0;
    double kappa_min = 1.0;
    double kappa_max = 10.0;
    double extent = 10.0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_synth_model(const SynthModelArgs& a, Manifest& manifest) {
    manifest.seed(a.seed);
    simpop_model* m = nullptr;
    check(simpop_model_plant(a.n, a.dim, a.alpha, a.kappa_min, a.kappa_max, a.extent, a.seed, &m), "plant");
    Model model(m);
    check(simpop_model_save(model.get(), a.out.c_str()), a.out);
    manifest.output(a.out);
    std::size_t checks = 0;
    std::size_t violations = 0;
    check(simpop_model_regime_check(model.get(), &checks, &violations), "regime check");
    manifest.note("regime_checks", checks);
    manifest.note("regime_violations", violations);
    std::cout << "items=" << simpop_model_item_count(model.get()) << " regime_checks=" << checks
              << " violations=" << violations << '\n';
    manifest.write(a.out);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simpop: sequence-aware recommendation with a similarity-popularity latent space"};
    app.set_version_flag("--version", std::string(simpop_version()));
    app.require_subcommand(1);
    Manifest manifest;
    std::function<int()> action;
    CLI::App* chosen = nullptr;
    const auto bind = [&](CLI::App* sub, auto fn) {
        sub->callback([&, sub, fn] {
            chosen = sub;
            action = fn;
        });
    };

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse a raw session log into the canonical corpus format");
    ingest_cmd->add_option("input", ingest.input, "Raw log (.csv or .csv.gz)")->required();
    ingest_cmd->add_option("-o,--out", ingest.out, "Canonical corpus output")->required();
    ingest_cmd->add_option("--schema", ingest.schema, "Column overrides, field=column,...");
    ingest_cmd->add_option("--role", ingest.role, "train keeps bookable sessions, test hides the final clickout")
        ->check(CLI::IsMember({"train", "test"}))
        ->capture_default_str();
    ingest_cmd->add_option("--truth", ingest.truth, "Truth output for --role test (default <out>.truth.tsv)");
    add_bool_flag(ingest_cmd, "--drop-invalid", ingest.drop_invalid, "Drop sessions that fail validation");
    add_bool_flag(ingest_cmd, "--keep-unbookable", ingest.keep_unbookable, "train: keep sessions without a clickout");
    add_bool_flag(ingest_cmd, "--truncate", ingest.truncate,
                         "test: cut each session after its last valid clickout before hiding it");
    bind(ingest_cmd, [&] { return run_ingest(ingest, manifest); });

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Build the affinity graph and fit the embedding");
    train_cmd->add_option("corpus", train.corpus, "Training corpus")->required();
    train_cmd->add_option("-o,--out", train.out,
                          "Model output; <out>.pairs.tsv, .popularity.tsv, .trace.csv sit next to it")
        ->required();
    train_cmd->add_option("--schema", train.schema, "Column overrides, field=column,...");
    train.fit.add_to(train_cmd, true);
    bind(train_cmd, [&] { return run_train(train, manifest); });

    RecommendArgs rec;
    auto* rec_cmd = app.add_subcommand("recommend", "Rank candidates for one session");
    rec_cmd->add_option("--model", rec.model, "Model file")->required();
    rec_cmd->add_option("--graph", rec.graph, "Artifact prefix with .popularity.tsv for unknown candidates");
    rec_cmd->add_option("--session", rec.session_file, "Session log holding the current session");
    rec_cmd->add_option("--session-id", rec.session_id, "Session to use when the file holds several");
    rec_cmd->add_option("--candidates", rec.candidates, "Pipe-separated candidates; omit for nearest items");
    rec_cmd->add_option("--top", rec.top, "Length of the output list")->capture_default_str();
    rec_cmd->add_option("--schema", rec.schema, "Column overrides, field=column,...");
    rec_cmd->add_option("-o,--out", rec.out, "Write the list here instead of standard output");
    rec.ranker.add_to(rec_cmd);
    bind(rec_cmd, [&] { return run_recommend(rec, manifest); });

    EvaluateArgs ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "Score a ranker on a hidden-target corpus");
    ev_cmd->add_option("--ranker", ev.ranker_name, "Ranker to evaluate")
        ->check(CLI::IsMember({"proposed", "random", "ipop", "icpop", "icknn", "imknn"}))
        ->capture_default_str();
    ev_cmd->add_option("--model", ev.model, "proposed: model file");
    ev_cmd->add_option("--graph", ev.graph, "Artifact prefix from train (pairs and popularity)");
    ev_cmd->add_option("--train", ev.train, "ipop/icpop: training corpus; knn: build the graph from it");
    ev_cmd->add_option("--metadata", ev.metadata, "imknn: item metadata file");
    ev_cmd->add_option("--test", ev.test, "Test corpus with hidden targets")->required();
    ev_cmd->add_option("--truth", ev.truth, "Truth file")->required();
    ev_cmd->add_option("-o,--out", ev.out, "Report output")->required();
    ev_cmd->add_option("--schema", ev.schema, "Column overrides, field=column,...");
    ev_cmd->add_option("--cutoffs", ev.cutoffs, "MAP cutoffs")->capture_default_str();
    ev_cmd->add_option("--seed", ev.seed, "random: seed")->capture_default_str();
    ev_cmd->add_option("--threads", ev.threads, "Worker threads (env SIMPOP_THREADS)")
        ->envname("SIMPOP_THREADS")
        ->capture_default_str();
    ev_cmd->add_option("--min-sessions", ev.min_sessions, "Graph built from --train: shared-session minimum")
        ->capture_default_str();
    ev_cmd->add_option("--max-pairs", ev.max_pairs, "Graph built from --train: pairs kept per item")
        ->capture_default_str();
    ev.ranker.add_to(ev_cmd);
    bind(ev_cmd, [&] { return run_evaluate(ev, manifest); });

    GridArgs grid;
    auto* grid_cmd = app.add_subcommand("gridsearch", "Tune D, lambda and alpha on a validation split");
    grid_cmd->add_option("train", grid.train, "Training corpus")->required();
    grid_cmd->add_option("-o,--out", grid.out, "Result table")->required();
    grid_cmd->add_option("--validation", grid.validation, "Validation corpus (default: hold out from train)");
    grid_cmd->add_option("--truth", grid.truth, "Truth for --validation");
    grid_cmd->add_option("--holdout", grid.holdout, "Latest fraction of train held out")->capture_default_str();
    grid_cmd->add_option("--dims", grid.dims, "Candidate D values")->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--lambdas", grid.lambdas, "Candidate lambda values")->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--alphas", grid.alphas, "Candidate alpha values")->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--seeds", grid.seeds, "Initialization seeds averaged per cell")
        ->delimiter(',')
        ->capture_default_str();
    grid_cmd->add_option("--workers", grid.workers, "Cells fitted in parallel")->capture_default_str();
    grid_cmd->add_option("--schema", grid.schema, "Column overrides, field=column,...");
    grid.fit.add_to(grid_cmd, false);
    grid.ranker.add_to(grid_cmd);
    bind(grid_cmd, [&] { return run_gridsearch(grid, manifest); });

    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic models, networks and sessions");
    synth_cmd->require_subcommand(1);

    SynthSessionArgs ss;
    simpop_sim_config_init(&ss.sim);
    auto* ss_cmd = synth_cmd->add_subcommand("sessions", "Session log drawn from a planted model");
    ss_cmd->add_option("-o,--out", ss.out, "Session log output")->required();
    ss_cmd->add_option("--items", ss.sim.n_items, "Planted items")->capture_default_str();
    ss_cmd->add_option("--sessions", ss.sim.n_sessions, "Sessions to draw")->capture_default_str();
    ss_cmd->add_option("--dim", ss.sim.dim, "Planted dimension")->capture_default_str();
    ss_cmd->add_option("--alpha", ss.sim.alpha, "Planted alpha")->capture_default_str();
    ss_cmd->add_option("--kappa-min", ss.sim.kappa_min, "Smallest hidden degree")->capture_default_str();
    ss_cmd->add_option("--kappa-max", ss.sim.kappa_max, "Largest hidden degree")->capture_default_str();
    ss_cmd->add_option("--extent", ss.sim.extent, "Coordinates uniform in [-extent, extent]")->capture_default_str();
    ss_cmd->add_option("--min-actions", ss.sim.min_actions, "Fewest actions before the final clickout")
        ->capture_default_str();
    ss_cmd->add_option("--max-actions", ss.sim.max_actions, "Most actions before the final clickout")
        ->capture_default_str();
    ss_cmd->add_option("--impressions", ss.sim.impressions, "Impression list length")->capture_default_str();
    ss_cmd->add_option("--seed", ss.sim.seed, "Seed")->capture_default_str();
    ss_cmd->add_option("--planted", ss.planted, "Also write the planted model");
    ss_cmd->add_option("--metadata", ss.metadata, "Also write item metadata");
    ss_cmd->add_option("--test-out", ss.test_out,
                       "Hold out the latest sessions as a hidden-target test set (truth in <test-out>.truth.tsv)");
    ss_cmd->add_option("--holdout", ss.holdout, "Fraction held out for --test-out")->capture_default_str();
    ss_cmd->add_option("--cell", ss.cell, "Metadata cell width")->capture_default_str();
    bind(ss_cmd, [&] { return run_synth_sessions(ss, manifest); });

    SynthNetworkArgs sn;
    auto* sn_cmd = synth_cmd->add_subcommand("network", "Bernoulli edge list from a model");
    sn_cmd->add_option("--model", sn.model, "Model file")->required();
    sn_cmd->add_option("-o,--out", sn.out, "Edge list output")->required();
    sn_cmd->add_option("--seed", sn.seed, "Seed")->capture_default_str();
    bind(sn_cmd, [&] { return run_synth_network(sn, manifest); });

    SynthModelArgs sm;
    auto* sm_cmd = synth_cmd->add_subcommand("model", "Random planted model");
    sm_cmd->add_option("-o,--out", sm.out, "Model output")->required();
    sm_cmd->add_option("--items", sm.n, "Items")->capture_default_str();
    sm_cmd->add_option("--dim", sm.dim, "Dimension")->capture_default_str();
    sm_cmd->add_option("--alpha", sm.alpha, "Alpha")->capture_default_str();
    sm_cmd->add_option("--kappa-min", sm.kappa_min, "Smallest hidden degree")->capture_default_str();
    sm_cmd->add_option("--kappa-max", sm.kappa_max, "Largest hidden degree")->capture_default_str();
    sm_cmd->add_option("--extent", sm.extent, "Coordinates uniform in [-extent, extent]")->capture_default_str();
    sm_cmd->add_option("--seed", sm.seed, "Seed")->capture_default_str();
    bind(sm_cmd, [&] { return run_synth_model(sm, manifest); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }
    if (!action) return kExitInput;
    try {
        manifest.command(*chosen);
        return action();
    } catch (const ExitError& e) {
        std::cerr << "simpop: " << e.message << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "simpop: " << e.what() << '\n';
        return kExitInternal;
    }
}
