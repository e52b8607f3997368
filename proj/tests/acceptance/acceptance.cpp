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

// Acceptance checks, one line per criterion:
//   simpop_acceptance [--criterion N] [--cli PATH] [--proxy]
// Exit status 0 when every selected criterion passes, 77 when the selected
// criteria could not be evaluated (missing dataset), 1 otherwise.
//
// Criteria 5 and 6 need the public Trivago session log: set
// SIMPOP_TRIVAGO_DIR to a directory holding train.csv and item_metadata.csv.

#include "support/fixtures.hpp"

#include "simpop/affinity.hpp"
#include "simpop/baselines.hpp"
#include "simpop/embedder.hpp"
#include "simpop/errors.hpp"
#include "simpop/evaluator.hpp"
#include "simpop/hms_model.hpp"
#include "simpop/recommender.hpp"
#include "simpop/session_store.hpp"
#include "simpop/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace simpop;
using namespace simpop::testing;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, NotRun };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

struct Options {
    std::string cli;
    bool proxy = false;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

Verdict verdict(bool ok, std::string detail) {
    return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)};
}

// ---- 1: gradient against central differences ---------------------------

Verdict gradient_check(const Options&) {
    constexpr double kTolerance = 1e-5;
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    Stopwatch clock;
    for (int instance = 0; instance < 20; ++instance) {
        const int n = 2 + static_cast<int>(rng() % 9);
        const int dim = 1 + static_cast<int>(rng() % 3);
        const double lambda = instance % 2 ? 0.01 : 0.0;
        std::uniform_real_distribution<double> coord(-2.0, 2.0), target(0.1, 5.0);
        std::vector<double> x(static_cast<std::size_t>(n * dim));
        for (double& v : x) v = coord(rng);
        std::vector<FlatPair> pairs;
        std::vector<Target> targets;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng() % 3 == 0 && !(i == 0 && j == 1)) continue;
                const double d2 = target(rng);
                pairs.push_back({i, j, d2});
                targets.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), d2});
            }
        }
        const StressObjective f(static_cast<std::size_t>(n), dim, targets, lambda);
        std::vector<double> g(x.size());
        f.evaluate(x, g);
        const auto fd = finite_difference_gradient(x, dim, pairs, lambda);
        double num = 0, den = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            num += (g[k] - fd[k]) * (g[k] - fd[k]);
            den += fd[k] * fd[k];
        }
        worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-300));
    }
    const double t = clock.seconds();
    return verdict(worst < kTolerance && t < 5.0, "20 instances, max relative error " + fmt(worst) +
                                                      " (tol 1e-5), " + fmt(t, 3) + " s (budget 5 s)");
}

// ---- 2: probability -> distance -> probability --------------------------

Verdict round_trip(const Options&) {
    constexpr double kTolerance = 1e-12;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> log_p(std::log(1e-6), 0.0), log_k(0.0, std::log(100.0)),
        alpha(0.5, 4.0);
    double worst = 0.0;
    Stopwatch clock;
    for (int k = 0; k < 1000; ++k) {
        const double p = k == 0 ? 1.0 : std::exp(log_p(rng));
        const double ki = std::exp(log_k(rng)), kj = std::exp(log_k(rng)), a = alpha(rng);
        const double d2 = derive_squared_distance(p, ki, kj, a);
        worst = std::max(worst, relative_error(connection_probability(d2, ki, kj, a), p));
    }
    const double t = clock.seconds();
    return verdict(worst < kTolerance && t < 1.0,
                   "1000 tuples, max relative error " + fmt(worst) + " (tol 1e-12), " + fmt(t, 3) + " s");
}

// ---- 3: recovery of a planted embedding --------------------------------

Verdict recovery(const Options&) {
    constexpr double kTolerance = 0.01;
    Stopwatch clock;
    const ModelParams params{2.0, 2, 0.0};
    const EmbeddingModel planted = plant_model(30, params, 1.0, 10.0, 5.0, 99);
    EmbeddingProblem problem;
    for (std::uint32_t i = 0; i < planted.size(); ++i) {
        problem.ids.push_back(planted.id(i));
        problem.kappa.push_back(planted.kappa(i));
    }
    std::vector<double> truth;
    for (std::uint32_t i = 0; i < planted.size(); ++i) {
        for (std::uint32_t j = i + 1; j < planted.size(); ++j) {
            const double p = connection_probability(planted, i, j);
            problem.targets.push_back({i, j, derive_squared_distance(p, planted.kappa(i), planted.kappa(j), 2.0)});
            truth.push_back(squared_distance(planted.coords(i), planted.coords(j)));
        }
    }
    // Restarts guard against the occasional folded local minimum; the fit
    // with the lowest stress is kept.
    double best_objective = std::numeric_limits<double>::infinity();
    double best_median = 1.0;
    int restarts = 0;
    for (std::uint64_t seed = 1; seed <= 5 && best_median >= kTolerance; ++seed, ++restarts) {
        FitConfig cfg;
        cfg.params = params;
        cfg.seed = seed;
        cfg.max_iterations = 5000;
        cfg.gradient_tolerance = 1e-12;
        const FitResult fit = fit_embedding(problem, cfg);
        const double obj = fit.trace.iterations.back().objective;
        std::vector<double> errors;
        std::size_t k = 0;
        for (std::uint32_t i = 0; i < fit.model.size(); ++i) {
            for (std::uint32_t j = i + 1; j < fit.model.size(); ++j, ++k) {
                errors.push_back(relative_error(squared_distance(fit.model.coords(i), fit.model.coords(j)), truth[k]));
            }
        }
        std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
        if (obj < best_objective) {
            best_objective = obj;
            best_median = errors[errors.size() / 2];
        }
    }
    const double t = clock.seconds();
    return verdict(best_median < kTolerance && t < 30.0,
                   "30 items, 435 pairs, median relative error " + fmt(best_median) + " (tol 0.01), " +
                       std::to_string(restarts) + " fit(s), " + fmt(t, 3) + " s (budget 30 s)");
}

// ---- 4: metric oracles --------------------------------------------------

class TableRanker final : public Ranker {
public:
    explicit TableRanker(std::map<std::string, std::vector<std::string>> lists) : lists_(std::move(lists)) {}
    std::string name() const override { return "table"; }
    RankedList rank(std::span<const Action> s, std::span<const std::string>, std::size_t) const override {
        RankedList out;
        for (const auto& i : lists_.at(s.front().session_id)) out.items.push_back({i, 0.0});
        return out;
    }

private:
    std::map<std::string, std::vector<std::string>> lists_;
};

Verdict metric_oracles(const Options&) {
    std::vector<Session> sessions;
    for (const auto* id : {"a", "b", "c"}) {
        sessions.push_back(make_session(id, {view("x"), click("t", "t|x|y|z|w|v")}));
    }
    const auto hidden = hide_test_targets(SessionCorpus(CorpusRole::Test, sessions));
    // truth "t" at ranks 1, 4 and absent
    const TableRanker table({{"a", {"t", "x", "y"}}, {"b", {"x", "y", "z", "t", "w"}}, {"c", {"x", "y"}}});
    const auto r = evaluate(table, hidden.corpus, hidden.truth);
    const double mrr = (1.0 + 0.25 + 0.0) / 3.0;
    const std::map<int, double> map{{1, (1.0 / 1) / 3}, {3, (1.0 / 3) / 3}, {5, (2.0 / 5) / 3}, {10, (2.0 / 10) / 3}};
    bool exact = std::abs(r.mrr - mrr) <= 1e-15;
    for (const auto& [n, v] : map) exact = exact && std::abs(r.map_at.at(n) - v) <= 1e-15;

    std::mt19937_64 rng(5);
    std::vector<Session> random_sessions;
    std::string imps;
    for (int k = 0; k < 25; ++k) imps += (k ? "|" : "") + std::string("c") + std::to_string(k);
    for (int k = 0; k < 10000; ++k) {
        const std::string target = "c" + std::to_string(rng() % 25);
        random_sessions.push_back(make_session("r" + std::to_string(k), {view("c0"), click(target, imps)}));
    }
    const auto test = hide_test_targets(SessionCorpus(CorpusRole::Test, std::move(random_sessions)));
    const double random_mrr = evaluate(RandomRanker(17), test.corpus, test.truth).mrr;
    const double expected = harmonic_mrr(25);
    const bool near = std::abs(random_mrr - expected) <= 0.01;
    return verdict(exact && near, std::string("hand fixture ") + (exact ? "exact" : "MISMATCH") + " (MRR " +
                                      fmt(r.mrr) + "); random MRR " + fmt(random_mrr) + " vs " + fmt(expected) +
                                      " (tol 0.01, 10000 sessions)");
}

// ---- 5, 6: Trivago ------------------------------------------------------

struct Dataset {
    SessionCorpus train;
    HiddenTargets test;
    ItemMetadata metadata;
};

std::optional<fs::path> trivago_dir() {
    const char* dir = std::getenv("SIMPOP_TRIVAGO_DIR");
    if (!dir || !fs::exists(fs::path(dir) / "train.csv")) return std::nullopt;
    return fs::path(dir);
}

/// Sessions grouped by length; each stratum keeps the given fraction of its
/// sessions, chosen by a seeded shuffle.
SessionCorpus stratified_subsample(const SessionCorpus& corpus, double fraction, std::uint64_t seed) {
    std::map<std::size_t, std::vector<const Session*>> strata;
    for (const Session& s : corpus.sessions()) strata[s.actions.size()].push_back(&s);
    std::mt19937_64 rng(seed);
    std::vector<Session> kept;
    for (auto& [length, members] : strata) {
        std::shuffle(members.begin(), members.end(), rng);
        const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
        for (std::size_t k = 0; k < take; ++k) kept.push_back(*members[k]);
    }
    return SessionCorpus(CorpusRole::Train, std::move(kept));
}

Dataset load_trivago(const fs::path& dir, double fraction) {
    ParseOptions opt;
    opt.drop_invalid_sessions = true;
    const SessionCorpus full = load_session_log((dir / "train.csv").string(), Schema{}, CorpusRole::Train, opt);
    const SessionCorpus sample = filter_bookable_sessions(stratified_subsample(full, fraction, 1)).corpus;
    HoldoutSplit split = split_holdout(sample, 0.1);
    Dataset d{std::move(split.train), std::move(split.validation), {}};
    const fs::path meta = dir / "item_metadata.csv";
    if (fs::exists(meta)) {
        std::ifstream in(meta, std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        d.metadata = parse_item_metadata(text.str());
    }
    return d;
}

std::map<std::string, double> method_mrr(const Dataset& d, const FitConfig& cfg) {
    const AffinityGraph graph = build_affinity_graph(d.train);
    FitResult fit = fit_embedding(graph, cfg);
    std::map<std::string, double> mrr;
    const auto run = [&](const Ranker& r) { mrr[r.name()] = evaluate(r, d.test.corpus, d.test.truth).mrr; };
    run(ProposedRanker(std::move(fit.model), graph.popularity()));
    run(CooccurrenceKnnRanker(graph, 100));
    run(MetadataKnnRanker(d.metadata, graph.popularity(), 100));
    run(icpop_ranker(d.train));
    run(ipop_ranker(d.train));
    run(RandomRanker(1));
    return mrr;
}

std::pair<bool, std::string> check_ordering(const std::map<std::string, double>& m) {
    const bool order = m.at("proposed") > m.at("icknn") && m.at("icknn") >= m.at("imknn") &&
                       m.at("imknn") > m.at("icpop") && m.at("icpop") > m.at("ipop") && m.at("ipop") > m.at("random");
    const double gap = m.at("proposed") - m.at("random");
    std::string text;
    for (const auto* name : {"proposed", "icknn", "imknn", "icpop", "ipop", "random"}) {
        text += std::string(text.empty() ? "" : " ") + name + "=" + fmt(m.at(name), 3);
    }
    return {order && gap >= 0.3, text + ", gap " + fmt(gap, 3) + " (need >= 0.3)"};
}

/// Labelled stand-in used when the public log is absent. Never counts as a pass.
Dataset synthetic_dataset(std::size_t sessions) {
    SimulationConfig cfg;
    cfg.n_items = 300;
    cfg.n_sessions = sessions;
    cfg.kappa_max = 5.0;
    cfg.extent = 20.0;
    cfg.seed = 11;
    const SimulatedData data = simulate_sessions(cfg);
    HoldoutSplit split = split_holdout(data.sessions, 0.1);
    return {std::move(split.train), std::move(split.validation),
            parse_item_metadata(simulate_metadata(data.planted, 2.0, 11))};
}

Verdict trivago_ordering(const Options& opt) {
    const auto dir = trivago_dir();
    if (!dir) {
        std::string detail = "SIMPOP_TRIVAGO_DIR not set or lacks train.csv; the public session log is required";
        if (opt.proxy) {
            const auto [ok, text] = check_ordering(method_mrr(synthetic_dataset(3000), FitConfig{}));
            detail += "; synthetic proxy (not the criterion): " + text + (ok ? " [ordering holds]" : " [ordering fails]");
        }
        return {Outcome::NotRun, detail};
    }
    Stopwatch clock;
    const Dataset d = load_trivago(*dir, 0.05);
    if (d.metadata.empty()) return {Outcome::NotRun, "item_metadata.csv missing; IM-KNN cannot be evaluated"};
    const auto [ok, text] = check_ordering(method_mrr(d, FitConfig{}));
    const double t = clock.seconds();
    return verdict(ok && t < 7200.0, "5% stratified subsample, " + std::to_string(d.test.truth.size()) +
                                         " test sessions: " + text + ", " + fmt(t, 4) + " s (budget 7200 s)");
}

Verdict grid_protocol(const Options& opt) {
    const auto dir = trivago_dir();
    const auto run_grid = [](const Dataset& d) {
        GridOptions go;
        return grid_search(d.train, d.test.corpus, d.test.truth, GridSpec{}, go);
    };
    const auto describe = [](const GridResult& r) {
        const auto failed = std::count_if(r.rows.begin(), r.rows.end(), [](const GridRow& g) { return g.failed; });
        std::string best = r.best ? "best D=" + std::to_string(r.rows[*r.best].params.dim) +
                                        " lambda=" + fmt(r.rows[*r.best].params.lambda) +
                                        " alpha=" + fmt(r.rows[*r.best].params.alpha) +
                                        " MRR=" + fmt(r.rows[*r.best].mrr, 3)
                                  : "no best cell";
        return std::make_pair(r.rows.size() == 18 && failed == 0,
                              std::to_string(r.rows.size()) + " rows, " + std::to_string(failed) + " failed, " + best);
    };
    if (!dir) {
        std::string detail = "SIMPOP_TRIVAGO_DIR not set or lacks train.csv; the public session log is required";
        if (opt.proxy) {
            Stopwatch clock;
            const auto [ok, text] = describe(run_grid(synthetic_dataset(2000)));
            detail += "; synthetic proxy (not the criterion): " + text + ", " + fmt(clock.seconds(), 3) + " s";
        }
        return {Outcome::NotRun, detail};
    }
    Stopwatch clock;
    const auto [ok, text] = describe(run_grid(load_trivago(*dir, 0.005)));
    const double t = clock.seconds();
    return verdict(ok && t < 3600.0, "0.5% subsample: " + text + ", " + fmt(t, 4) + " s (budget 3600 s)");
}

// ---- 7: zero initialization --------------------------------------------

Verdict zero_init(const Options&) {
    SimulationConfig sc;
    sc.n_items = 80;
    sc.n_sessions = 400;
    sc.impressions = 10;
    const AffinityGraph graph = build_affinity_graph(simulate_sessions(sc).sessions);
    FitConfig cfg;
    cfg.initialization = Initialization::Zero;
    const FitResult zero = fit_embedding(graph, cfg);
    const bool stalled = zero.trace.stop == StopReason::StationaryStart && zero.trace.iterations_used == 0 &&
                         zero.trace.final_grad_norm == 0.0;
    int moved = 0;
    constexpr int kSeeds = 10;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        FitConfig rc;
        rc.seed = seed;
        rc.max_iterations = 5;
        const FitResult r = fit_embedding(graph, rc);
        moved += r.trace.stop != StopReason::StationaryStart && r.trace.iterations_used > 0 &&
                 r.trace.iterations.front().grad_norm > 0.0;
    }
    return verdict(stalled && moved == kSeeds,
                   std::string("zero start: stop=") + to_string(zero.trace.stop) + " iterations=" +
                       std::to_string(zero.trace.iterations_used) + " grad=" + fmt(zero.trace.final_grad_norm) +
                       "; random start left the origin in " + std::to_string(moved) + "/" +
                       std::to_string(kSeeds) + " seeds");
}

// ---- 8: byte-identical reruns through the CLI --------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism(const Options& opt) {
    if (opt.cli.empty()) return {Outcome::NotRun, "no --cli path given"};
    const fs::path dir = fs::temp_directory_path() / ("simpop_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto p = [&](const std::string& name) { return (dir / name).string(); };
    const auto sh = [&](const std::string& args) {
        const int status = std::system((opt.cli + " " + args + " >/dev/null 2>>" + p("stderr")).c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            throw std::runtime_error("command failed: simpop " + args + "\n" + slurp(p("stderr")));
        }
    };
    Verdict v{Outcome::Fail, ""};
    try {
        sh("synth sessions --items 120 --sessions 800 --seed 4 -o " + p("train.csv") + " --test-out " +
           p("test.csv") + " --holdout 0.1");
        for (const auto* run : {"a", "b"}) {
            const std::string m = p(std::string("model_") + run + ".tsv");
            sh("train " + p("train.csv") + " --seed 9 --deterministic -o " + m);
            sh("evaluate --ranker proposed --model " + m + " --graph " + m + " --test " + p("test.csv") +
               " --truth " + p("test.csv.truth.tsv") + " -o " + p(std::string("report_") + run + ".csv"));
        }
        const bool model_same = slurp(p("model_a.tsv")) == slurp(p("model_b.tsv"));
        const bool report_same = slurp(p("report_a.csv")) == slurp(p("report_b.csv"));
        v = verdict(model_same && report_same, std::string("model files ") + (model_same ? "identical" : "DIFFER") +
                                                   ", reports " + (report_same ? "identical" : "DIFFER"));
    } catch (const std::exception& e) {
        v.detail = e.what();
    }
    fs::remove_all(dir);
    return v;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Verdict(const Options&)> run;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simpop acceptance checks"};
    int only = 0;
    Options opt;
    app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
    app.add_option("--cli", opt.cli, "Path of the simpop command-line tool");
    app.add_flag("--proxy", opt.proxy, "Print synthetic stand-in results for criteria that need the dataset");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "gradient matches central differences", gradient_check},
        {2, "probability/distance round trip", round_trip},
        {3, "planted embedding recovery", recovery},
        {4, "metric oracles", metric_oracles},
        {5, "method ordering on the Trivago subsample", trivago_ordering},
        {6, "18-cell grid search", grid_protocol},
        {7, "degenerate zero initialization", zero_init},
        {8, "deterministic train and evaluate", determinism},
    };
    int passed = 0, failed = 0, not_run = 0;
    for (const auto& c : criteria) {
        if (only && c.id != only) continue;
        Verdict v;
        try {
            v = c.run(opt);
        } catch (const std::exception& e) {
            v = {Outcome::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "NOT RUN";
        std::cout << "criterion " << c.id << " " << tag << ": " << c.title << " - " << v.detail << std::endl;
        (v.outcome == Outcome::Pass ? passed : v.outcome == Outcome::Fail ? failed : not_run)++;
    }
    if (failed) return 1;
    if (not_run && !passed) return 77;
    return 0;
}
