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

#include "simpop/evaluator.hpp"

#include "simpop/errors.hpp"
#include "simpop/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_set>

namespace simpop {

double reciprocal_rank(const RankedList& ranked, const std::string& truth) {
    if (ranked.empty()) throw InvalidArgument("reciprocal_rank needs a non-empty list");
    const auto pos = ranked.position(truth);
    return pos ? 1.0 / static_cast<double>(*pos) : 0.0;
}

double map_at_n(const RankedList& ranked, const std::string& truth, int n) {
    if (n < 1) throw InvalidArgument("cutoff must be >= 1");
    const auto pos = ranked.position(truth);
    return pos && *pos <= static_cast<std::size_t>(n) ? 1.0 / n : 0.0;
}

namespace {

template <typename Body>
void parallel_for(int threads, std::size_t tasks, Body&& body) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), std::max<std::size_t>(tasks, 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < tasks; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k; (k = next.fetch_add(1)) < tasks;) body(k);
        });
    }
}

} // namespace

EvalReport evaluate(const Ranker& ranker, const SessionCorpus& test, const TruthMap& truth,
                    const EvalOptions& options) {
    for (int n : options.cutoffs) {
        if (n < 1) throw InvalidArgument("cutoff must be >= 1");
    }
    const auto sessions = test.sessions();
    std::vector<std::optional<SessionResult>> results(sessions.size());
    parallel_for(options.threads, sessions.size(), [&](std::size_t k) {
        const Session& s = sessions[k];
        const Action& last = s.actions.back();
        const auto t = truth.find(s.id);
        if (!last.is_clickout() || last.impressions.empty() || t == truth.end()) return;
        const RankedList ranked = ranker.rank(session_context(s), last.impressions, last.impressions.size());
        results[k] = SessionResult{s.id, ranked.position(t->second), ranked.size()};
    });

    EvalReport report;
    report.ranker = ranker.name();
    double rr_sum = 0.0;
    std::map<int, double> hits;
    for (int n : options.cutoffs) hits[n] = 0.0;
    for (std::size_t k = 0; k < sessions.size(); ++k) {
        if (!results[k]) {
            report.skipped.push_back(sessions[k].id);
            continue;
        }
        const SessionResult& r = *results[k];
        if (r.rank) {
            rr_sum += 1.0 / static_cast<double>(*r.rank);
            for (auto& [n, h] : hits) {
                if (*r.rank <= static_cast<std::size_t>(n)) h += 1.0;
            }
        }
        report.sessions.push_back(r);
    }
    report.session_count = report.sessions.size();
    if (report.session_count > 0) {
        const auto count = static_cast<double>(report.session_count);
        report.mrr = rr_sum / count;
        for (const auto& [n, h] : hits) report.map_at[n] = h / count / n;
    } else {
        for (const auto& [n, h] : hits) report.map_at[n] = 0.0;
    }
    return report;
}

std::string serialize_report(const EvalReport& report) {
    std::string out = "session_id,rank\n";
    for (const auto& s : report.sessions) {
        out += text::csv_escape(s.session_id);
        out += ',';
        out += s.rank ? std::to_string(*s.rank) : std::string("miss");
        out += '\n';
    }
    out += "\nmethod,MRR";
    for (const auto& [n, v] : report.map_at) out += ",MAP@" + std::to_string(n);
    out += '\n';
    out += text::csv_escape(report.ranker);
    out += ',';
    out += text::format_double(report.mrr);
    for (const auto& [n, v] : report.map_at) out += ',' + text::format_double(v);
    out += "\n\nkey,value\n";
    out += "sessions," + std::to_string(report.session_count) + '\n';
    out += "skipped," + std::to_string(report.skipped.size()) + '\n';
    for (const auto& [k, v] : report.params) out += text::csv_escape(k) + ',' + text::csv_escape(v) + '\n';
    return out;
}

GridResult grid_search(const AffinityGraph& graph, const SessionCorpus& validation, const TruthMap& truth,
                       const GridSpec& grid, const GridOptions& options) {
    if (grid.size() == 0) throw InvalidArgument("empty grid");
    if (options.seeds.empty()) throw InvalidArgument("grid search needs at least one seed");
    GridResult result;
    for (int d : grid.dims) {
        for (double l : grid.lambdas) {
            for (double a : grid.alphas) {
                GridRow row;
                row.params = ModelParams{a, d, l};
                row.params.validate();
                result.rows.push_back(row);
            }
        }
    }
    const PopularityTable& popularity = graph.popularity();
    parallel_for(options.workers, result.rows.size(), [&](std::size_t c) {
        GridRow& row = result.rows[c];
        double mrr = 0.0, obj = 0.0, iters = 0.0;
        for (auto seed : options.seeds) {
            FitConfig cfg = options.base;
            cfg.params = row.params;
            cfg.seed = seed;
            try {
                FitResult fit = fit_embedding(graph, cfg);
                obj += fit.trace.iterations.back().objective;
                iters += fit.trace.iterations_used;
                const ProposedRanker ranker(std::move(fit.model), popularity, options.recommend);
                mrr += evaluate(ranker, validation, truth).mrr;
            } catch (const DivergenceError& e) {
                row.failed = true;
                row.error = e.what();
                return;
            }
        }
        const auto n = static_cast<double>(options.seeds.size());
        row.mrr = mrr / n;
        row.mean_objective = obj / n;
        row.mean_iterations = iters / n;
    });

    for (std::size_t c = 0; c < result.rows.size(); ++c) {
        const GridRow& row = result.rows[c];
        if (row.failed) continue;
        if (!result.best) {
            result.best = c;
            continue;
        }
        const GridRow& b = result.rows[*result.best];
        bool better;
        if (row.mrr != b.mrr) better = row.mrr > b.mrr;
        else if (row.params.dim != b.params.dim) better = row.params.dim < b.params.dim;
        else if (row.params.lambda != b.params.lambda) better = row.params.lambda > b.params.lambda;
        else better = row.params.alpha < b.params.alpha;
        if (better) result.best = c;
    }
    result.best_config = options.base;
    if (result.best) result.best_config.params = result.rows[*result.best].params;
    return result;
}

GridResult grid_search(const SessionCorpus& train, const SessionCorpus& validation, const TruthMap& truth,
                       const GridSpec& grid, const GridOptions& options, const AffinityOptions& affinity) {
    for (const Session& s : validation.sessions()) {
        if (train.find(s.id)) throw InvalidArgument("validation session '" + s.id + "' also appears in train");
    }
    return grid_search(build_affinity_graph(train, affinity), validation, truth, grid, options);
}

std::string serialize_grid(const GridResult& result) {
    std::string out = "dim,lambda,alpha,mrr,status,mean_objective,mean_iterations,best\n";
    for (std::size_t c = 0; c < result.rows.size(); ++c) {
        const GridRow& r = result.rows[c];
        out += std::to_string(r.params.dim) + ',' + text::format_double(r.params.lambda) + ',' +
               text::format_double(r.params.alpha) + ',' + text::format_double(r.mrr) + ',' +
               (r.failed ? "failed" : "ok") + ',' + text::format_double(r.mean_objective) + ',' +
               text::format_double(r.mean_iterations) + ',' + (result.best && *result.best == c ? "1" : "0") + '\n';
    }
    return out;
}

} // namespace simpop
