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

#pragma once

#include "simpop/affinity.hpp"
#include "simpop/embedder.hpp"
#include "simpop/recommender.hpp"
#include "simpop/session_store.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace simpop {

/// 1 / position of `truth`, 0 when it is not listed. Throws InvalidArgument
/// on an empty list.
double reciprocal_rank(const RankedList& ranked, const std::string& truth);

/// Top(s, n) / n: 1/n when `truth` is within the first n entries, else 0.
double map_at_n(const RankedList& ranked, const std::string& truth, int n);

inline const std::vector<int> kDefaultCutoffs = {1, 3, 5, 10};

struct SessionResult {
    std::string session_id;
    std::optional<std::size_t> rank; ///< nullopt: truth not in the list
    std::size_t list_length = 0;
};

struct EvalReport {
    std::string ranker;
    std::vector<SessionResult> sessions;
    double mrr = 0.0;
    std::map<int, double> map_at;
    std::size_t session_count = 0;
    std::vector<std::string> skipped; ///< sessions without impressions or truth
    std::vector<std::pair<std::string, std::string>> params;
};

struct EvalOptions {
    std::vector<int> cutoffs = kDefaultCutoffs;
    int threads = 1;
};

/// Reranks each hidden session's final impression list and averages RR and
/// MAP@N over the evaluated sessions.
EvalReport evaluate(const Ranker& ranker, const SessionCorpus& test, const TruthMap& truth,
                    const EvalOptions& options = {});

/// Per-session `session_id,rank` block, then a summary block with
/// `method,MRR,MAP@1,...`, then `key,value` metadata rows.
std::string serialize_report(const EvalReport& report);

struct GridSpec {
    std::vector<int> dims = {5, 10, 20};
    std::vector<double> lambdas = {0.1, 0.01};
    std::vector<double> alphas = {1.0, 2.0, 3.0};

    std::size_t size() const noexcept { return dims.size() * lambdas.size() * alphas.size(); }
};

struct GridRow {
    ModelParams params;
    double mrr = 0.0; ///< mean over seeds
    bool failed = false;
    std::string error;
    double mean_objective = 0.0;
    double mean_iterations = 0.0;
};

struct GridResult {
    std::vector<GridRow> rows; ///< dims-major, then lambdas, then alphas
    std::optional<std::size_t> best;
    FitConfig best_config;
};

struct GridOptions {
    FitConfig base;          ///< params are overwritten per cell
    std::vector<std::uint64_t> seeds = {1};
    int workers = 1;
    RecommendOptions recommend;
};

/// Fits one embedding per cell and seed and scores MRR on the validation
/// sessions. A diverging fit marks its cell failed. The best cell maximises
/// MRR; ties go to smaller D, then larger lambda, then smaller alpha.
GridResult grid_search(const AffinityGraph& graph, const SessionCorpus& validation, const TruthMap& truth,
                       const GridSpec& grid, const GridOptions& options);
/// Same, building P from `train`; rejects overlapping session ids.
GridResult grid_search(const SessionCorpus& train, const SessionCorpus& validation, const TruthMap& truth,
                       const GridSpec& grid, const GridOptions& options, const AffinityOptions& affinity = {});

/// `dim,lambda,alpha,mrr,status,mean_objective,mean_iterations`, plus a
/// `best` marker column.
std::string serialize_grid(const GridResult& result);

} // namespace simpop
