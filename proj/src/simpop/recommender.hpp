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
#include "simpop/hms_model.hpp"
#include "simpop/session_store.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simpop {

struct ScoredItem {
    std::string item;
    double score;

    bool operator==(const ScoredItem&) const = default;
};

struct RankedList {
    std::vector<ScoredItem> items;
    std::string anchor;
    bool fallback_used = false;

    std::size_t size() const noexcept { return items.size(); }
    bool empty() const noexcept { return items.empty(); }
    /// 1-based position of `item`, if present.
    std::optional<std::size_t> position(const std::string& item) const;
};

/// Common interface of the proposed method and the baselines. Rankers are
/// immutable; `rank` may be called concurrently.
class Ranker {
public:
    virtual ~Ranker() = default;
    virtual std::string name() const = 0;
    /// Orders (a subset of) `candidates` for the active session, at most t.
    virtual RankedList rank(std::span<const Action> session, std::span<const std::string> candidates,
                            std::size_t t) const = 0;
};

/// Ranks `candidates` by decreasing popularity (missing items count 0),
/// ties by id. Duplicates keep their first occurrence.
RankedList popularity_order(std::span<const std::string> candidates, std::size_t t,
                            const std::function<double(const std::string&)>& popularity);

enum class AnchorMode {
    GlobalPopularity, ///< highest kappa among the session's items
    SessionFrequency, ///< most interactions within the session
};

/// Most popular known item of the session; ties go to the most recent
/// interaction, then to the smaller id. Throws NoAnchorError.
std::string anchor_item(std::span<const Action> session, const PopularityTable& popularity,
                        AnchorMode mode = AnchorMode::GlobalPopularity);
std::string anchor_item(std::span<const Action> session, const EmbeddingModel& model,
                        AnchorMode mode = AnchorMode::GlobalPopularity);

struct RankOptions {
    /// Drop the anchor from the output (no self-recommendation). When false
    /// it scores p = 1 like any coincident item.
    bool exclude_anchor = true;
};

/// Scores each candidate by its connection probability to `anchor`. Ties go
/// to the higher kappa, then the smaller id. Candidates missing from the
/// model score 0 and follow, ordered by `fallback_popularity` (nullptr: all
/// zero). Throws MissingItemError if the anchor is not in the model.
RankedList rank_candidates(const EmbeddingModel& model, const std::string& anchor,
                           std::span<const std::string> candidates, std::size_t t,
                           const PopularityTable* fallback_popularity = nullptr, const RankOptions& options = {});

struct RecommendOptions {
    AnchorMode anchor_mode = AnchorMode::GlobalPopularity;
    RankOptions rank;
};

/// Impression reranking when `candidates` is given, otherwise the t items of
/// the model with the highest connection probability to the anchor. Without
/// an anchor the candidates (or the model's items) are ordered by
/// popularity and `fallback_used` is set.
RankedList recommend(const EmbeddingModel& model, std::span<const Action> session,
                     const std::vector<std::string>* candidates, std::size_t t,
                     const PopularityTable* popularity = nullptr, const RecommendOptions& options = {});

/// The proposed method behind the Ranker interface.
class ProposedRanker final : public Ranker {
public:
    /// An empty popularity table falls back to the model's own kappa.
    ProposedRanker(EmbeddingModel model, PopularityTable popularity, RecommendOptions options = {});

    std::string name() const override { return "proposed"; }
    RankedList rank(std::span<const Action> session, std::span<const std::string> candidates,
                    std::size_t t) const override;
    const EmbeddingModel& model() const noexcept { return model_; }
    const PopularityTable& popularity() const noexcept { return popularity_; }
    const RecommendOptions& options() const noexcept { return options_; }

private:
    EmbeddingModel model_;
    PopularityTable popularity_;
    RecommendOptions options_;
};

} // namespace simpop
