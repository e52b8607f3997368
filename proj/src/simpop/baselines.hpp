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
#include "simpop/recommender.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simpop {

/// Uniform random permutation. The generator is re-seeded per call from the
/// ranker seed and the (session id, candidates) key, so identical inputs get
/// identical permutations and concurrent calls do not share state.
class RandomRanker final : public Ranker {
public:
    explicit RandomRanker(std::uint64_t seed) : seed_(seed) {}
    std::string name() const override { return "random"; }
    RankedList rank(std::span<const Action> session, std::span<const std::string> candidates,
                    std::size_t t) const override;

private:
    std::uint64_t seed_;
};

/// Orders candidates by a fixed per-item count (I-POP / IC-POP).
class PopularityRanker final : public Ranker {
public:
    PopularityRanker(std::string name, std::unordered_map<std::string, std::size_t> counts)
        : name_(std::move(name)), counts_(std::move(counts)) {}
    std::string name() const override { return name_; }
    RankedList rank(std::span<const Action> session, std::span<const std::string> candidates,
                    std::size_t t) const override;
    std::size_t count(const std::string& item) const;

private:
    std::string name_;
    std::unordered_map<std::string, std::size_t> counts_;
};

/// Counts every item-referencing action.
PopularityRanker ipop_ranker(const SessionCorpus& train);
/// Counts clickout actions only.
PopularityRanker icpop_ranker(const SessionCorpus& train);

enum class PreviousItem {
    AnyAction,     ///< most recent action with a known item, any kind
    ClickoutOnly,  ///< most recent clickout with a known item
};

/// Most recent item of the session accepted by `known`.
std::optional<std::string> previous_item(std::span<const Action> session, PreviousItem mode,
                                         const std::function<bool(const std::string&)>& known);

/// IC-KNN: co-occurrence cosine to the previous item, restricted to that
/// item's k strongest neighbours in P. The previous item itself scores 1.
class CooccurrenceKnnRanker final : public Ranker {
public:
    CooccurrenceKnnRanker(AffinityGraph graph, std::size_t k, PreviousItem mode = PreviousItem::AnyAction);
    std::string name() const override { return "icknn"; }
    RankedList rank(std::span<const Action> session, std::span<const std::string> candidates,
                    std::size_t t) const override;

private:
    AffinityGraph graph_;
    std::size_t k_;
    PreviousItem mode_;
};

using ItemMetadata = std::unordered_map<std::string, std::vector<std::string>>;

/// `item_id<TAB>prop|prop|...`; properties are sorted and deduplicated.
ItemMetadata parse_item_metadata(std::string_view text);
/// Cosine of binary property vectors; 0 when either set is empty.
double metadata_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// IM-KNN: metadata cosine to the previous item. Among the candidates only
/// the k most similar keep their score; the rest fall to popularity order.
class MetadataKnnRanker final : public Ranker {
public:
    MetadataKnnRanker(ItemMetadata metadata, PopularityTable popularity, std::size_t k,
                      PreviousItem mode = PreviousItem::AnyAction);
    std::string name() const override { return "imknn"; }
    RankedList rank(std::span<const Action> session, std::span<const std::string> candidates,
                    std::size_t t) const override;

private:
    ItemMetadata metadata_;
    PopularityTable popularity_;
    std::size_t k_;
    PreviousItem mode_;
};

} // namespace simpop
