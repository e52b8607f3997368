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

#include "simpop/session_store.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simpop {

/// Hidden degree per item. Every stored value is >= 1.
class PopularityTable {
public:
    void set(const std::string& item, double kappa);
    std::optional<double> find(const std::string& item) const;
    double kappa_or(const std::string& item, double fallback) const;
    bool contains(const std::string& item) const { return kappa_.count(item) != 0; }
    std::size_t size() const noexcept { return kappa_.size(); }
    bool empty() const noexcept { return kappa_.empty(); }
    /// Entries sorted by item id.
    std::vector<std::pair<std::string, double>> sorted() const;

private:
    std::unordered_map<std::string, double> kappa_;
};

/// kappa_i = number of actions referencing i, floored at 1 for every item
/// of the vocabulary (impression-only items get exactly 1).
PopularityTable compute_popularity(const SessionCorpus& corpus);

/// Raw (unfloored) reference counts; clickout actions only when requested.
std::unordered_map<std::string, std::size_t> interaction_counts(const SessionCorpus& corpus,
                                                                bool clickouts_only);

/// item -> ids of the sessions referencing it (binary incidence).
using Incidence = std::unordered_map<std::string, std::set<std::string>>;
Incidence build_incidence(const SessionCorpus& corpus);

/// |S_i ∩ S_j| / sqrt(|S_i| |S_j|).
double cosine_cooccurrence(const Incidence& incidence, const std::string& i, const std::string& j);

struct AffinityOptions {
    int min_sessions = 2;
    /// 0 keeps every pair.
    int max_pairs_per_item = 500;
};

struct AffinityPair {
    std::string i;
    std::string j;
    double p = 0.0;

    bool operator==(const AffinityPair&) const = default;
};

/// Sparse symmetric item graph with connection-probability estimates.
class AffinityGraph {
public:
    struct Neighbor {
        std::uint32_t item;
        double p;
    };

    AffinityGraph() = default;
    /// Each unordered pair must appear once; throws ValidationError on self
    /// pairs, duplicates or p outside (0, 1].
    AffinityGraph(std::vector<AffinityPair> pairs, PopularityTable popularity);

    std::size_t n_items() const noexcept { return items_.size(); }
    std::size_t pair_count() const noexcept { return neighbors_.size() / 2; }
    bool empty() const noexcept { return neighbors_.empty(); }
    /// Items with at least one pair, sorted.
    std::span<const std::string> items() const noexcept { return items_; }
    std::optional<std::uint32_t> index_of(const std::string& item) const;
    /// Sorted by decreasing p, then by item id.
    std::span<const Neighbor> neighbors(std::uint32_t item) const;
    std::optional<double> lookup(const std::string& i, const std::string& j) const;
    /// One entry per unordered pair with i < j, sorted.
    std::vector<AffinityPair> pairs() const;
    const PopularityTable& popularity() const noexcept { return popularity_; }

private:
    std::vector<std::string> items_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::size_t> offsets_;
    std::vector<Neighbor> neighbors_;
    PopularityTable popularity_;
};

/// Builds P from session co-occurrence through an inverted index. Items in
/// fewer than `min_sessions` sessions are left out; with a pair cap, a pair
/// survives when it is in the top list of either endpoint.
AffinityGraph build_affinity_graph(const SessionCorpus& corpus, const AffinityOptions& options = {});

std::string serialize_pairs(const AffinityGraph& graph);
std::string serialize_popularity(const PopularityTable& popularity);
PopularityTable parse_popularity(std::string_view text);
AffinityGraph parse_graph(std::string_view pairs_text, std::string_view popularity_text);

} // namespace simpop
