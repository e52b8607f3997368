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

#include "simpop/baselines.hpp"

#include "simpop/errors.hpp"
#include "simpop/rng.hpp"
#include "simpop/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace simpop {

namespace {

std::vector<std::string> unique_list(std::span<const std::string> candidates) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& c : candidates) {
        if (seen.insert(c).second) out.push_back(c);
    }
    return out;
}

struct Scored {
    double score;
    double popularity;
    std::string id;
};

bool scored_before(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.popularity != b.popularity) return a.popularity > b.popularity;
    return a.id < b.id;
}

RankedList order_scored(std::vector<Scored> scored, std::size_t t) {
    std::sort(scored.begin(), scored.end(), scored_before);
    RankedList out;
    const std::size_t n = std::min(t, scored.size());
    for (std::size_t k = 0; k < n; ++k) out.items.push_back({std::move(scored[k].id), scored[k].score});
    return out;
}

void require_t(std::size_t t) {
    if (t == 0) throw InvalidArgument("t must be >= 1");
}

} // namespace

RankedList RandomRanker::rank(std::span<const Action> session, std::span<const std::string> candidates,
                              std::size_t t) const {
    require_t(t);
    std::vector<std::string> items = unique_list(candidates);
    std::uint64_t key = fnv1a64(session.empty() ? std::string_view() : std::string_view(session.front().session_id));
    for (const auto& c : items) key = fnv1a64(c, fnv1a64("|", key));
    Rng rng(mix_seed(seed_, key));
    for (std::size_t k = items.size(); k > 1; --k) {
        std::swap(items[k - 1], items[uniform_index(rng, k)]);
    }
    RankedList out;
    const std::size_t n = std::min(t, items.size());
    for (std::size_t k = 0; k < n; ++k) {
        out.items.push_back({std::move(items[k]), static_cast<double>(items.size() - k) / static_cast<double>(items.size())});
    }
    return out;
}

std::size_t PopularityRanker::count(const std::string& item) const {
    const auto it = counts_.find(item);
    return it == counts_.end() ? 0 : it->second;
}

RankedList PopularityRanker::rank(std::span<const Action>, std::span<const std::string> candidates,
                                  std::size_t t) const {
    require_t(t);
    return popularity_order(candidates, t, [&](const std::string& id) { return static_cast<double>(count(id)); });
}

PopularityRanker ipop_ranker(const SessionCorpus& train) {
    return PopularityRanker("ipop", interaction_counts(train, false));
}

PopularityRanker icpop_ranker(const SessionCorpus& train) {
    return PopularityRanker("icpop", interaction_counts(train, true));
}

std::optional<std::string> previous_item(std::span<const Action> session, PreviousItem mode,
                                         const std::function<bool(const std::string&)>& known) {
    for (std::size_t k = session.size(); k-- > 0;) {
        const Action& a = session[k];
        if (mode == PreviousItem::ClickoutOnly && !a.is_clickout()) continue;
        const auto item = a.item();
        if (!item) continue;
        std::string id(*item);
        if (known(id)) return id;
    }
    return std::nullopt;
}

CooccurrenceKnnRanker::CooccurrenceKnnRanker(AffinityGraph graph, std::size_t k, PreviousItem mode)
    : graph_(std::move(graph)), k_(k), mode_(mode) {
    if (k_ == 0) throw InvalidArgument("k must be >= 1");
}

RankedList CooccurrenceKnnRanker::rank(std::span<const Action> session, std::span<const std::string> candidates,
                                       std::size_t t) const {
    require_t(t);
    const auto& pop = graph_.popularity();
    const auto prev = previous_item(session, mode_, [&](const std::string& id) { return pop.contains(id); });
    if (!prev) {
        RankedList out = popularity_order(candidates, t, [&](const std::string& id) { return pop.kappa_or(id, 0.0); });
        out.fallback_used = true;
        return out;
    }
    std::unordered_map<std::string, double> sim;
    if (const auto idx = graph_.index_of(*prev)) {
        const auto nbrs = graph_.neighbors(*idx);
        const std::size_t n = std::min(k_, nbrs.size());
        for (std::size_t r = 0; r < n; ++r) sim.emplace(graph_.items()[nbrs[r].item], nbrs[r].p);
    }
    std::vector<Scored> scored;
    for (auto& c : unique_list(candidates)) {
        double s = 0.0;
        if (c == *prev) s = 1.0;
        else if (const auto it = sim.find(c); it != sim.end()) s = it->second;
        scored.push_back({s, pop.kappa_or(c, 0.0), std::move(c)});
    }
    RankedList out = order_scored(std::move(scored), t);
    out.anchor = *prev;
    return out;
}

ItemMetadata parse_item_metadata(std::string_view content) {
    ItemMetadata meta;
    text::LineCursor cursor(content);
    std::string_view line;
    bool csv = false;
    std::vector<std::string> fields;
    while (cursor.next(line)) {
        if (text::trim(line).empty()) continue;
        // The public dataset ships metadata as `item_id,properties` CSV.
        if (cursor.line_number() == 1 && text::trim(line) == "item_id,properties") {
            csv = true;
            continue;
        }
        std::string id;
        std::string_view rest;
        if (csv) {
            if (!text::split_csv(line, fields) || fields.size() != 2) {
                throw ParseError(cursor.line_number(), "expected item_id,properties");
            }
            id = text::trim(fields[0]);
            rest = fields[1];
        } else {
            const auto tab = line.find('\t');
            if (tab == std::string_view::npos) throw ParseError(cursor.line_number(), "expected item_id<TAB>properties");
            id = text::trim(line.substr(0, tab));
            rest = line.substr(tab + 1);
        }
        std::vector<std::string> props;
        if (!text::trim(rest).empty()) {
            for (auto& p : text::split(rest, '|')) {
                if (!p.empty()) props.push_back(std::move(p));
            }
        }
        std::sort(props.begin(), props.end());
        props.erase(std::unique(props.begin(), props.end()), props.end());
        if (!meta.emplace(std::move(id), std::move(props)).second) {
            throw ParseError(cursor.line_number(), "duplicate item in metadata");
        }
    }
    return meta;
}

double metadata_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t common = 0;
    for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
        if (a[x] < b[y]) ++x;
        else if (b[y] < a[x]) ++y;
        else {
            ++common;
            ++x;
            ++y;
        }
    }
    return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

MetadataKnnRanker::MetadataKnnRanker(ItemMetadata metadata, PopularityTable popularity, std::size_t k,
                                     PreviousItem mode)
    : metadata_(std::move(metadata)), popularity_(std::move(popularity)), k_(k), mode_(mode) {
    if (k_ == 0) throw InvalidArgument("k must be >= 1");
}

RankedList MetadataKnnRanker::rank(std::span<const Action> session, std::span<const std::string> candidates,
                                   std::size_t t) const {
    require_t(t);
    const auto prev =
        previous_item(session, mode_, [&](const std::string& id) { return metadata_.count(id) != 0; });
    if (!prev) {
        RankedList out =
            popularity_order(candidates, t, [&](const std::string& id) { return popularity_.kappa_or(id, 0.0); });
        out.fallback_used = true;
        return out;
    }
    const auto& anchor_props = metadata_.at(*prev);
    std::vector<Scored> scored;
    for (auto& c : unique_list(candidates)) {
        const auto it = metadata_.find(c);
        const double s = it == metadata_.end() ? 0.0 : metadata_cosine(anchor_props, it->second);
        scored.push_back({s, popularity_.kappa_or(c, 0.0), std::move(c)});
    }
    if (scored.size() > k_) {
        std::sort(scored.begin(), scored.end(), scored_before);
        for (std::size_t r = k_; r < scored.size(); ++r) scored[r].score = 0.0;
    }
    RankedList out = order_scored(std::move(scored), t);
    out.anchor = *prev;
    return out;
}

} // namespace simpop
