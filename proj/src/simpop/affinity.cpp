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

#include "simpop/affinity.hpp"

#include "simpop/errors.hpp"
#include "simpop/text_io.hpp"

#include <algorithm>
#include <cmath>

namespace simpop {

void PopularityTable::set(const std::string& item, double kappa) {
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
        throw InvalidArgument("popularity of '" + item + "' must be a finite value >= 1");
    }
    kappa_[item] = kappa;
}

std::optional<double> PopularityTable::find(const std::string& item) const {
    const auto it = kappa_.find(item);
    if (it == kappa_.end()) return std::nullopt;
    return it->second;
}

double PopularityTable::kappa_or(const std::string& item, double fallback) const {
    const auto it = kappa_.find(item);
    return it == kappa_.end() ? fallback : it->second;
}

std::vector<std::pair<std::string, double>> PopularityTable::sorted() const {
    std::vector<std::pair<std::string, double>> out(kappa_.begin(), kappa_.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::unordered_map<std::string, std::size_t> interaction_counts(const SessionCorpus& corpus,
                                                                bool clickouts_only) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const Session& s : corpus.sessions()) {
        for (const Action& a : s.actions) {
            if (clickouts_only && !a.is_clickout()) continue;
            if (auto item = a.item()) ++counts[std::string(*item)];
        }
    }
    return counts;
}

PopularityTable compute_popularity(const SessionCorpus& corpus) {
    const auto counts = interaction_counts(corpus, false);
    PopularityTable table;
    for (const std::string& item : corpus.vocabulary()) {
        const auto it = counts.find(item);
        const std::size_t c = it == counts.end() ? 0 : it->second;
        table.set(item, std::max<double>(1.0, static_cast<double>(c)));
    }
    return table;
}

Incidence build_incidence(const SessionCorpus& corpus) {
    Incidence incidence;
    for (const Session& s : corpus.sessions()) {
        for (const Action& a : s.actions) {
            if (auto item = a.item()) incidence[std::string(*item)].insert(s.id);
        }
    }
    return incidence;
}

double cosine_cooccurrence(const Incidence& incidence, const std::string& i, const std::string& j) {
    if (i == j) throw InvalidArgument("cosine_cooccurrence needs two distinct items");
    const auto a = incidence.find(i);
    const auto b = incidence.find(j);
    if (a == incidence.end() || a->second.empty()) {
        throw UndefinedSimilarity("item '" + i + "' occurs in no session");
    }
    if (b == incidence.end() || b->second.empty()) {
        throw UndefinedSimilarity("item '" + j + "' occurs in no session");
    }
    std::size_t common = 0;
    auto x = a->second.begin();
    auto y = b->second.begin();
    while (x != a->second.end() && y != b->second.end()) {
        if (*x < *y) ++x;
        else if (*y < *x) ++y;
        else {
            ++common;
            ++x;
            ++y;
        }
    }
    return static_cast<double>(common) /
           std::sqrt(static_cast<double>(a->second.size()) * static_cast<double>(b->second.size()));
}

AffinityGraph::AffinityGraph(std::vector<AffinityPair> pairs, PopularityTable popularity)
    : popularity_(std::move(popularity)) {
    std::set<std::string> names;
    for (auto& pr : pairs) {
        if (pr.i == pr.j) throw ValidationError("self pair for item '" + pr.i + "'");
        if (!(pr.p > 0.0 && pr.p <= 1.0)) {
            throw ValidationError("pair (" + pr.i + ", " + pr.j + ") has p outside (0, 1]");
        }
        if (pr.j < pr.i) std::swap(pr.i, pr.j);
        names.insert(pr.i);
        names.insert(pr.j);
    }
    items_.assign(names.begin(), names.end());
    index_.reserve(items_.size());
    for (std::uint32_t k = 0; k < items_.size(); ++k) index_.emplace(items_[k], k);

    std::vector<std::vector<Neighbor>> adj(items_.size());
    for (const auto& pr : pairs) {
        const auto a = index_.at(pr.i);
        const auto b = index_.at(pr.j);
        adj[a].push_back({b, pr.p});
        adj[b].push_back({a, pr.p});
    }
    offsets_.assign(items_.size() + 1, 0);
    for (std::size_t k = 0; k < adj.size(); ++k) {
        auto& row = adj[k];
        std::sort(row.begin(), row.end(), [](const Neighbor& x, const Neighbor& y) { return x.item < y.item; });
        for (std::size_t r = 1; r < row.size(); ++r) {
            if (row[r].item == row[r - 1].item) {
                throw ValidationError("duplicate pair (" + items_[k] + ", " + items_[row[r].item] + ")");
            }
        }
        std::sort(row.begin(), row.end(), [](const Neighbor& x, const Neighbor& y) {
            return x.p != y.p ? x.p > y.p : x.item < y.item;
        });
        offsets_[k + 1] = offsets_[k] + row.size();
    }
    neighbors_.reserve(offsets_.back());
    for (auto& row : adj) neighbors_.insert(neighbors_.end(), row.begin(), row.end());
}

std::optional<std::uint32_t> AffinityGraph::index_of(const std::string& item) const {
    const auto it = index_.find(item);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const AffinityGraph::Neighbor> AffinityGraph::neighbors(std::uint32_t item) const {
    return std::span<const Neighbor>(neighbors_).subspan(offsets_[item], offsets_[item + 1] - offsets_[item]);
}

std::optional<double> AffinityGraph::lookup(const std::string& i, const std::string& j) const {
    const auto a = index_of(i);
    const auto b = index_of(j);
    if (!a || !b) return std::nullopt;
    for (const Neighbor& n : neighbors(*a)) {
        if (n.item == *b) return n.p;
    }
    return std::nullopt;
}

std::vector<AffinityPair> AffinityGraph::pairs() const {
    std::vector<AffinityPair> out;
    out.reserve(pair_count());
    for (std::uint32_t a = 0; a < items_.size(); ++a) {
        for (const Neighbor& n : neighbors(a)) {
            if (a < n.item) out.push_back({items_[a], items_[n.item], n.p});
        }
    }
    std::sort(out.begin(), out.end(), [](const AffinityPair& x, const AffinityPair& y) {
        return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    return out;
}

AffinityGraph build_affinity_graph(const SessionCorpus& corpus, const AffinityOptions& options) {
    if (options.min_sessions < 1) throw InvalidArgument("min_sessions must be >= 1");
    if (options.max_pairs_per_item < 0) throw InvalidArgument("max_pairs_per_item must be >= 0");

    const auto vocab = corpus.vocabulary();
    std::unordered_map<std::string, std::uint32_t> index;
    index.reserve(vocab.size());
    for (std::uint32_t k = 0; k < vocab.size(); ++k) index.emplace(vocab[k], k);

    // Inverted index: session -> distinct items, item -> sessions.
    std::vector<std::vector<std::uint32_t>> session_items;
    session_items.reserve(corpus.size());
    std::vector<std::vector<std::uint32_t>> item_sessions(vocab.size());
    for (const Session& s : corpus.sessions()) {
        std::vector<std::uint32_t> items;
        for (const Action& a : s.actions) {
            if (auto item = a.item()) items.push_back(index.at(std::string(*item)));
        }
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        const auto sid = static_cast<std::uint32_t>(session_items.size());
        for (auto it : items) item_sessions[it].push_back(sid);
        session_items.push_back(std::move(items));
    }
    const auto min_sessions = static_cast<std::size_t>(options.min_sessions);
    const auto eligible = [&](std::uint32_t item) { return item_sessions[item].size() >= min_sessions; };

    std::vector<std::uint32_t> counter(vocab.size(), 0);
    std::vector<std::uint32_t> touched;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> kept; // (lo, hi) index pairs
    std::vector<AffinityGraph::Neighbor> row;
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
        if (!eligible(i)) continue;
        touched.clear();
        for (auto sid : item_sessions[i]) {
            for (auto j : session_items[sid]) {
                if (j == i || !eligible(j)) continue;
                if (counter[j]++ == 0) touched.push_back(j);
            }
        }
        row.clear();
        const double ni = static_cast<double>(item_sessions[i].size());
        for (auto j : touched) {
            const double nj = static_cast<double>(item_sessions[j].size());
            row.push_back({j, static_cast<double>(counter[j]) / std::sqrt(ni * nj)});
            counter[j] = 0;
        }
        std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) {
            return x.p != y.p ? x.p > y.p : x.item < y.item;
        });
        if (options.max_pairs_per_item > 0 && row.size() > static_cast<std::size_t>(options.max_pairs_per_item)) {
            row.resize(static_cast<std::size_t>(options.max_pairs_per_item));
        }
        for (const auto& n : row) kept.emplace_back(std::min(i, n.item), std::max(i, n.item));
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());

    // Recompute p for the union; an endpoint may have pruned the pair.
    std::vector<AffinityPair> pairs;
    pairs.reserve(kept.size());
    for (const auto& [a, b] : kept) {
        const auto& sa = item_sessions[a];
        const auto& sb = item_sessions[b];
        std::size_t common = 0;
        for (std::size_t x = 0, y = 0; x < sa.size() && y < sb.size();) {
            if (sa[x] < sb[y]) ++x;
            else if (sb[y] < sa[x]) ++y;
            else {
                ++common;
                ++x;
                ++y;
            }
        }
        const double p = static_cast<double>(common) /
                         std::sqrt(static_cast<double>(sa.size()) * static_cast<double>(sb.size()));
        pairs.push_back({vocab[a], vocab[b], std::min(1.0, p)});
    }
    return AffinityGraph(std::move(pairs), compute_popularity(corpus));
}

std::string serialize_pairs(const AffinityGraph& graph) {
    std::string out;
    for (const auto& pr : graph.pairs()) {
        out += pr.i;
        out += '\t';
        out += pr.j;
        out += '\t';
        out += text::format_double(pr.p);
        out += '\n';
    }
    return out;
}

std::string serialize_popularity(const PopularityTable& popularity) {
    std::string out;
    for (const auto& [item, kappa] : popularity.sorted()) {
        out += item;
        out += '\t';
        out += text::format_double(kappa);
        out += '\n';
    }
    return out;
}

PopularityTable parse_popularity(std::string_view content) {
    PopularityTable table;
    text::LineCursor cursor(content);
    std::string_view line;
    while (cursor.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 2) throw ParseError(cursor.line_number(), "expected item<TAB>kappa");
        const auto kappa = text::parse_double(f[1]);
        if (!kappa || *kappa < 1.0) throw ParseError(cursor.line_number(), "kappa must be a number >= 1");
        table.set(f[0], *kappa);
    }
    return table;
}

AffinityGraph parse_graph(std::string_view pairs_text, std::string_view popularity_text) {
    std::vector<AffinityPair> pairs;
    text::LineCursor cursor(pairs_text);
    std::string_view line;
    while (cursor.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 3) throw ParseError(cursor.line_number(), "expected i<TAB>j<TAB>p");
        const auto p = text::parse_double(f[2]);
        if (!p) throw ParseError(cursor.line_number(), "p is not a number");
        pairs.push_back({f[0], f[1], *p});
    }
    return AffinityGraph(std::move(pairs), parse_popularity(popularity_text));
}

} // namespace simpop
