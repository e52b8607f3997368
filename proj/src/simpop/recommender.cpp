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

#include "simpop/recommender.hpp"

#include "simpop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace simpop {

std::optional<std::size_t> RankedList::position(const std::string& item) const {
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (items[k].item == item) return k + 1;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> unique_candidates(std::span<const std::string> candidates) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        if (seen.insert(c).second) out.push_back(c);
    }
    return out;
}

using KappaLookup = std::function<std::optional<double>(const std::string&)>;

std::string select_anchor(std::span<const Action> session, const KappaLookup& kappa, AnchorMode mode) {
    struct Seen {
        double kappa;
        std::size_t count = 0;
        std::size_t last = 0;
    };
    std::unordered_map<std::string, Seen> seen;
    for (std::size_t k = 0; k < session.size(); ++k) {
        const auto item = session[k].item();
        if (!item) continue;
        std::string id(*item);
        auto it = seen.find(id);
        if (it == seen.end()) {
            const auto kp = kappa(id);
            if (!kp) continue;
            it = seen.emplace(std::move(id), Seen{*kp}).first;
        }
        ++it->second.count;
        it->second.last = k;
    }
    if (seen.empty()) throw NoAnchorError();
    const std::pair<const std::string, Seen>* best = nullptr;
    for (const auto& entry : seen) {
        if (!best) {
            best = &entry;
            continue;
        }
        const Seen& a = entry.second;
        const Seen& b = best->second;
        const double ka = mode == AnchorMode::GlobalPopularity ? a.kappa : static_cast<double>(a.count);
        const double kb = mode == AnchorMode::GlobalPopularity ? b.kappa : static_cast<double>(b.count);
        bool better;
        if (ka != kb) better = ka > kb;
        else if (a.last != b.last) better = a.last > b.last;
        else better = entry.first < best->first;
        if (better) best = &entry;
    }
    return best->first;
}

} // namespace

RankedList popularity_order(std::span<const std::string> candidates, std::size_t t,
                            const std::function<double(const std::string&)>& popularity) {
    std::vector<std::pair<double, std::string>> scored;
    for (auto& c : unique_candidates(candidates)) scored.emplace_back(popularity(c), std::move(c));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    RankedList out;
    const std::size_t n = std::min(t, scored.size());
    out.items.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.items.push_back({std::move(scored[k].second), scored[k].first});
    return out;
}

std::string anchor_item(std::span<const Action> session, const PopularityTable& popularity, AnchorMode mode) {
    return select_anchor(session, [&](const std::string& id) { return popularity.find(id); }, mode);
}

std::string anchor_item(std::span<const Action> session, const EmbeddingModel& model, AnchorMode mode) {
    return select_anchor(
        session,
        [&](const std::string& id) -> std::optional<double> {
            const auto k = model.index_of(id);
            if (!k) return std::nullopt;
            return model.kappa(*k);
        },
        mode);
}

RankedList rank_candidates(const EmbeddingModel& model, const std::string& anchor,
                           std::span<const std::string> candidates, std::size_t t,
                           const PopularityTable* fallback_popularity, const RankOptions& options) {
    if (t == 0) throw InvalidArgument("t must be >= 1");
    const std::uint32_t a = model.require(anchor);
    const double alpha = model.params().alpha;

    struct Known {
        double log_p;
        double kappa;
        std::string id;
    };
    std::vector<Known> known;
    std::vector<std::string> unknown;
    for (auto& c : unique_candidates(candidates)) {
        if (c == anchor && options.exclude_anchor) continue;
        const auto k = model.index_of(c);
        if (!k) {
            unknown.push_back(std::move(c));
            continue;
        }
        const double d2 = *k == a ? 0.0 : squared_distance(model.coords(a), model.coords(*k));
        known.push_back({log_connection_probability(d2, model.kappa(a), model.kappa(*k), alpha), model.kappa(*k),
                         std::move(c)});
    }
    std::sort(known.begin(), known.end(), [](const Known& x, const Known& y) {
        if (x.log_p != y.log_p) return x.log_p > y.log_p;
        if (x.kappa != y.kappa) return x.kappa > y.kappa;
        return x.id < y.id;
    });

    RankedList out;
    out.anchor = anchor;
    for (auto& k : known) {
        if (out.items.size() == t) return out;
        out.items.push_back({std::move(k.id), std::exp(k.log_p)});
    }
    if (out.items.size() < t && !unknown.empty()) {
        const auto tail = popularity_order(unknown, t - out.items.size(), [&](const std::string& id) {
            return fallback_popularity ? fallback_popularity->kappa_or(id, 0.0) : 0.0;
        });
        for (const auto& s : tail.items) out.items.push_back({s.item, 0.0});
    }
    return out;
}

RankedList recommend(const EmbeddingModel& model, std::span<const Action> session,
                     const std::vector<std::string>* candidates, std::size_t t, const PopularityTable* popularity,
                     const RecommendOptions& options) {
    if (t == 0) throw InvalidArgument("t must be >= 1");
    std::string anchor;
    try {
        anchor = anchor_item(session, model, options.anchor_mode);
    } catch (const NoAnchorError&) {
        const auto lookup = [&](const std::string& id) {
            if (popularity) return popularity->kappa_or(id, 0.0);
            const auto k = model.index_of(id);
            return k ? model.kappa(*k) : 0.0;
        };
        RankedList out = candidates ? popularity_order(*candidates, t, lookup)
                                    : popularity_order(model.ids(), t, lookup);
        out.fallback_used = true;
        return out;
    }
    if (candidates) return rank_candidates(model, anchor, *candidates, t, popularity, options.rank);

    // Nearest items of the whole model by connection probability.
    const std::uint32_t a = *model.index_of(anchor);
    struct Known {
        double log_p;
        std::uint32_t k;
    };
    std::vector<Known> all;
    all.reserve(model.size());
    for (std::uint32_t k = 0; k < model.size(); ++k) {
        if (k == a && options.rank.exclude_anchor) continue;
        const double d2 = k == a ? 0.0 : squared_distance(model.coords(a), model.coords(k));
        all.push_back({log_connection_probability(d2, model.kappa(a), model.kappa(k), model.params().alpha), k});
    }
    const auto before = [&](const Known& x, const Known& y) {
        if (x.log_p != y.log_p) return x.log_p > y.log_p;
        if (model.kappa(x.k) != model.kappa(y.k)) return model.kappa(x.k) > model.kappa(y.k);
        return model.id(x.k) < model.id(y.k);
    };
    const std::size_t n = std::min(t, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), before);
    RankedList out;
    out.anchor = anchor;
    for (std::size_t k = 0; k < n; ++k) out.items.push_back({model.id(all[k].k), std::exp(all[k].log_p)});
    return out;
}

ProposedRanker::ProposedRanker(EmbeddingModel model, PopularityTable popularity, RecommendOptions options)
    : model_(std::move(model)), popularity_(std::move(popularity)), options_(options) {
    if (popularity_.empty()) popularity_ = model_.popularity();
}

RankedList ProposedRanker::rank(std::span<const Action> session, std::span<const std::string> candidates,
                                std::size_t t) const {
    if (candidates.empty()) return {};
    const std::vector<std::string> list(candidates.begin(), candidates.end());
    return recommend(model_, session, &list, t, popularity_.empty() ? nullptr : &popularity_, options_);
}

} // namespace simpop
