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

#include "simpop/simulate.hpp"

#include "simpop/errors.hpp"
#include "simpop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simpop {

void SimulationConfig::validate() const {
    if (n_items < impressions || impressions == 0) {
        throw InvalidArgument("simulation needs at least as many items as impressions");
    }
    if (impressions > kMaxImpressions) throw InvalidArgument("impression lists hold at most 25 items");
    if (n_sessions == 0) throw InvalidArgument("simulation needs at least one session");
    if (min_actions > max_actions) throw InvalidArgument("min_actions exceeds max_actions");
    if (!(kappa_min >= 1.0 && kappa_max >= kappa_min)) throw InvalidArgument("need 1 <= kappa_min <= kappa_max");
    if (!(non_item_rate >= 0.0 && non_item_rate < 1.0)) throw InvalidArgument("non_item_rate must be in [0, 1)");
}

namespace {

class Sampler {
public:
    explicit Sampler(std::vector<double> weights) : cumulative_(std::move(weights)) {
        std::partial_sum(cumulative_.begin(), cumulative_.end(), cumulative_.begin());
    }

    std::uint32_t draw(Rng& rng) const {
        const double u = uniform01(rng) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
    }

private:
    std::vector<double> cumulative_;
};

} // namespace

SimulatedData simulate_sessions(const SimulationConfig& config) {
    config.validate();
    ModelParams params{config.alpha, config.dim, 0.0};
    EmbeddingModel planted = plant_model(config.n_items, params, config.kappa_min, config.kappa_max, config.extent,
                                         mix_seed(config.seed, 0));
    const std::size_t n = planted.size();

    std::vector<double> kappa(n);
    for (std::uint32_t k = 0; k < n; ++k) kappa[k] = planted.kappa(k);
    const Sampler by_popularity(kappa);

    Rng rng(mix_seed(config.seed, 1));
    std::vector<Session> sessions;
    sessions.reserve(config.n_sessions);
    std::vector<double> weights(n);
    std::vector<char> shown(n, 0);

    for (std::size_t s = 0; s < config.n_sessions; ++s) {
        const std::uint32_t focus = by_popularity.draw(rng);
        for (std::uint32_t j = 0; j < n; ++j) {
            weights[j] = j == focus ? 0.0 : std::exp(log_connection_probability(
                                                squared_distance(planted.coords(focus), planted.coords(j)),
                                                planted.kappa(focus), planted.kappa(j), config.alpha));
        }
        const Sampler near_focus(weights);

        Session session;
        session.id = "s" + std::to_string(s);
        const std::string user = "u" + std::to_string(uniform_index(rng, config.n_sessions / 2 + 1));
        const std::int64_t start = 1500000000 + static_cast<std::int64_t>(s) * 60;
        auto push = [&](std::string type, std::string reference, std::vector<std::string> impressions = {}) {
            Action a;
            a.session_id = session.id;
            a.user_id = user;
            a.step = static_cast<std::int64_t>(session.actions.size()) + 1;
            a.timestamp = start + a.step * 5;
            a.kind = classify_action(type);
            a.action_type = std::move(type);
            a.reference = std::move(reference);
            a.impressions = std::move(impressions);
            session.actions.push_back(std::move(a));
        };
        auto impression_list = [&](std::uint32_t target) {
            std::vector<std::uint32_t> picked{target};
            shown[target] = 1;
            while (picked.size() < config.impressions) {
                const std::uint32_t d = by_popularity.draw(rng);
                if (shown[d]) continue;
                shown[d] = 1;
                picked.push_back(d);
            }
            for (std::size_t k = picked.size(); k > 1; --k) {
                std::swap(picked[k - 1], picked[uniform_index(rng, k)]);
            }
            std::vector<std::string> out;
            out.reserve(picked.size());
            for (const auto k : picked) {
                shown[k] = 0;
                out.push_back(planted.id(k));
            }
            return out;
        };

        const std::size_t actions =
            config.min_actions + uniform_index(rng, config.max_actions - config.min_actions + 1);
        push("interaction item image", planted.id(focus));
        for (std::size_t a = 1; a < actions; ++a) {
            if (uniform01(rng) < config.non_item_rate) push("filter selection", "Sort by Price");
            const std::uint32_t item = near_focus.draw(rng);
            if (uniform01(rng) < 0.2) {
                push("clickout item", planted.id(item), impression_list(item));
            } else {
                push(uniform01(rng) < 0.5 ? "interaction item info" : "interaction item image", planted.id(item));
            }
        }
        const std::uint32_t target = near_focus.draw(rng);
        push("clickout item", planted.id(target), impression_list(target));
        sessions.push_back(std::move(session));
    }
    return {std::move(planted), SessionCorpus(CorpusRole::Train, std::move(sessions))};
}

std::string simulate_metadata(const EmbeddingModel& model, double cell, std::uint64_t seed) {
    if (!(cell > 0.0)) throw InvalidArgument("metadata cell size must be positive");
    Rng rng(seed);
    std::string out;
    for (std::uint32_t k = 0; k < model.size(); ++k) {
        out += model.id(k);
        out += '\t';
        const auto x = model.coords(k);
        for (std::size_t d = 0; d < x.size(); ++d) {
            if (d) out += '|';
            out += "cell" + std::to_string(d) + ":" + std::to_string(static_cast<long long>(std::floor(x[d] / cell)));
        }
        for (int t = 0; t < 3; ++t) out += "|tag" + std::to_string(uniform_index(rng, 12));
        out += '\n';
    }
    return out;
}

} // namespace simpop
