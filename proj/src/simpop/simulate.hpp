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

#include "simpop/hms_model.hpp"
#include "simpop/session_store.hpp"

#include <cstdint>
#include <string>

namespace simpop {

/// Browsing sessions drawn from a planted model. Each session has a focus
/// item picked by popularity; every item touched in the session, including
/// the final clickout, is drawn with weight p(focus, j). Impression lists
/// hold the clicked item plus distractors drawn by popularity.
struct SimulationConfig {
    std::size_t n_items = 500;
    std::size_t n_sessions = 2000;
    int dim = 2;
    double alpha = 2.0;
    double kappa_min = 1.0;
    double kappa_max = 20.0;
    double extent = 10.0;
    std::size_t min_actions = 2;   ///< item actions before the final clickout
    std::size_t max_actions = 8;
    std::size_t impressions = kMaxImpressions;
    double non_item_rate = 0.1;    ///< chance of a filter action between steps
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimulatedData {
    EmbeddingModel planted;
    SessionCorpus sessions; ///< role Train; every session ends in a clickout
};

SimulatedData simulate_sessions(const SimulationConfig& config);

/// Item metadata in `item<TAB>prop|prop` form: a coarse spatial cell per
/// coordinate plus a few random tags, so nearby items share properties.
std::string simulate_metadata(const EmbeddingModel& model, double cell, std::uint64_t seed);

} // namespace simpop
