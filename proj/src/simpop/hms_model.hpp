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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simpop {

struct ModelParams {
    double alpha = 2.0;
    int dim = 10;
    double lambda = 0.01;

    /// Throws InvalidArgument unless alpha > 0, dim >= 1, lambda >= 0.
    void validate() const;
    /// Below the usual alpha > 1 regime; accepted but worth a warning.
    bool alpha_below_one() const noexcept { return alpha < 1.0; }
};

/// Item coordinates in R^dim plus hidden degrees.
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    explicit EmbeddingModel(ModelParams params);

    const ModelParams& params() const noexcept { return params_; }
    int dim() const noexcept { return params_.dim; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    /// Throws InvalidArgument on a duplicate id, a wrong coordinate count,
    /// non-finite coordinates or kappa <= 0.
    std::uint32_t add_item(const std::string& id, double kappa, std::span<const double> coords);

    std::optional<std::uint32_t> index_of(const std::string& id) const;
    /// Throws MissingItemError.
    std::uint32_t require(const std::string& id) const;
    const std::string& id(std::uint32_t k) const { return ids_[k]; }
    double kappa(std::uint32_t k) const { return kappa_[k]; }
    std::span<const double> coords(std::uint32_t k) const {
        return std::span<const double>(coords_).subspan(static_cast<std::size_t>(k) * dim(), dim());
    }
    std::span<const std::string> ids() const noexcept { return ids_; }
    std::span<const double> all_coords() const noexcept { return coords_; }
    PopularityTable popularity() const;

    bool operator==(const EmbeddingModel& other) const;

private:
    ModelParams params_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<double> kappa_;
    std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// (1 + d2 / (kappa_i kappa_j))^(-alpha)
double connection_probability(double d2, double kappa_i, double kappa_j, double alpha);
/// Natural log of the above; finite where the probability underflows.
double log_connection_probability(double d2, double kappa_i, double kappa_j, double alpha);
double connection_probability(const EmbeddingModel& model, std::uint32_t i, std::uint32_t j);
/// Throws MissingItemError for unknown ids and InvalidArgument when i == j.
double connection_probability(const EmbeddingModel& model, const std::string& i, const std::string& j);

/// kappa_i kappa_j (p^(-1/alpha) - 1). Throws DomainError unless 0 < p <= 1.
double derive_squared_distance(double p, double kappa_i, double kappa_j, double alpha);

struct Edge {
    std::uint32_t i;
    std::uint32_t j;
    bool operator==(const Edge&) const = default;
};

/// Independent Bernoulli draw for every unordered pair (i < j).
std::vector<Edge> generate_synthetic_network(const EmbeddingModel& model, std::uint64_t seed);
std::string serialize_edges(const EmbeddingModel& model, std::span<const Edge> edges);

struct RegimeReport {
    std::size_t checks = 0;
    std::size_t violations = 0;
    std::vector<std::string> messages;
    bool ok() const noexcept { return violations == 0; }
};

/// Numerical monotonicity gate over (a sample of) the model's pairs:
/// p rises with kappa_i kappa_j, falls with d2 and with alpha.
RegimeReport regime_check(const EmbeddingModel& model, std::size_t max_pairs = 20000);

/// Random model: coordinates uniform in [-extent, extent], kappa
/// log-uniform in [kappa_min, kappa_max]. Ids are "i0", "i1", ...
EmbeddingModel plant_model(std::size_t n_items, const ModelParams& params, double kappa_min, double kappa_max,
                           double extent, std::uint64_t seed);

/// Text format: header `simpop-model v1 dim=D alpha=a lambda=l`, then
/// `id<TAB>kappa<TAB>c1 c2 ... cD` per item.
std::string serialize_model(const EmbeddingModel& model);
EmbeddingModel parse_model(std::string_view text);

} // namespace simpop
