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

#include "simpop/hms_model.hpp"

#include "simpop/errors.hpp"
#include "simpop/rng.hpp"
#include "simpop/text_io.hpp"

#include <algorithm>
#include <cmath>

namespace simpop {

void ModelParams::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
    if (dim < 1) throw InvalidArgument("dim must be >= 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
}

EmbeddingModel::EmbeddingModel(ModelParams params) : params_(params) {
    params_.validate();
}

std::uint32_t EmbeddingModel::add_item(const std::string& id, double kappa, std::span<const double> coords) {
    if (coords.size() != static_cast<std::size_t>(dim())) {
        throw InvalidArgument("item '" + id + "' has " + std::to_string(coords.size()) + " coordinates, expected " +
                              std::to_string(dim()));
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("item '" + id + "' has kappa <= 0");
    for (double c : coords) {
        if (!std::isfinite(c)) throw InvalidArgument("item '" + id + "' has a non-finite coordinate");
    }
    const auto k = static_cast<std::uint32_t>(ids_.size());
    if (!index_.emplace(id, k).second) throw InvalidArgument("duplicate item '" + id + "'");
    ids_.push_back(id);
    kappa_.push_back(kappa);
    coords_.insert(coords_.end(), coords.begin(), coords.end());
    return k;
}

std::optional<std::uint32_t> EmbeddingModel::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t EmbeddingModel::require(const std::string& id) const {
    const auto k = index_of(id);
    if (!k) throw MissingItemError(id);
    return *k;
}

PopularityTable EmbeddingModel::popularity() const {
    PopularityTable table;
    for (std::size_t k = 0; k < ids_.size(); ++k) table.set(ids_[k], std::max(1.0, kappa_[k]));
    return table;
}

bool EmbeddingModel::operator==(const EmbeddingModel& other) const {
    return params_.alpha == other.params_.alpha && params_.dim == other.params_.dim &&
           params_.lambda == other.params_.lambda && ids_ == other.ids_ && kappa_ == other.kappa_ &&
           coords_ == other.coords_;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return d2;
}

double connection_probability(double d2, double kappa_i, double kappa_j, double alpha) {
    return std::pow(1.0 + d2 / (kappa_i * kappa_j), -alpha);
}

double log_connection_probability(double d2, double kappa_i, double kappa_j, double alpha) {
    return -alpha * std::log1p(d2 / (kappa_i * kappa_j));
}

double connection_probability(const EmbeddingModel& model, std::uint32_t i, std::uint32_t j) {
    return connection_probability(squared_distance(model.coords(i), model.coords(j)), model.kappa(i), model.kappa(j),
                                  model.params().alpha);
}

double connection_probability(const EmbeddingModel& model, const std::string& i, const std::string& j) {
    if (i == j) throw InvalidArgument("connection probability needs two distinct items");
    return connection_probability(model, model.require(i), model.require(j));
}

double derive_squared_distance(double p, double kappa_i, double kappa_j, double alpha) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("connection probability must lie in (0, 1]");
    if (!(kappa_i > 0.0 && kappa_j > 0.0)) throw DomainError("kappa must be > 0");
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    // expm1 keeps p close to 1 accurate.
    return kappa_i * kappa_j * std::expm1(-std::log(p) / alpha);
}

std::vector<Edge> generate_synthetic_network(const EmbeddingModel& model, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    const auto n = static_cast<std::uint32_t>(model.size());
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double p = connection_probability(model, i, j);
            if (uniform01(rng) < p) edges.push_back({i, j});
        }
    }
    return edges;
}

std::string serialize_edges(const EmbeddingModel& model, std::span<const Edge> edges) {
    std::string out;
    for (const Edge& e : edges) {
        out += model.id(e.i);
        out += '\t';
        out += model.id(e.j);
        out += '\n';
    }
    return out;
}

RegimeReport regime_check(const EmbeddingModel& model, std::size_t max_pairs) {
    RegimeReport report;
    const auto n = static_cast<std::uint32_t>(model.size());
    const double alpha = model.params().alpha;
    const auto note = [&](std::uint32_t i, std::uint32_t j, const char* what) {
        ++report.violations;
        if (report.messages.size() < 20) {
            report.messages.push_back("(" + model.id(i) + ", " + model.id(j) + "): " + what);
        }
    };
    std::size_t seen = 0;
    for (std::uint32_t i = 0; i < n && seen < max_pairs; ++i) {
        for (std::uint32_t j = i + 1; j < n && seen < max_pairs; ++j, ++seen) {
            const double d2 = squared_distance(model.coords(i), model.coords(j));
            const double kk = model.kappa(i) * model.kappa(j);
            const double base = log_connection_probability(d2, kk, 1.0, alpha);
            if (!(base <= 0.0)) note(i, j, "probability above 1");
            ++report.checks;
            if (d2 > 0.0) {
                report.checks += 3;
                if (!(log_connection_probability(d2, 2.0 * kk, 1.0, alpha) > base)) {
                    note(i, j, "not increasing in kappa product");
                }
                if (!(log_connection_probability(2.0 * d2, kk, 1.0, alpha) < base)) {
                    note(i, j, "not decreasing in squared distance");
                }
                if (!(log_connection_probability(d2, kk, 1.0, alpha + 1.0) < base)) {
                    note(i, j, "not decreasing in alpha");
                }
            } else {
                ++report.checks;
                if (base != 0.0) note(i, j, "coincident items with probability below 1");
            }
        }
    }
    return report;
}

EmbeddingModel plant_model(std::size_t n_items, const ModelParams& params, double kappa_min, double kappa_max,
                           double extent, std::uint64_t seed) {
    if (!(kappa_min > 0.0 && kappa_max >= kappa_min)) throw InvalidArgument("need 0 < kappa_min <= kappa_max");
    EmbeddingModel model(params);
    Rng rng(seed);
    std::vector<double> coords(static_cast<std::size_t>(params.dim));
    const double lo = std::log(kappa_min);
    const double hi = std::log(kappa_max);
    for (std::size_t k = 0; k < n_items; ++k) {
        for (double& c : coords) c = uniform_real(rng, -extent, extent);
        const double kappa = std::exp(uniform_real(rng, lo, hi));
        model.add_item("i" + std::to_string(k), kappa, coords);
    }
    return model;
}

std::string serialize_model(const EmbeddingModel& model) {
    const auto& p = model.params();
    std::string out = "simpop-model v1 dim=" + std::to_string(p.dim) + " alpha=" + text::format_double(p.alpha) +
                      " lambda=" + text::format_double(p.lambda) + "\n";
    for (std::uint32_t k = 0; k < model.size(); ++k) {
        out += model.id(k);
        out += '\t';
        out += text::format_double(model.kappa(k));
        out += '\t';
        const auto c = model.coords(k);
        for (std::size_t d = 0; d < c.size(); ++d) {
            if (d) out += ' ';
            out += text::format_double(c[d]);
        }
        out += '\n';
    }
    return out;
}

EmbeddingModel parse_model(std::string_view content) {
    text::LineCursor cursor(content);
    std::string_view line;
    if (!cursor.next(line)) throw ParseError(1, "empty model file");
    const auto head = text::split(text::trim(line), ' ');
    if (head.size() != 5 || head[0] != "simpop-model" || head[1] != "v1") {
        throw ParseError(1, "expected header 'simpop-model v1 dim=<D> alpha=<a> lambda=<l>'");
    }
    ModelParams params;
    const auto value = [&](const std::string& token, std::string_view key) -> std::string_view {
        if (token.rfind(key, 0) != 0) throw ParseError(1, "expected '" + std::string(key) + "...' in header");
        return std::string_view(token).substr(key.size());
    };
    const auto dim = text::parse_int(value(head[2], "dim="));
    const auto alpha = text::parse_double(value(head[3], "alpha="));
    const auto lambda = text::parse_double(value(head[4], "lambda="));
    if (!dim || !alpha || !lambda) throw ParseError(1, "malformed header value");
    params.dim = static_cast<int>(*dim);
    params.alpha = *alpha;
    params.lambda = *lambda;
    try {
        params.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(1, e.what());
    }

    EmbeddingModel model(params);
    std::vector<double> coords;
    while (cursor.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 3) throw ParseError(cursor.line_number(), "expected id<TAB>kappa<TAB>coordinates");
        const auto kappa = text::parse_double(f[1]);
        if (!kappa) throw ParseError(cursor.line_number(), "kappa is not a number");
        coords.clear();
        for (const auto& tok : text::split(f[2], ' ')) {
            const auto c = text::parse_double(tok);
            if (!c) throw ParseError(cursor.line_number(), "coordinate '" + tok + "' is not a number");
            coords.push_back(*c);
        }
        try {
            model.add_item(f[0], *kappa, coords);
        } catch (const InvalidArgument& e) {
            throw ParseError(cursor.line_number(), e.what());
        }
    }
    return model;
}

} // namespace simpop
