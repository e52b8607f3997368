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

// Fixture builders and independent reference implementations used by the
// test suites. Oracles here are written from the formulas directly and share
// no code with the library.

#include "simpop/session_store.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace simpop::testing {

struct Step {
    std::string type;
    std::string reference;
    std::string impressions; // pipe-separated
};

inline Session make_session(const std::string& id, const std::vector<Step>& steps, std::int64_t t0 = 1000,
                            const std::string& user = "u") {
    Session s{id, {}};
    std::int64_t k = 0;
    for (const auto& st : steps) {
        Action a;
        a.session_id = id;
        a.user_id = user;
        a.step = ++k;
        a.timestamp = t0 + k;
        a.action_type = st.type;
        a.kind = classify_action(st.type);
        a.reference = st.reference;
        if (!st.impressions.empty()) {
            std::string cur;
            for (char c : st.impressions + "|") {
                if (c == '|') {
                    if (!cur.empty()) a.impressions.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
        }
        s.actions.push_back(std::move(a));
    }
    return s;
}

/// Session of plain item interactions, one per reference.
inline Session item_session(const std::string& id, const std::vector<std::string>& items, std::int64_t t0 = 1000) {
    std::vector<Step> steps;
    for (const auto& it : items) steps.push_back({"interaction item image", it, ""});
    return make_session(id, steps, t0);
}

inline Step view(const std::string& item) {
    return {"interaction item image", item, ""};
}
inline Step click(const std::string& item, const std::string& impressions) {
    return {"clickout item", item, impressions};
}

// ---- oracles -------------------------------------------------------------

/// Session cosine with binary indicators evaluated as a dot product over sessions.
inline double oracle_cosine(const std::vector<std::set<std::string>>& sessions, const std::string& i,
                            const std::string& j) {
    double dot = 0, ni = 0, nj = 0;
    for (const auto& s : sessions) {
        const double a = s.count(i) ? 1.0 : 0.0;
        const double b = s.count(j) ? 1.0 : 0.0;
        dot += a * b;
        ni += a * a;
        nj += b * b;
    }
    return dot / std::sqrt(ni * nj);
}

inline double oracle_probability(double d2, double ki, double kj, double alpha) {
    return std::pow(1.0 + d2 / (ki * kj), -alpha);
}

inline double oracle_distance(double p, double ki, double kj, double alpha) {
    return ki * kj * (std::pow(p, -1.0 / alpha) - 1.0);
}

struct FlatPair {
    int i;
    int j;
    double d2;
};

/// Stress objective over a flat row-major coordinate array.
inline double oracle_objective(const std::vector<double>& x, int dim, const std::vector<FlatPair>& pairs,
                               double lambda) {
    double f = 0;
    for (const auto& p : pairs) {
        double d = 0;
        for (int c = 0; c < dim; ++c) {
            const double diff = x[p.i * dim + c] - x[p.j * dim + c];
            d += diff * diff;
        }
        f += (d - p.d2) * (d - p.d2);
    }
    double reg = 0;
    for (double v : x) reg += v * v;
    return f + lambda * reg;
}

/// Central finite differences of oracle_objective.
inline std::vector<double> finite_difference_gradient(const std::vector<double>& x, int dim,
                                                      const std::vector<FlatPair>& pairs, double lambda,
                                                      double h = 1e-5) {
    std::vector<double> g(x.size());
    std::vector<double> y = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double step = h * std::max(1.0, std::abs(x[k]));
        y[k] = x[k] + step;
        const double fp = oracle_objective(y, dim, pairs, lambda);
        y[k] = x[k] - step;
        const double fm = oracle_objective(y, dim, pairs, lambda);
        y[k] = x[k];
        g[k] = (fp - fm) / (2 * step);
    }
    return g;
}

/// Expected reciprocal rank of a uniformly placed item among n.
inline double harmonic_mrr(int n) {
    double s = 0;
    for (int r = 1; r <= n; ++r) s += 1.0 / r;
    return s / n;
}

inline double relative_error(double got, double want) {
    if (want == 0.0) return std::abs(got);
    return std::abs(got - want) / std::abs(want);
}

} // namespace simpop::testing
