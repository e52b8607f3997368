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

#include "simpop/optimizer.hpp"

#include "simpop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace simpop {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// Two-loop recursion: d = -H g.
void quasi_newton_direction(const std::deque<CurvaturePair>& pairs, std::span<const double> g,
                            std::vector<double>& d, std::vector<double>& alpha) {
    d.assign(g.begin(), g.end());
    alpha.resize(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
        alpha[k] = pairs[k].rho * dot(pairs[k].s, d);
        for (std::size_t t = 0; t < d.size(); ++t) d[t] -= alpha[k] * pairs[k].y[t];
    }
    const auto& last = pairs.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : d) v *= gamma;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double beta = pairs[k].rho * dot(pairs[k].y, d);
        for (std::size_t t = 0; t < d.size(); ++t) d[t] += (alpha[k] - beta) * pairs[k].s[t];
    }
    for (double& v : d) v = -v;
}

} // namespace

const char* to_string(StopReason reason) noexcept {
    switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::StationaryStart: return "stationary-start";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::LineSearchFailed: return "line-search-failed";
    case StopReason::Diverged: return "diverged";
    }
    return "unknown";
}

LbfgsResult minimize_lbfgs(const ObjectiveFn& fn, std::span<double> x, const LbfgsOptions& options) {
    if (options.memory < 1) throw InvalidArgument("memory must be >= 1");
    if (options.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(options.gradient_tolerance > 0.0)) throw InvalidArgument("gradient_tolerance must be > 0");

    const std::size_t n = x.size();
    LbfgsResult result;
    std::vector<double> g(n), g_new(n), x_new(n), d, alpha;
    double f = fn(x, g);
    ++result.evaluations;
    double gnorm = std::sqrt(dot(g, g));
    result.history.push_back({0, f, gnorm});
    result.objective = f;
    result.grad_norm = gnorm;
    if (!std::isfinite(f) || !all_finite(g)) {
        result.reason = StopReason::Diverged;
        return result;
    }
    if (gnorm == 0.0) {
        result.reason = StopReason::StationaryStart;
        return result;
    }
    const double threshold = options.gradient_tolerance * gnorm;

    std::deque<CurvaturePair> pairs;
    // Steepest-descent trial step, as a length: unit at first, then the
    // last accepted length.
    double sd_length = 1.0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        bool accepted = false;
        bool saw_finite_trial = false;
        double f_new = f;
        // First attempt along the quasi-Newton direction, second along -g.
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            bool steepest = attempt == 1 || pairs.empty();
            double gd = 0.0;
            if (!steepest) {
                quasi_newton_direction(pairs, g, d, alpha);
                gd = dot(g, d);
                if (!(gd < 0.0) || !all_finite(d)) {
                    pairs.clear();
                    steepest = true;
                }
            }
            if (steepest) {
                d.resize(n);
                for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
                gd = -gnorm * gnorm;
            }
            double step = steepest ? std::min(1.0, 1.0 / gnorm) * sd_length : 1.0;
            int trials = 0;
            for (int bt = 0; bt < options.max_backtracks; ++bt, step *= options.backtrack) {
                for (std::size_t k = 0; k < n; ++k) x_new[k] = x[k] + step * d[k];
                f_new = fn(x_new, g_new);
                ++result.evaluations;
                ++trials;
                if (!std::isfinite(f_new)) continue;
                saw_finite_trial = true;
                if (f_new <= f + options.armijo * step * gd) {
                    accepted = true;
                    break;
                }
            }
            // Without curvature information the unit-length first guess can
            // be far too short (e.g. leaving a saddle); grow it while the
            // objective keeps falling.
            if (accepted && steepest && trials == 1) {
                std::vector<double> x_try(n), g_try(n);
                for (int grow = 0; grow < options.max_backtracks; ++grow) {
                    const double bigger = step * 2.0;
                    for (std::size_t k = 0; k < n; ++k) x_try[k] = x[k] + bigger * d[k];
                    const double f_try = fn(x_try, g_try);
                    ++result.evaluations;
                    if (!std::isfinite(f_try) || f_try >= f_new || !all_finite(g_try)) break;
                    step = bigger;
                    f_new = f_try;
                    std::swap(x_new, x_try);
                    std::swap(g_new, g_try);
                }
            }
            if (accepted && steepest) sd_length = std::max(1.0, step * gnorm);
            if (!accepted && steepest) break;
        }
        if (!accepted) {
            result.reason = saw_finite_trial ? StopReason::LineSearchFailed : StopReason::Diverged;
            result.iterations = iter - 1;
            return result;
        }
        if (!all_finite(g_new)) {
            result.reason = StopReason::Diverged;
            result.iterations = iter;
            return result;
        }

        CurvaturePair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            pair.s[k] = x_new[k] - x[k];
            pair.y[k] = g_new[k] - g[k];
        }
        const double sy = dot(pair.s, pair.y);
        const double yy = dot(pair.y, pair.y);
        if (sy > 1e-10 * yy && yy > 0.0) {
            pair.rho = 1.0 / sy;
            pairs.push_back(std::move(pair));
            if (pairs.size() > static_cast<std::size_t>(options.memory)) pairs.pop_front();
        } else {
            ++result.rejected_pairs;
        }

        std::copy(x_new.begin(), x_new.end(), x.begin());
        std::swap(g, g_new);
        f = f_new;
        gnorm = std::sqrt(dot(g, g));
        result.history.push_back({iter, f, gnorm});
        result.iterations = iter;
        result.objective = f;
        result.grad_norm = gnorm;
        if (gnorm <= threshold) {
            result.reason = StopReason::Converged;
            return result;
        }
    }
    result.reason = StopReason::MaxIterations;
    return result;
}

} // namespace simpop
