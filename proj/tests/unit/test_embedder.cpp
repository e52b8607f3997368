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

#include "support/fixtures.hpp"

#include "simpop/embedder.hpp"
#include "simpop/errors.hpp"
#include "simpop/optimizer.hpp"
#include "simpop/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace simpop;
using namespace simpop::testing;

namespace {

struct Instance {
    std::size_t n;
    int dim;
    double lambda;
    std::vector<double> x;
    std::vector<Target> targets;
    std::vector<FlatPair> flat;
};

Instance random_instance(std::uint64_t seed) {
    Rng rng(seed);
    Instance in;
    in.n = 2 + uniform_index(rng, 9);
    in.dim = 1 + static_cast<int>(uniform_index(rng, 3));
    in.lambda = seed % 2 ? 0.0 : 0.01;
    in.x.resize(in.n * in.dim);
    for (double& v : in.x) v = uniform_real(rng, -2, 2);
    for (std::uint32_t i = 0; i < in.n; ++i) {
        for (std::uint32_t j = i + 1; j < in.n; ++j) {
            if (uniform01(rng) < 0.6) {
                const double d2 = uniform_real(rng, 0.1, 5);
                in.targets.push_back({i, j, d2});
                in.flat.push_back({static_cast<int>(i), static_cast<int>(j), d2});
            }
        }
    }
    return in;
}

} // namespace

TEST_CASE("objective on hand examples") {
    CHECK(objective({{"a", {0.0}}, {"b", {0.0}}}, {{{"a", "b"}, 1.0}}, 0.0) == 1.0);
    CHECK(objective({{"a", {0.0, 0.0}}, {"b", {3.0, 4.0}}}, {{{"a", "b"}, 25.0}}, 0.0) == 0.0);
    CHECK(objective({{"a", {1.0, 0.0}}}, {}, 0.1) == doctest::Approx(0.1));
    CHECK_THROWS_AS(objective({{"a", {0.0}}}, {{{"a", "b"}, 1.0}}, 0.0), MissingItemError);
}

TEST_CASE("gradient on hand examples") {
    const CoordinateMap sym{{"a", {1.0, -2.0}}, {"b", {-1.0, 2.0}}};
    const auto g = gradient(sym, {{{"a", "b"}, 3.0}}, 0.0);
    for (int c = 0; c < 2; ++c) CHECK(g.at("a")[c] == -g.at("b")[c]);
    // r = 20 - 3, x_a - x_b = (2, -4): 4 * (2, -4) * 17
    CHECK(g.at("a")[0] == doctest::Approx(136.0));
    const CoordinateMap zero{{"a", {0.0, 0.0}}, {"b", {0.0, 0.0}}, {"c", {0.0, 0.0}}};
    for (const auto& [id, v] : gradient(zero, {{{"a", "b"}, 2.0}, {{"b", "c"}, 5.0}}, 0.3)) {
        for (double c : v) CHECK(c == 0.0);
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto in = random_instance(seed);
        const StressObjective f(in.n, in.dim, in.targets, in.lambda);
        std::vector<double> g(in.x.size());
        const double value = f.evaluate(in.x, g);
        CHECK(value == doctest::Approx(oracle_objective(in.x, in.dim, in.flat, in.lambda)).epsilon(1e-12));
        const auto fd = finite_difference_gradient(in.x, in.dim, in.flat, in.lambda);
        double num = 0, den = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            num += (g[k] - fd[k]) * (g[k] - fd[k]);
            den += fd[k] * fd[k];
        }
        CHECK(std::sqrt(num) <= 1e-5 * std::max(1.0, std::sqrt(den)));
    }
}

TEST_CASE("property: keyed and flat forms agree") {
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        const auto in = random_instance(seed);
        CoordinateMap coords;
        TargetMap targets;
        const auto name = [](std::uint32_t k) { return "n" + std::to_string(k); };
        for (std::uint32_t i = 0; i < in.n; ++i) {
            coords[name(i)] = std::vector<double>(in.x.begin() + i * in.dim, in.x.begin() + (i + 1) * in.dim);
        }
        for (const auto& t : in.targets) targets[{name(t.i), name(t.j)}] = t.d2;
        const StressObjective f(in.n, in.dim, in.targets, in.lambda);
        std::vector<double> g(in.x.size());
        CHECK(objective(coords, targets, in.lambda) == doctest::Approx(f.evaluate(in.x, g)).epsilon(1e-12));
        const auto kg = gradient(coords, targets, in.lambda);
        for (std::uint32_t i = 0; i < in.n; ++i) {
            for (int c = 0; c < in.dim; ++c) {
                CHECK(kg.at(name(i))[c] == doctest::Approx(g[i * in.dim + c]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("property: translation invariance only without regularization") {
    for (std::uint64_t seed = 70; seed < 80; ++seed) {
        auto in = random_instance(seed);
        std::vector<double> moved = in.x;
        for (std::size_t k = 0; k < moved.size(); ++k) moved[k] += 0.7 * ((k % in.dim) + 1);
        const StressObjective plain(in.n, in.dim, in.targets, 0.0);
        const StressObjective reg(in.n, in.dim, in.targets, 0.05);
        CHECK(plain.value(moved) == doctest::Approx(plain.value(in.x)).epsilon(1e-9));
        // Compare the regularizer about the centroid, where it is minimal.
        std::vector<double> centred = in.x;
        for (int c = 0; c < in.dim; ++c) {
            double mean = 0;
            for (std::size_t i = 0; i < in.n; ++i) mean += in.x[i * in.dim + c];
            mean /= static_cast<double>(in.n);
            for (std::size_t i = 0; i < in.n; ++i) centred[i * in.dim + c] -= mean;
        }
        std::vector<double> shifted = centred;
        for (double& v : shifted) v += 0.3;
        CHECK(reg.value(shifted) > reg.value(centred));
    }
}

TEST_CASE("property: deterministic reduction is bit-identical across thread counts") {
    for (std::uint64_t seed = 90; seed < 95; ++seed) {
        Rng rng(seed);
        const std::size_t n = 700;
        std::vector<Target> targets;
        for (std::uint32_t i = 0; i < n; ++i) {
            for (int e = 0; e < 6; ++e) {
                const auto j = static_cast<std::uint32_t>(uniform_index(rng, n));
                if (j != i) targets.push_back({std::min(i, j), std::max(i, j), uniform_real(rng, 0.1, 9)});
            }
        }
        std::sort(targets.begin(), targets.end(),
                  [](const Target& a, const Target& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
        targets.erase(std::unique(targets.begin(), targets.end(),
                                  [](const Target& a, const Target& b) { return a.i == b.i && a.j == b.j; }),
                      targets.end());
        std::vector<double> x(n * 3);
        for (double& v : x) v = uniform_real(rng, -1, 1);
        std::vector<double> g1(x.size()), g4(x.size()), gp(x.size());
        const double f1 = StressObjective(n, 3, targets, 0.01, {1, true}).evaluate(x, g1);
        const double f4 = StressObjective(n, 3, targets, 0.01, {4, true}).evaluate(x, g4);
        const double fp = StressObjective(n, 3, targets, 0.01, {3, false}).evaluate(x, gp);
        CHECK(f1 == f4);
        CHECK(g1 == g4);
        CHECK(fp == doctest::Approx(f1).epsilon(1e-12));
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(gp[k] == doctest::Approx(g1[k]).epsilon(1e-9));
    }
}

TEST_CASE("stress objective rejects bad input") {
    CHECK_THROWS_AS(StressObjective(2, 1, {{0, 0, 1.0}}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(StressObjective(2, 1, {{0, 5, 1.0}}, 0.0), InvalidArgument);
    const StressObjective f(2, 1, {{0, 1, 1.0}}, 0.0);
    std::vector<double> x(3);
    CHECK_THROWS_AS(f.value(x), InvalidArgument);
}

TEST_CASE("L-BFGS minimizes a convex quadratic and the Rosenbrock valley") {
    SUBCASE("quadratic") {
        std::vector<double> x{3.0, -4.0, 10.0};
        const auto r = minimize_lbfgs(
            [](std::span<const double> v, std::span<double> g) {
                double f = 0;
                for (std::size_t k = 0; k < v.size(); ++k) {
                    const double w = static_cast<double>(k + 1);
                    f += w * (v[k] - 1) * (v[k] - 1);
                    g[k] = 2 * w * (v[k] - 1);
                }
                return f;
            },
            x, {10, 200, 1e-10});
        CHECK(r.reason == StopReason::Converged);
        for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("rosenbrock") {
        std::vector<double> x{-1.2, 1.0};
        const auto r = minimize_lbfgs(
            [](std::span<const double> v, std::span<double> g) {
                const double a = 1 - v[0], b = v[1] - v[0] * v[0];
                g[0] = -2 * a - 400 * v[0] * b;
                g[1] = 200 * b;
                return a * a + 100 * b * b;
            },
            x, {10, 1000, 1e-9});
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-5));
        for (std::size_t k = 1; k < r.history.size(); ++k) {
            CHECK(r.history[k].objective <= r.history[k - 1].objective);
        }
    }
    SUBCASE("stationary start and divergence") {
        std::vector<double> x{0.0};
        auto r = minimize_lbfgs(
            [](std::span<const double>, std::span<double> g) {
                g[0] = 0;
                return 1.0;
            },
            x);
        CHECK(r.reason == StopReason::StationaryStart);
        CHECK(r.iterations == 0);
        r = minimize_lbfgs(
            [](std::span<const double>, std::span<double> g) {
                g[0] = NAN;
                return NAN;
            },
            x);
        CHECK(r.reason == StopReason::Diverged);
    }
}

TEST_CASE("fit: two items with one target in one dimension") {
    EmbeddingProblem problem{{"a", "b"}, {1.0, 1.0}, {{0, 1, 4.0}}};
    FitConfig cfg;
    cfg.params = {2.0, 1, 0.0};
    cfg.gradient_tolerance = 1e-12;
    cfg.max_iterations = 1000;
    const auto fit = fit_embedding(problem, cfg);
    const double d2 = squared_distance(fit.model.coords(0), fit.model.coords(1));
    CHECK(std::abs(d2 - 4.0) < 1e-6);
}

TEST_CASE("fit: unit square of targets in two dimensions") {
    const double s2 = 2.0;
    EmbeddingProblem problem{{"a", "b", "c", "d"},
                             {1, 1, 1, 1},
                             {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}, {0, 2, s2}, {1, 3, s2}}};
    FitConfig cfg;
    cfg.params = {2.0, 2, 0.0};
    cfg.gradient_tolerance = 1e-12;
    cfg.max_iterations = 2000;
    double best = INFINITY;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        const auto fit = fit_embedding(problem, cfg);
        double worst = 0;
        for (const auto& t : problem.targets) {
            worst = std::max(worst,
                             std::abs(squared_distance(fit.model.coords(t.i), fit.model.coords(t.j)) - t.d2));
        }
        best = std::min(best, worst);
    }
    CHECK(best < 1e-4);
}

TEST_CASE("fit: seeds change coordinates but not the attained objective") {
    const auto planted = plant_model(25, ModelParams{2.0, 2, 0.0}, 1, 5, 3, 4);
    EmbeddingProblem problem;
    for (std::uint32_t k = 0; k < planted.size(); ++k) {
        problem.ids.push_back(planted.id(k));
        problem.kappa.push_back(planted.kappa(k));
    }
    for (std::uint32_t i = 0; i < planted.size(); ++i) {
        for (std::uint32_t j = i + 1; j < planted.size(); ++j) {
            problem.targets.push_back({i, j, squared_distance(planted.coords(i), planted.coords(j)) * 1.1 + 0.2});
        }
    }
    FitConfig cfg;
    cfg.params = {2.0, 2, 0.01};
    cfg.max_iterations = 1500;
    cfg.gradient_tolerance = 1e-8;
    cfg.seed = 1;
    const auto a = fit_embedding(problem, cfg);
    cfg.seed = 2;
    const auto b = fit_embedding(problem, cfg);
    CHECK_FALSE(a.model == b.model);
    const double fa = a.trace.iterations.back().objective;
    const double fb = b.trace.iterations.back().objective;
    CHECK(std::abs(fa - fb) <= 0.05 * std::max(fa, fb));
}

TEST_CASE("fit: zero start is stationary, random start is not") {
    EmbeddingProblem problem{{"a", "b", "c"}, {1, 2, 3}, {{0, 1, 1.0}, {1, 2, 2.0}}};
    FitConfig cfg;
    cfg.params = {2.0, 2, 0.01};
    cfg.initialization = Initialization::Zero;
    const auto zero = fit_embedding(problem, cfg);
    CHECK(zero.trace.stop == StopReason::StationaryStart);
    CHECK(zero.trace.iterations_used == 0);
    CHECK(zero.trace.final_grad_norm == 0.0);
    cfg.initialization = Initialization::Random;
    const auto random = fit_embedding(problem, cfg);
    CHECK(random.trace.stop != StopReason::StationaryStart);
    CHECK(random.trace.iterations_used > 0);
}

TEST_CASE("fit: trace is monotone and exports as CSV") {
    const auto planted = plant_model(15, ModelParams{2.0, 2, 0.0}, 1, 5, 3, 4);
    EmbeddingProblem problem;
    for (std::uint32_t k = 0; k < planted.size(); ++k) {
        problem.ids.push_back(planted.id(k));
        problem.kappa.push_back(planted.kappa(k));
        for (std::uint32_t j = k + 1; j < planted.size(); ++j) {
            problem.targets.push_back({k, j, squared_distance(planted.coords(k), planted.coords(j))});
        }
    }
    FitConfig cfg;
    cfg.params = {2.0, 2, 0.0};
    const auto fit = fit_embedding(problem, cfg);
    for (std::size_t k = 1; k < fit.trace.iterations.size(); ++k) {
        CHECK(fit.trace.iterations[k].objective <= fit.trace.iterations[k - 1].objective);
    }
    const std::string csv = serialize_trace(fit.trace);
    CHECK(csv.rfind("iteration,objective,grad_norm\n0,", 0) == 0);
    CHECK(fit.model.kappa(3) == planted.kappa(3));
}

TEST_CASE("fit: divergence carries the trace") {
    EmbeddingProblem problem{{"a", "b"}, {1, 1}, {{0, 1, 1.0}}};
    FitConfig cfg;
    cfg.params = {2.0, 1, 0.0};
    cfg.init_scale = 1e200;
    try {
        fit_embedding(problem, cfg);
        FAIL("expected divergence");
    } catch (const FitDivergence& e) {
        CHECK(e.iteration() == 0);
        CHECK_FALSE(e.trace().iterations.empty());
    }
}

TEST_CASE("fit configuration is validated") {
    FitConfig cfg;
    cfg.init_scale = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.gradient_tolerance = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.reduction.threads = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    CHECK_THROWS_AS(fit_embedding(AffinityGraph{}, FitConfig{}), InvalidArgument);
}

TEST_CASE("targets come from the distance inversion of every pair") {
    PopularityTable pop;
    pop.set("a", 2);
    pop.set("b", 3);
    pop.set("c", 5);
    const AffinityGraph g({{"a", "b", 0.5}, {"b", "c", 0.2}}, pop);
    const auto problem = make_problem(g, 2.0);
    REQUIRE(problem.targets.size() == 2);
    for (const auto& t : problem.targets) {
        const double p = *g.lookup(problem.ids[t.i], problem.ids[t.j]);
        CHECK(t.d2 == doctest::Approx(oracle_distance(p, problem.kappa[t.i], problem.kappa[t.j], 2.0)));
    }
}
