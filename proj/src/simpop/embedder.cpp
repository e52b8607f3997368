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

#include "simpop/embedder.hpp"

#include "simpop/rng.hpp"
#include "simpop/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>
#include <unordered_map>

namespace simpop {

namespace {

constexpr std::size_t kItemChunk = 256;
constexpr std::size_t kPairChunk = 4096;

template <typename Body>
void run_workers(int threads, std::size_t tasks, Body&& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || tasks <= 1) {
        body(std::size_t{0}, std::size_t{1});
        return;
    }
    const std::size_t used = std::min(workers, tasks);
    std::vector<std::jthread> pool;
    pool.reserve(used - 1);
    for (std::size_t t = 1; t < used; ++t) pool.emplace_back([&, t] { body(t, used); });
    body(0, used);
}

} // namespace

StressObjective::StressObjective(std::size_t n_items, int dim, std::vector<Target> targets, double lambda,
                                 ReductionOptions reduction)
    : n_items_(n_items), dim_(dim), targets_(std::move(targets)), lambda_(lambda), reduction_(reduction) {
    if (dim < 1) throw InvalidArgument("dim must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    offsets_.assign(n_items + 1, 0);
    for (const Target& t : targets_) {
        if (t.i >= n_items || t.j >= n_items || t.i == t.j) {
            throw InvalidArgument("target references an invalid item index");
        }
        ++offsets_[t.i + 1];
        ++offsets_[t.j + 1];
    }
    for (std::size_t k = 0; k < n_items; ++k) offsets_[k + 1] += offsets_[k];
    links_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Target& t : targets_) {
        links_[fill[t.i]++] = {t.j, t.d2};
        links_[fill[t.j]++] = {t.i, t.d2};
    }
}

void StressObjective::check_size(std::size_t size) const {
    if (size != n_items_ * static_cast<std::size_t>(dim_)) {
        throw InvalidArgument("coordinate array has the wrong size");
    }
}

double StressObjective::value(std::span<const double> x) const {
    check_size(x.size());
    const auto D = static_cast<std::size_t>(dim_);
    double f = 0.0;
    for (const Target& t : targets_) {
        const double r = squared_distance(x.subspan(t.i * D, D), x.subspan(t.j * D, D)) - t.d2;
        f += r * r;
    }
    if (lambda_ > 0.0) {
        double reg = 0.0;
        for (double v : x) reg += v * v;
        f += lambda_ * reg;
    }
    return f;
}

double StressObjective::evaluate(std::span<const double> x, std::span<double> grad) const {
    check_size(x.size());
    check_size(grad.size());
    return reduction_.deterministic ? evaluate_by_item(x, grad) : evaluate_by_pair(x, grad);
}

double StressObjective::evaluate_by_item(std::span<const double> x, std::span<double> grad) const {
    const auto D = static_cast<std::size_t>(dim_);
    const std::size_t chunks = (n_items_ + kItemChunk - 1) / kItemChunk;
    std::vector<double> partial(chunks, 0.0);
    run_workers(reduction_.threads, chunks, [&](std::size_t worker, std::size_t stride) {
        for (std::size_t c = worker; c < chunks; c += stride) {
            double f = 0.0;
            const std::size_t end = std::min(n_items_, (c + 1) * kItemChunk);
            for (std::size_t i = c * kItemChunk; i < end; ++i) {
                const double* xi = &x[i * D];
                double* gi = &grad[i * D];
                for (std::size_t d = 0; d < D; ++d) gi[d] = 2.0 * lambda_ * xi[d];
                double reg = 0.0;
                for (std::size_t d = 0; d < D; ++d) reg += xi[d] * xi[d];
                f += lambda_ * reg;
                for (std::size_t l = offsets_[i]; l < offsets_[i + 1]; ++l) {
                    const Link& link = links_[l];
                    const double* xj = &x[link.other * D];
                    double d2 = 0.0;
                    for (std::size_t d = 0; d < D; ++d) {
                        const double diff = xi[d] - xj[d];
                        d2 += diff * diff;
                    }
                    const double r = d2 - link.d2;
                    if (link.other > i) f += r * r;
                    const double w = 4.0 * r;
                    for (std::size_t d = 0; d < D; ++d) gi[d] += w * (xi[d] - xj[d]);
                }
            }
            partial[c] = f;
        }
    });
    double f = 0.0;
    for (double v : partial) f += v;
    return f;
}

double StressObjective::evaluate_by_pair(std::span<const double> x, std::span<double> grad) const {
    const auto D = static_cast<std::size_t>(dim_);
    const std::size_t chunks = (targets_.size() + kPairChunk - 1) / kPairChunk;
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(reduction_.threads), chunks));
    std::vector<std::vector<double>> buffers(workers);
    std::vector<double> partial(workers, 0.0);
    std::atomic<std::size_t> next{0};
    run_workers(static_cast<int>(workers), workers, [&](std::size_t worker, std::size_t) {
        std::vector<double>& g = buffers[worker];
        g.assign(grad.size(), 0.0);
        double f = 0.0;
        for (std::size_t c; (c = next.fetch_add(1, std::memory_order_relaxed)) < chunks;) {
            const std::size_t end = std::min(targets_.size(), (c + 1) * kPairChunk);
            for (std::size_t k = c * kPairChunk; k < end; ++k) {
                const Target& t = targets_[k];
                const double* xi = &x[t.i * D];
                const double* xj = &x[t.j * D];
                double d2 = 0.0;
                for (std::size_t d = 0; d < D; ++d) {
                    const double diff = xi[d] - xj[d];
                    d2 += diff * diff;
                }
                const double r = d2 - t.d2;
                f += r * r;
                const double w = 4.0 * r;
                for (std::size_t d = 0; d < D; ++d) {
                    const double v = w * (xi[d] - xj[d]);
                    g[t.i * D + d] += v;
                    g[t.j * D + d] -= v;
                }
            }
        }
        partial[worker] = f;
    });
    double f = 0.0;
    for (double v : partial) f += v;
    double reg = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
        double s = 2.0 * lambda_ * x[k];
        for (const auto& b : buffers) s += b[k];
        grad[k] = s;
        reg += x[k] * x[k];
    }
    return f + lambda_ * reg;
}

namespace {

struct KeyedProblem {
    std::vector<std::string> ids;
    std::vector<double> x;
    std::vector<Target> targets;
    int dim = 0;
};

KeyedProblem index_keyed(const CoordinateMap& coords, const TargetMap& targets) {
    KeyedProblem kp;
    std::unordered_map<std::string, std::uint32_t> index;
    bool first = true;
    for (const auto& [id, c] : coords) {
        if (first) {
            kp.dim = static_cast<int>(c.size());
            first = false;
        } else if (c.size() != static_cast<std::size_t>(kp.dim)) {
            throw InvalidArgument("item '" + id + "' has a different coordinate count");
        }
        index.emplace(id, static_cast<std::uint32_t>(kp.ids.size()));
        kp.ids.push_back(id);
        kp.x.insert(kp.x.end(), c.begin(), c.end());
    }
    for (const auto& [key, d2] : targets) {
        const auto a = index.find(key.first);
        if (a == index.end()) throw MissingItemError(key.first);
        const auto b = index.find(key.second);
        if (b == index.end()) throw MissingItemError(key.second);
        kp.targets.push_back({a->second, b->second, d2});
    }
    if (kp.dim == 0) kp.dim = 1;
    return kp;
}

} // namespace

double objective(const CoordinateMap& coords, const TargetMap& targets, double lambda) {
    if (coords.empty()) {
        if (!targets.empty()) throw MissingItemError(targets.begin()->first.first);
        return 0.0;
    }
    KeyedProblem kp = index_keyed(coords, targets);
    StressObjective f(kp.ids.size(), kp.dim, std::move(kp.targets), lambda);
    return f.value(kp.x);
}

CoordinateMap gradient(const CoordinateMap& coords, const TargetMap& targets, double lambda) {
    if (coords.empty()) {
        if (!targets.empty()) throw MissingItemError(targets.begin()->first.first);
        return {};
    }
    KeyedProblem kp = index_keyed(coords, targets);
    StressObjective f(kp.ids.size(), kp.dim, std::move(kp.targets), lambda);
    std::vector<double> g(kp.x.size());
    f.evaluate(kp.x, g);
    CoordinateMap out;
    const auto D = static_cast<std::size_t>(kp.dim);
    for (std::size_t k = 0; k < kp.ids.size(); ++k) {
        out.emplace(kp.ids[k], std::vector<double>(g.begin() + static_cast<std::ptrdiff_t>(k * D),
                                                   g.begin() + static_cast<std::ptrdiff_t>((k + 1) * D)));
    }
    return out;
}

void FitConfig::validate() const {
    params.validate();
    if (!(init_scale > 0.0)) throw InvalidArgument("init_scale must be > 0");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(gradient_tolerance > 0.0)) throw InvalidArgument("gradient_tolerance must be > 0");
    if (memory < 1) throw InvalidArgument("memory must be >= 1");
    if (reduction.threads < 1) throw InvalidArgument("threads must be >= 1");
}

std::string serialize_trace(const FitTrace& trace) {
    std::string out = "iteration,objective,grad_norm\n";
    for (const auto& rec : trace.iterations) {
        out += std::to_string(rec.iteration);
        out += ',';
        out += text::format_double(rec.objective);
        out += ',';
        out += text::format_double(rec.grad_norm);
        out += '\n';
    }
    return out;
}

EmbeddingProblem make_problem(const AffinityGraph& graph, double alpha) {
    EmbeddingProblem problem;
    const auto items = graph.items();
    problem.ids.assign(items.begin(), items.end());
    problem.kappa.reserve(items.size());
    for (const auto& id : items) problem.kappa.push_back(graph.popularity().kappa_or(id, 1.0));
    problem.targets.reserve(graph.pair_count());
    for (std::uint32_t a = 0; a < items.size(); ++a) {
        for (const auto& n : graph.neighbors(a)) {
            if (a < n.item) {
                problem.targets.push_back(
                    {a, n.item, derive_squared_distance(n.p, problem.kappa[a], problem.kappa[n.item], alpha)});
            }
        }
    }
    return problem;
}

FitResult fit_embedding(const EmbeddingProblem& problem, const FitConfig& config) {
    config.validate();
    if (problem.ids.empty() || problem.targets.empty()) throw InvalidArgument("cannot fit an empty graph");
    if (problem.kappa.size() != problem.ids.size()) throw InvalidArgument("kappa and ids differ in length");
    const auto start = std::chrono::steady_clock::now();

    const auto D = static_cast<std::size_t>(config.params.dim);
    std::vector<double> x(problem.ids.size() * D, 0.0);
    if (config.initialization == Initialization::Random) {
        Rng rng(config.seed);
        for (double& v : x) v = uniform_real(rng, -config.init_scale, config.init_scale);
    }
    const StressObjective f(problem.ids.size(), config.params.dim, problem.targets, config.params.lambda,
                            config.reduction);
    LbfgsOptions opt;
    opt.memory = config.memory;
    opt.max_iterations = config.max_iterations;
    opt.gradient_tolerance = config.gradient_tolerance;
    const LbfgsResult res =
        minimize_lbfgs([&](std::span<const double> xs, std::span<double> g) { return f.evaluate(xs, g); }, x, opt);

    FitTrace trace;
    trace.iterations = res.history;
    trace.final_grad_norm = res.grad_norm;
    trace.iterations_used = res.iterations;
    trace.stop = res.reason;
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (res.reason == StopReason::Diverged) throw FitDivergence(res.iterations, std::move(trace));

    EmbeddingModel model(config.params);
    for (std::size_t k = 0; k < problem.ids.size(); ++k) {
        model.add_item(problem.ids[k], problem.kappa[k], std::span<const double>(x).subspan(k * D, D));
    }
    return {std::move(model), std::move(trace)};
}

FitResult fit_embedding(const AffinityGraph& graph, const FitConfig& config) {
    config.params.validate();
    if (graph.empty()) throw InvalidArgument("cannot fit an empty graph");
    return fit_embedding(make_problem(graph, config.params.alpha), config);
}

} // namespace simpop
