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
#include "simpop/errors.hpp"
#include "simpop/hms_model.hpp"
#include "simpop/optimizer.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace simpop {

/// Target squared distance for one unordered pair of dense item indices.
struct Target {
    std::uint32_t i;
    std::uint32_t j;
    double d2;
};

struct ReductionOptions {
    int threads = 1;
    /// Item-centric accumulation over a fixed chunking: bit-identical results
    /// for any thread count. The pair-centric path is faster but its
    /// floating-point summation order depends on scheduling.
    bool deterministic = true;
};

/// f(x) = sum_P (|x_i - x_j|^2 - d2_ij)^2 + lambda sum_i |x_i|^2 over a flat
/// row-major coordinate array (n_items x dim).
class StressObjective {
public:
    StressObjective(std::size_t n_items, int dim, std::vector<Target> targets, double lambda,
                    ReductionOptions reduction = {});

    std::size_t n_items() const noexcept { return n_items_; }
    int dim() const noexcept { return dim_; }
    std::span<const Target> targets() const noexcept { return targets_; }

    double value(std::span<const double> x) const;
    /// Returns f(x) and writes the gradient: per pair 4 (x_i - x_j) r_ij,
    /// plus 2 lambda x_i.
    double evaluate(std::span<const double> x, std::span<double> grad) const;

private:
    double evaluate_by_item(std::span<const double> x, std::span<double> grad) const;
    double evaluate_by_pair(std::span<const double> x, std::span<double> grad) const;
    void check_size(std::size_t size) const;

    struct Link {
        std::uint32_t other;
        double d2;
    };

    std::size_t n_items_;
    int dim_;
    std::vector<Target> targets_;
    double lambda_;
    ReductionOptions reduction_;
    std::vector<std::size_t> offsets_; // item-centric adjacency
    std::vector<Link> links_;
};

using CoordinateMap = std::map<std::string, std::vector<double>>;
using TargetMap = std::map<std::pair<std::string, std::string>, double>;

/// Keyed forms of the objective and gradient. Throw MissingItemError naming
/// an item that has a target but no coordinates.
double objective(const CoordinateMap& coords, const TargetMap& targets, double lambda);
CoordinateMap gradient(const CoordinateMap& coords, const TargetMap& targets, double lambda);

enum class Initialization { Random, Zero };

struct FitConfig {
    ModelParams params;
    std::uint64_t seed = 1;
    double init_scale = 1.0;
    int max_iterations = 500;
    /// Relative to the initial gradient norm.
    double gradient_tolerance = 1e-4;
    int memory = 10;
    ReductionOptions reduction;
    /// Zero exists to reproduce the stationary all-equal start.
    Initialization initialization = Initialization::Random;

    void validate() const;
};

struct FitTrace {
    std::vector<IterationRecord> iterations;
    double final_grad_norm = 0.0;
    int iterations_used = 0;
    double wall_seconds = 0.0;
    StopReason stop = StopReason::MaxIterations;
};

/// Trace export: `iteration,objective,grad_norm`.
std::string serialize_trace(const FitTrace& trace);

class FitDivergence : public DivergenceError {
public:
    FitDivergence(int iteration, FitTrace trace)
        : DivergenceError(iteration, "non-finite objective or gradient"), trace_(std::move(trace)) {}
    const FitTrace& trace() const noexcept { return trace_; }

private:
    FitTrace trace_;
};

/// Items, hidden degrees and target distances ready for fitting.
struct EmbeddingProblem {
    std::vector<std::string> ids;
    std::vector<double> kappa;
    std::vector<Target> targets;
};

/// Targets d2_ij = kappa_i kappa_j (p_ij^(-1/alpha) - 1) for all pairs of P.
EmbeddingProblem make_problem(const AffinityGraph& graph, double alpha);

struct FitResult {
    EmbeddingModel model;
    FitTrace trace;
};

/// Throws FitDivergence when the descent produces non-finite values.
FitResult fit_embedding(const EmbeddingProblem& problem, const FitConfig& config);
FitResult fit_embedding(const AffinityGraph& graph, const FitConfig& config);

} // namespace simpop
