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

#include <functional>
#include <span>
#include <vector>

namespace simpop {

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 500;
    /// Stop once ||g|| <= gradient_tolerance * ||g_0||.
    double gradient_tolerance = 1e-4;
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
};

enum class StopReason {
    Converged,
    StationaryStart, ///< initial gradient exactly zero
    MaxIterations,
    LineSearchFailed, ///< no decrease along either direction; precision limit
    Diverged,         ///< non-finite objective or gradient
};

const char* to_string(StopReason reason) noexcept;

struct IterationRecord {
    int iteration;
    double objective;
    double grad_norm;
};

struct LbfgsResult {
    StopReason reason = StopReason::MaxIterations;
    int iterations = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    /// Entry 0 is the starting point; one entry per accepted step after it.
    std::vector<IterationRecord> history;
    std::size_t evaluations = 0;
    std::size_t rejected_pairs = 0;
};

/// Evaluates f(x) and writes its gradient into `grad`.
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Limited-memory BFGS with Armijo backtracking. Falls back to the steepest
/// descent direction when no curvature pair is stored or the quasi-Newton
/// direction is not a descent direction. `x` is updated in place.
LbfgsResult minimize_lbfgs(const ObjectiveFn& fn, std::span<double> x, const LbfgsOptions& options = {});

} // namespace simpop
