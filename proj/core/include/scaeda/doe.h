/*
 * SPDX-FileCopyrightText: <text>Copyright 2026 The scaeda Authors</text>
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * This file is part of scaeda, a side-channel template attack toolkit.
 */

#pragma once

#include "scaeda/eda.h"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace scaeda {
namespace doe {

/// Configuration field a factor drives.
enum class Binder { CORRECTION_FACTOR, N_ITERATIONS, POPULATION_SIZE };

struct FactorSpec {
    std::string name;
    double low = 0.0;
    double high = 0.0;
    Binder binder = Binder::CORRECTION_FACTOR;
};

/// One run of the 2^3 design.
struct RunPoint {
    std::array<double, 3> level{};
    /// -1 for the low setting, +1 for the high one.
    std::array<int, 3> sign{};
};

/// The 8 runs, with factor A varying slowest and C fastest:
/// (---), (--+), (-+-), (-++), (+--), (+-+), (++-), (+++).
std::vector<RunPoint> full_factorial_plan(const std::array<FactorSpec, 3> &factors);

/// Names of the seven effects, in EffectTable order.
inline constexpr std::array<const char *, 7> EFFECT_NAMES = {
    "A", "B", "C", "AB", "AC", "BC", "ABC"};

struct EffectTable {
    std::array<double, 8> responses{};
    /// A, B, C, AB, AC, BC, ABC.
    std::array<double, 7> effects{};
};

/// Effect of each column: mean response where its sign is +1 minus mean
/// response where it is -1. Responses are in plan order.
EffectTable compute_effects(std::span<const double, 8> responses);

enum class Response { BEST_EVAL, BEST_GE };

struct DoeRun {
    RunPoint point;
    Individual best;
    double response = 0.0;
};

struct DoeResult {
    std::vector<DoeRun> runs;
    EffectTable effects;
};

/// Builds the fitness for one run's evaluation settings.
using FitnessFactory =
    std::function<std::unique_ptr<eda::Fitness>(const eda::EvalConfig &)>;

/// Runs the EDA once per plan row with the factor levels applied to the base
/// configurations; N follows R as R / 2 unless the base sets it explicitly.
DoeResult run_doe(const std::array<FactorSpec, 3> &factors,
                  const eda::EDAConfig &base, const eda::EvalConfig &eval,
                  const FitnessFactory &make_fitness,
                  Response response = Response::BEST_EVAL);

} // namespace doe
} // namespace scaeda
