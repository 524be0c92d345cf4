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

#include "scaeda/eda.h"
#include "scaeda/poi.h"
#include "scaeda/sim.h"
#include "scaeda/template_attack.h"

#include <benchmark/benchmark.h>

using namespace scaeda;

namespace {

const aes::LeakageModel HW{aes::LeakageKind::HW_SBOX};

sim::DeviceProfile device() {
    sim::DeviceProfile p;
    p.noise_sigma = 5.0;
    p.baseline_amplitude = 1.0;
    p.value_positions = {60, 140, 250, 330, 420};
    p.value_coeffs = {1.0, 0.8, 1.2, 0.9, 1.0};
    return p;
}

TraceSet traces(size_t n, uint64_t seed, bool fixed_key) {
    sim::SimConfig cfg;
    cfg.n_traces = n;
    cfg.n_samples = 500;
    cfg.seed = seed;
    if (fixed_key) {
        std::array<uint8_t, 16> k{};
        k.fill(0x2b);
        cfg.fixed_key = k;
    }
    return sim::simulate(device(), cfg);
}

void BM_Simulate(benchmark::State &state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(traces(size_t(state.range(0)), 1, false));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Sost(benchmark::State &state) {
    const auto prof = traces(5000, 2, false);
    const auto labels = ta::known_key_labels(prof, HW);
    for (auto _ : state)
        benchmark::DoNotOptimize(poi::sost(prof, labels));
}
BENCHMARK(BM_Sost)->Unit(benchmark::kMillisecond);

void BM_EvaluateMulti(benchmark::State &state) {
    const auto prof = traces(5000, 3, false);
    const std::vector<TraceSet> attacks = {traces(300, 4, true)};
    const auto proto = eda::init_uniform(500, 1, 0.05, 5)[0];
    for (auto _ : state) {
        Individual ind = proto;
        benchmark::DoNotOptimize(
            eda::evaluate_multi(ind, prof, attacks, HW, eda::EvalConfig{}));
    }
}
BENCHMARK(BM_EvaluateMulti)->Unit(benchmark::kMillisecond);

void BM_TemplateFitness(benchmark::State &state) {
    const auto prof = traces(5000, 3, false);
    const eda::TemplateFitness fitness(prof, {traces(300, 4, true)}, HW, eda::EvalConfig{});
    const auto proto = eda::init_uniform(500, 1, 0.05, 5)[0];
    for (auto _ : state) {
        Individual ind = proto;
        fitness.evaluate(ind);
        benchmark::DoNotOptimize(ind.eval);
    }
}
BENCHMARK(BM_TemplateFitness)->Unit(benchmark::kMicrosecond);

void BM_RunEda(benchmark::State &state) {
    const auto prof = traces(5000, 3, false);
    const eda::TemplateFitness fitness(prof, {traces(300, 4, true)}, HW, eda::EvalConfig{});
    eda::EDAConfig cfg;
    cfg.n_iterations = 10;
    for (auto _ : state)
        benchmark::DoNotOptimize(eda::run_eda(cfg, fitness));
}
BENCHMARK(BM_RunEda)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
