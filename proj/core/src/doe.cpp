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

#include "scaeda/doe.h"

#include <cmath>

namespace scaeda {
namespace doe {

std::vector<RunPoint> full_factorial_plan(const std::array<FactorSpec, 3> &factors) {
    for (const auto &f : factors)
        if (f.low == f.high)
            throw InvalidArgument("factor '" + f.name +
                                  "' has identical low and high settings");
    std::vector<RunPoint> plan;
    for (int run = 0; run < 8; run++) {
        RunPoint p;
        for (int f = 0; f < 3; f++) {
            const bool high = (run >> (2 - f)) & 1;
            p.sign[f] = high ? 1 : -1;
            p.level[f] = high ? factors[f].high : factors[f].low;
        }
        plan.push_back(p);
    }
    return plan;
}

EffectTable compute_effects(std::span<const double, 8> responses) {
    EffectTable t;
    std::copy(responses.begin(), responses.end(), t.responses.begin());
    for (size_t e = 0; e < 7; e++) {
        // Bit mask over (A, B, C) of the factors in this column.
        static constexpr int columns[7] = {0b100, 0b010, 0b001, 0b110,
                                           0b101, 0b011, 0b111};
        double plus = 0.0, minus = 0.0;
        for (int run = 0; run < 8; run++) {
            int sign = 1;
            for (int f = 0; f < 3; f++)
                if (columns[e] & (0b100 >> f))
                    sign *= ((run >> (2 - f)) & 1) ? 1 : -1;
            (sign > 0 ? plus : minus) += responses[run];
        }
        t.effects[e] = plus / 4.0 - minus / 4.0;
    }
    return t;
}

DoeResult run_doe(const std::array<FactorSpec, 3> &factors,
                  const eda::EDAConfig &base, const eda::EvalConfig &eval,
                  const FitnessFactory &make_fitness, Response response) {
    const auto plan = full_factorial_plan(factors);
    DoeResult out;
    std::array<double, 8> responses{};
    for (size_t run = 0; run < plan.size(); run++) {
        eda::EDAConfig cfg = base;
        eda::EvalConfig ecfg = eval;
        for (size_t f = 0; f < 3; f++) {
            const double v = plan[run].level[f];
            switch (factors[f].binder) {
            case Binder::CORRECTION_FACTOR:
                ecfg.correction_factor = v;
                break;
            case Binder::N_ITERATIONS:
                cfg.n_iterations = static_cast<size_t>(std::llround(v));
                break;
            case Binder::POPULATION_SIZE:
                cfg.population_size = static_cast<size_t>(std::llround(v));
                break;
            }
        }
        try {
            const auto fitness = make_fitness(ecfg);
            const auto res = eda::run_eda(cfg, *fitness);
            DoeRun r{plan[run], res.best, 0.0};
            if (response == Response::BEST_EVAL) {
                r.response = *res.best.eval;
            } else {
                double ge = 0.0;
                for (unsigned g : res.best.ge)
                    ge += g;
                r.response = ge / double(res.best.ge.size());
            }
            responses[run] = r.response;
            out.runs.push_back(std::move(r));
        } catch (const std::exception &e) {
            throw Error("DoE run " + std::to_string(run + 1) + " failed: " +
                        e.what());
        }
    }
    out.effects = compute_effects(responses);
    return out;
}

} // namespace doe
} // namespace scaeda
