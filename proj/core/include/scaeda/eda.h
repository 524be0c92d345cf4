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

#include "scaeda/aes.h"
#include "scaeda/individual.h"
#include "scaeda/poi.h"
#include "scaeda/template_attack.h"
#include "scaeda/traces.h"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scaeda {
namespace eda {

/// How per-device ranks are combined into ge_All.
enum class GeAggregation {
    /// ge_All = prod_d ge_d / 256.
    PRODUCT,
    /// ge_All = sum_d ge_d / 256.
    SUM,
};

GeAggregation parse_aggregation(std::string_view name);
std::string to_string(GeAggregation a);

struct EvalConfig {
    double correction_factor = 10.0;
    /// Trace-length normalizer of the success branch; 0 means "use the
    /// trace length".
    size_t eval_n_samples = 0;
    GeAggregation aggregation = GeAggregation::PRODUCT;
    /// Attack traces drawn from each attack set; 0 uses the whole set.
    size_t n_attack = 0;
    ta::AttackMode mode = ta::AttackMode::PLAIN;
    /// Selects which attack traces are drawn.
    uint64_t seed = 0;
    size_t min_class_count = ta::DEFAULT_MIN_CLASS_COUNT;

    void validate() const;
};

/// Fitness of a candidate attacked on a single device:
/// -CF * ge / 256, or -CF * (n_poi / n_samples) * ge / 256 when ge == 1.
double single_device_eval(unsigned ge, size_t n_poi, size_t n_samples,
                          double correction_factor);

/// Fitness of a candidate attacked on several devices; the n_poi / n_samples
/// factor applies when every device reaches rank 1.
double multi_device_eval(std::span<const unsigned> ge, size_t n_poi,
                         size_t n_samples, double correction_factor,
                         GeAggregation aggregation);

/// Evaluates one individual with a freshly built template attack. Fills the
/// individual's eval and ge cache and returns the eval. An empty POI set or
/// a class-coverage failure scores -CF.
double evaluate_single(Individual &ind, const TraceSet &profiling,
                       const TraceSet &attack, const aes::LeakageModel &model,
                       const EvalConfig &cfg);

/// As evaluate_single, with templates from \p profiling applied to every
/// attack set.
double evaluate_multi(Individual &ind, const TraceSet &profiling,
                      std::span<const TraceSet> attacks,
                      const aes::LeakageModel &model, const EvalConfig &cfg);

/// Objective optimized by run_eda.
class Fitness {
  public:
    virtual ~Fitness() = default;
    /// Trace length (individual size).
    virtual size_t length() const = 0;
    /// Fills ind.eval and ind.ge.
    virtual void evaluate(Individual &ind) const = 0;
};

/// Template-attack fitness with per-sample statistics precomputed once.
///
/// Produces the same ranks and evals as evaluate_multi, but the per-class
/// moments and the per-trace Gaussian terms of every sample are computed up
/// front, so scoring an individual only sums the selected columns.
class TemplateFitness : public Fitness {
  public:
    TemplateFitness(const TraceSet &profiling, std::vector<TraceSet> attacks,
                    const aes::LeakageModel &model, const EvalConfig &cfg);

    size_t length() const override { return n_samples_; }
    void evaluate(Individual &ind) const override;

    const EvalConfig &config() const { return cfg_; }
    void set_correction_factor(double cf);
    size_t n_devices() const { return devices_.size(); }

  private:
    struct Device {
        size_t n_traces = 0;
        uint8_t key = 0;
        /// [trace][256] key labels.
        std::vector<uint16_t> labels;
        /// [trace][sample][group][class] Gaussian log terms, or the raw
        /// [trace][sample] values when the term table is too large.
        std::vector<double> terms;
    };

    void score(const std::vector<size_t> &poi, std::vector<unsigned> &ranks) const;

    EvalConfig cfg_;
    aes::LeakageModel model_;
    size_t n_samples_ = 0;
    unsigned n_classes_ = 0;
    size_t n_groups_ = 1;
    bool coverage_ok_ = true;
    std::vector<double> log_prior_;
    std::vector<Device> devices_;
    /// Floored moments [sample][group][class]; only kept when terms are not
    /// cached.
    std::vector<double> mean_;
    std::vector<double> var_;
};

struct MarginalModel {
    std::vector<double> probs;
};

enum class InitKind { UNIFORM, FROM_GRAPHIC };

struct EDAConfig {
    size_t population_size = 20;
    /// Selected individuals per generation; 0 means population_size / 2.
    size_t n_selected = 0;
    size_t n_iterations = 10;
    uint64_t seed = 0;
    InitKind init = InitKind::UNIFORM;
    /// Bernoulli p of UNIFORM init, base p of FROM_GRAPHIC init.
    double init_p = 0.1;
    std::optional<poi::SelectionGraphic> graphic;
    bool elitism = true;
    /// Marginal clamp bounds; 0 means 1/T and 1 - 1/T.
    double p_floor = 0.0;
    double p_ceil = 0.0;
    /// Stop early once every marginal's binary entropy (bits) is below this
    /// value; 0 disables the check.
    double entropy_stop = 0.0;

    size_t selected() const {
        return n_selected ? n_selected : population_size / 2;
    }
    void validate(size_t length) const;
};

/// R individuals with independent Bernoulli(p) bits.
Population init_uniform(size_t length, size_t r, double p, uint64_t seed);

/// R individuals with bit n ~ Bernoulli(alpha(n) * base_p), alpha being the
/// min-max normalized graphic. Falls back to init_uniform for a constant
/// graphic.
Population init_from_graphic(const poi::SelectionGraphic &g, size_t r,
                             double base_p, uint64_t seed);

/// The N best individuals: higher eval first, then fewer POIs, then the
/// lexicographically smaller bit vector.
Population select_top_n(const Population &pop, size_t n);

/// Sorts a whole evaluated population with the select_top_n order.
void sort_population(Population &pop);

MarginalModel learn_marginals(const Population &selected, double p_floor,
                              double p_ceil);

/// R individuals drawn from the marginals; individual r of iteration l uses
/// the stream keyed by (seed, l, r).
Population sample_population(const MarginalModel &m, size_t r, uint64_t seed,
                             size_t iteration = 1);

struct IterationRecord {
    size_t iteration = 0;
    /// Evaluated population, best first.
    Population population;
    /// Marginals learned from this iteration's selection.
    MarginalModel marginals;
};

struct EdaResult {
    std::vector<IterationRecord> records;
    Individual best;
};

EdaResult run_eda(const EDAConfig &cfg, const Fitness &fitness);

/// Largest binary entropy (bits) over the marginals.
double max_marginal_entropy(const MarginalModel &m);

} // namespace eda
} // namespace scaeda
