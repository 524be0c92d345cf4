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
#include "scaeda/traces.h"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace scaeda {
namespace ta {

/// Lower bound applied to every template variance.
inline constexpr double VARIANCE_FLOOR = 1e-12;
inline constexpr size_t DEFAULT_MIN_CLASS_COUNT = 4;

/// Gaussian template with diagonal covariance over the selected POIs.
struct Template {
    unsigned class_label = 0;
    std::vector<double> mean;
    std::vector<double> variance;
    size_t n_training = 0;
};

struct TemplateSet {
    std::vector<Template> templates;
    aes::LeakageModel model;
    std::vector<size_t> poi;
};

/// Some class of the model's label domain has too few profiling traces.
class ClassCoverageError : public Error {
  public:
    ClassCoverageError(std::vector<unsigned> labels, size_t min_count);
    const std::vector<unsigned> &labels() const { return labels_; }

  private:
    std::vector<unsigned> labels_;
};

/// Key byte of the metadata the model's hypotheses refer to.
unsigned key_byte_index(const aes::LeakageModel &model);

/// Class label of every trace under the known key. The key byte comes from
/// the "key" metadata field unless \p key overrides it.
std::vector<unsigned> known_key_labels(const TraceSet &ts,
                                       const aes::LeakageModel &model,
                                       std::optional<uint8_t> key = {});

/// Throws ClassCoverageError when a class has fewer than min_count members.
void check_class_coverage(std::span<const size_t> counts, size_t min_count);

TemplateSet build_templates(const TraceSet &profiling,
                            const aes::LeakageModel &model,
                            std::span<const size_t> poi,
                            std::optional<uint8_t> known_key = {},
                            size_t min_class_count = DEFAULT_MIN_CLASS_COUNT);
TemplateSet build_templates(const TraceSet &profiling,
                            const aes::LeakageModel &model,
                            const Individual &poi,
                            std::optional<uint8_t> known_key = {},
                            size_t min_class_count = DEFAULT_MIN_CLASS_COUNT);

/// One term of the diagonal Gaussian log-density:
/// log(2 pi var) + (x - mean)^2 / var. The log-density is -1/2 times the sum
/// of the terms over all POIs.
inline double gaussian_log_term(double x, double mean, double var) {
    const double r = x - mean;
    return std::log(2.0 * 3.14159265358979323846 * var) + r * r / var;
}

/// log N(t; m, diag(sigma^2)).
double log_gaussian_score(std::span<const double> values, const Template &tpl);

struct AttackResult {
    /// Key hypotheses in decreasing score order.
    std::vector<uint8_t> guessing_vector;
    /// 1-based rank of the correct key (1 = recovered).
    unsigned correct_rank = 0;
    /// Entry i: rank of the correct key after the first i + 1 traces.
    std::vector<unsigned> ge_curve;
    std::array<double, 256> log_scores{};
};

/// Accumulates per-key log-likelihoods trace by trace.
///
/// Each added trace supplies log p(t | class, mask) for every mask group and
/// class, and the class label of every key hypothesis. With a single mask
/// group this is the plain template attack; with several, p(t | k) is the
/// prior-weighted mixture over the groups.
class KeyScoreAccumulator {
  public:
    KeyScoreAccumulator(unsigned n_classes, std::span<const double> log_prior,
                        uint8_t correct_key);

    void add_trace(std::span<const double> class_scores,
                   std::span<const uint16_t, 256> key_labels);
    unsigned rank_of_correct() const;
    AttackResult finish() const;

  private:
    unsigned n_classes_;
    std::vector<double> log_prior_;
    uint8_t correct_key_;
    std::array<double, 256> scores_{};
    std::vector<unsigned> curve_;
    std::vector<double> mix_;
};

/// Class labels of all 256 key hypotheses for trace \p i.
void key_labels(const TraceSet &ts, size_t i, const aes::LeakageModel &model,
                std::span<uint16_t, 256> out);

/// Correct key byte of an attack set: the override if given, else the
/// (constant) key metadata byte.
uint8_t attack_key(const TraceSet &attack, const aes::LeakageModel &model,
                   std::optional<uint8_t> key);

AttackResult rank_keys(const TraceSet &attack, const TemplateSet &tset,
                       std::optional<uint8_t> correct_key = {});

/// Template attack marginalizing an unknown mask:
/// p(t | k) = sum_m p(t | k, m) p(m).
AttackResult masked_marginal_score(const TraceSet &attack,
                                   std::span<const TemplateSet> tsets_per_mask,
                                   std::span<const double> mask_prior,
                                   std::optional<uint8_t> correct_key = {});

/// Template sets grouped by the Hamming weight of the output mask.
struct MaskedTemplates {
    std::vector<TemplateSet> sets;
    std::vector<double> prior;
    /// HW(m_out) value of each kept set.
    std::vector<unsigned> mask_classes;
};

/// Mask-class label (HW of mask_out) of every trace.
std::vector<unsigned> mask_class_labels(const TraceSet &ts);

/// Binomial weight C(8, j) / 256 of mask class j.
double mask_class_prior(unsigned j);

/// Builds one template set per HW(m_out) class. Classes whose set fails
/// class coverage are left out and the binomial prior is renormalized over
/// the rest; ClassCoverageError is raised only if no class survives.
MaskedTemplates build_mask_class_templates(
    const TraceSet &profiling, const aes::LeakageModel &model,
    std::span<const size_t> poi, std::optional<uint8_t> known_key = {},
    size_t min_class_count = DEFAULT_MIN_CLASS_COUNT);

enum class AttackMode { PLAIN, MASK_MARGINAL };

/// Indices of the attack traces used by experiment \p experiment.
std::vector<size_t> attack_subset(size_t pool, size_t n_attack, uint64_t seed,
                                  size_t experiment);

/// Mean correct-key rank over n_experiments resamplings of n_attack traces.
double guessing_entropy(const TraceSet &profiling, const TraceSet &attack_pool,
                        const aes::LeakageModel &model,
                        std::span<const size_t> poi, size_t n_attack,
                        size_t n_experiments, uint64_t seed,
                        AttackMode mode = AttackMode::PLAIN,
                        size_t min_class_count = DEFAULT_MIN_CLASS_COUNT);

} // namespace ta
} // namespace scaeda
