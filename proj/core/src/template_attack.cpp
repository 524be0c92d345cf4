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

#include "scaeda/template_attack.h"

#include "scaeda/poi.h"
#include "scaeda/random.h"

#include <algorithm>
#include <limits>
#include <numeric>

namespace scaeda {
namespace ta {

ClassCoverageError::ClassCoverageError(std::vector<unsigned> labels,
                                       size_t min_count)
    : Error([&] {
          std::string msg = "classes with fewer than " +
                            std::to_string(min_count) + " profiling traces:";
          for (unsigned l : labels)
              msg += " " + std::to_string(l);
          return msg;
      }()),
      labels_(std::move(labels)) {}

unsigned key_byte_index(const aes::LeakageModel &model) {
    return model.kind == aes::LeakageKind::HD_LAST_ROUND ? model.ct_byte_1
                                                         : model.byte_index;
}

std::vector<unsigned> known_key_labels(const TraceSet &ts,
                                       const aes::LeakageModel &model,
                                       std::optional<uint8_t> key) {
    model.validate();
    const size_t f_pt = ts.field_index(field::PLAINTEXT);
    const bool needs_ct = model.kind == aes::LeakageKind::HD_LAST_ROUND;
    const size_t f_ct = needs_ct ? ts.field_index(field::CIPHERTEXT) : f_pt;
    const size_t f_key = key ? 0 : ts.field_index(field::KEY);
    const unsigned kb = key_byte_index(model);

    std::vector<unsigned> out(ts.n_traces());
    for (size_t i = 0; i < ts.n_traces(); i++) {
        const uint8_t k = key ? *key : ts.meta(f_key, i)[kb];
        out[i] = model.label(ts.meta(f_pt, i), ts.meta(f_ct, i), k);
    }
    return out;
}

void check_class_coverage(std::span<const size_t> counts, size_t min_count) {
    std::vector<unsigned> missing;
    for (size_t c = 0; c < counts.size(); c++)
        if (counts[c] < min_count)
            missing.push_back(static_cast<unsigned>(c));
    if (!missing.empty())
        throw ClassCoverageError(std::move(missing), min_count);
}

namespace {

void check_poi(std::span<const size_t> poi, size_t n_samples) {
    if (poi.empty())
        throw InvalidArgument("empty POI set");
    for (size_t p : poi)
        if (p >= n_samples)
            throw InvalidArgument("POI " + std::to_string(p) +
                                  " out of range for traces of " +
                                  std::to_string(n_samples) + " samples");
}

TemplateSet templates_from_moments(const poi::ClassMoments &m,
                                   const aes::LeakageModel &model,
                                   std::span<const size_t> poi) {
    TemplateSet ts;
    ts.model = model;
    ts.poi.assign(poi.begin(), poi.end());
    ts.templates.resize(m.n_classes);
    for (unsigned c = 0; c < m.n_classes; c++) {
        Template &t = ts.templates[c];
        t.class_label = c;
        t.n_training = m.counts[c];
        t.mean.resize(m.n_columns);
        t.variance.resize(m.n_columns);
        for (size_t j = 0; j < m.n_columns; j++) {
            t.mean[j] = m.mean_at(c, j);
            t.variance[j] = std::max(m.var_at(c, j), VARIANCE_FLOOR);
        }
    }
    return ts;
}

} // namespace

TemplateSet build_templates(const TraceSet &profiling,
                            const aes::LeakageModel &model,
                            std::span<const size_t> poi,
                            std::optional<uint8_t> known_key,
                            size_t min_class_count) {
    check_poi(poi, profiling.n_samples());
    const auto labels = known_key_labels(profiling, model, known_key);
    std::vector<size_t> counts(model.class_count(), 0);
    for (unsigned l : labels)
        counts[l]++;
    check_class_coverage(counts, min_class_count);
    const auto m =
        poi::class_moments(profiling, labels, model.class_count(), poi);
    return templates_from_moments(m, model, poi);
}

TemplateSet build_templates(const TraceSet &profiling,
                            const aes::LeakageModel &model,
                            const Individual &poi,
                            std::optional<uint8_t> known_key,
                            size_t min_class_count) {
    const auto idx = poi.poi();
    return build_templates(profiling, model, idx, known_key, min_class_count);
}

double log_gaussian_score(std::span<const double> values, const Template &tpl) {
    if (values.size() != tpl.mean.size() || values.size() != tpl.variance.size())
        throw InvalidArgument("trace and template dimensions differ");
    double acc = 0.0;
    for (size_t j = 0; j < values.size(); j++)
        acc += gaussian_log_term(values[j], tpl.mean[j], tpl.variance[j]);
    return -0.5 * acc;
}

// ---------------------------------------------------------------------------

KeyScoreAccumulator::KeyScoreAccumulator(unsigned n_classes,
                                         std::span<const double> log_prior,
                                         uint8_t correct_key)
    : n_classes_(n_classes), log_prior_(log_prior.begin(), log_prior.end()),
      correct_key_(correct_key), mix_(log_prior.size()) {
    if (log_prior_.empty())
        throw InvalidArgument("at least one mask group is required");
}

void KeyScoreAccumulator::add_trace(std::span<const double> class_scores,
                                    std::span<const uint16_t, 256> key_labels) {
    const size_t groups = log_prior_.size();
    if (class_scores.size() != groups * n_classes_)
        throw InvalidArgument("class score block has the wrong size");
    if (groups == 1) {
        for (unsigned k = 0; k < 256; k++)
            scores_[k] += class_scores[key_labels[k]];
    } else {
        for (unsigned k = 0; k < 256; k++) {
            double hi = -std::numeric_limits<double>::infinity();
            for (size_t g = 0; g < groups; g++) {
                mix_[g] = class_scores[g * n_classes_ + key_labels[k]] +
                          log_prior_[g];
                hi = std::max(hi, mix_[g]);
            }
            double sum = 0.0;
            for (size_t g = 0; g < groups; g++)
                sum += std::exp(mix_[g] - hi);
            scores_[k] += hi + std::log(sum);
        }
    }
    curve_.push_back(rank_of_correct());
}

unsigned KeyScoreAccumulator::rank_of_correct() const {
    const double s = scores_[correct_key_];
    unsigned better = 0;
    for (unsigned k = 0; k < 256; k++)
        if (scores_[k] > s || (scores_[k] == s && k < correct_key_))
            better++;
    return better + 1;
}

AttackResult KeyScoreAccumulator::finish() const {
    if (curve_.empty())
        throw InvalidArgument("attack set is empty");
    AttackResult r;
    r.log_scores = scores_;
    r.guessing_vector.resize(256);
    std::iota(r.guessing_vector.begin(), r.guessing_vector.end(), uint8_t(0));
    std::stable_sort(r.guessing_vector.begin(), r.guessing_vector.end(),
                     [&](uint8_t a, uint8_t b) { return scores_[a] > scores_[b]; });
    const auto pos = std::find(r.guessing_vector.begin(),
                               r.guessing_vector.end(), correct_key_);
    r.correct_rank = static_cast<unsigned>(pos - r.guessing_vector.begin()) + 1;
    r.ge_curve = curve_;
    return r;
}

void key_labels(const TraceSet &ts, size_t i, const aes::LeakageModel &model,
                std::span<uint16_t, 256> out) {
    const auto pt = ts.meta(field::PLAINTEXT, i);
    const auto ct = model.kind == aes::LeakageKind::HD_LAST_ROUND
                        ? ts.meta(field::CIPHERTEXT, i)
                        : pt;
    for (unsigned k = 0; k < 256; k++)
        out[k] = static_cast<uint16_t>(model.label(pt, ct, static_cast<uint8_t>(k)));
}

uint8_t attack_key(const TraceSet &attack, const aes::LeakageModel &model,
                   std::optional<uint8_t> key) {
    if (key)
        return *key;
    if (attack.n_traces() == 0)
        throw InvalidArgument("attack set is empty");
    const size_t f = attack.field_index(field::KEY);
    const unsigned kb = key_byte_index(model);
    const uint8_t k = attack.meta(f, 0)[kb];
    for (size_t i = 1; i < attack.n_traces(); i++)
        if (attack.meta(f, i)[kb] != k)
            throw InvalidArgument(
                "attack traces do not share a fixed key byte; pass the "
                "correct key explicitly");
    return k;
}

namespace {

void check_compatible(const TraceSet &attack, const TemplateSet &tset) {
    if (tset.poi.empty() || tset.templates.size() != tset.model.class_count())
        throw InvalidArgument("malformed template set");
    for (size_t p : tset.poi)
        if (p >= attack.n_samples())
            throw InvalidArgument("template POI " + std::to_string(p) +
                                  " exceeds the attack trace length");
    for (const auto &t : tset.templates)
        if (t.mean.size() != tset.poi.size())
            throw InvalidArgument("template dimension differs from POI count");
}

AttackResult score(const TraceSet &attack,
                   std::span<const TemplateSet> tsets,
                   std::span<const double> log_prior,
                   std::optional<uint8_t> correct_key) {
    if (attack.n_traces() == 0)
        throw InvalidArgument("attack set is empty");
    const TemplateSet &first = tsets.front();
    const unsigned n_classes = first.model.class_count();
    KeyScoreAccumulator acc(n_classes, log_prior,
                            attack_key(attack, first.model, correct_key));
    std::vector<double> values(first.poi.size());
    std::vector<double> class_scores(tsets.size() * n_classes);
    std::array<uint16_t, 256> labels{};
    for (size_t i = 0; i < attack.n_traces(); i++) {
        auto row = attack.trace(i);
        for (size_t j = 0; j < first.poi.size(); j++)
            values[j] = row[first.poi[j]];
        for (size_t g = 0; g < tsets.size(); g++)
            for (unsigned c = 0; c < n_classes; c++)
                class_scores[g * n_classes + c] =
                    log_gaussian_score(values, tsets[g].templates[c]);
        key_labels(attack, i, first.model, labels);
        acc.add_trace(class_scores, labels);
    }
    return acc.finish();
}

} // namespace

AttackResult rank_keys(const TraceSet &attack, const TemplateSet &tset,
                       std::optional<uint8_t> correct_key) {
    check_compatible(attack, tset);
    const double no_prior[1] = {0.0};
    return score(attack, std::span(&tset, 1), no_prior, correct_key);
}

AttackResult masked_marginal_score(const TraceSet &attack,
                                   std::span<const TemplateSet> tsets_per_mask,
                                   std::span<const double> mask_prior,
                                   std::optional<uint8_t> correct_key) {
    if (tsets_per_mask.empty() || tsets_per_mask.size() != mask_prior.size())
        throw InvalidArgument("need one prior weight per mask template set");
    double total = 0.0;
    for (double p : mask_prior) {
        if (!(p >= 0.0))
            throw InvalidArgument("mask prior weights must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidArgument("mask prior does not sum to 1");
    const auto &first = tsets_per_mask.front();
    for (const auto &ts : tsets_per_mask) {
        check_compatible(attack, ts);
        if (ts.poi != first.poi || ts.model.kind != first.model.kind ||
            key_byte_index(ts.model) != key_byte_index(first.model))
            throw InvalidArgument("mask template sets must share POIs and model");
    }
    std::vector<double> log_prior(mask_prior.size());
    for (size_t g = 0; g < mask_prior.size(); g++)
        log_prior[g] = std::log(mask_prior[g]);
    return score(attack, tsets_per_mask, log_prior, correct_key);
}

std::vector<unsigned> mask_class_labels(const TraceSet &ts) {
    const size_t f = ts.field_index(field::MASK_OUT);
    std::vector<unsigned> out(ts.n_traces());
    for (size_t i = 0; i < ts.n_traces(); i++)
        out[i] = static_cast<unsigned>(aes::hamming_weight(ts.meta(f, i)[0]));
    return out;
}

double mask_class_prior(unsigned j) {
    static constexpr double binom[9] = {1, 8, 28, 56, 70, 56, 28, 8, 1};
    return j < 9 ? binom[j] / 256.0 : 0.0;
}

MaskedTemplates build_mask_class_templates(const TraceSet &profiling,
                                           const aes::LeakageModel &model,
                                           std::span<const size_t> poi,
                                           std::optional<uint8_t> known_key,
                                           size_t min_class_count) {
    check_poi(poi, profiling.n_samples());
    const auto groups = mask_class_labels(profiling);
    MaskedTemplates out;
    double kept = 0.0;
    std::vector<unsigned> failed;
    for (unsigned j = 0; j < 9; j++) {
        std::vector<size_t> members;
        for (size_t i = 0; i < groups.size(); i++)
            if (groups[i] == j)
                members.push_back(i);
        const TraceSet sub = profiling.subset(members);
        try {
            out.sets.push_back(
                build_templates(sub, model, poi, known_key, min_class_count));
        } catch (const ClassCoverageError &) {
            failed.push_back(j);
            continue;
        }
        out.mask_classes.push_back(j);
        out.prior.push_back(mask_class_prior(j));
        kept += mask_class_prior(j);
    }
    if (out.sets.empty())
        throw ClassCoverageError(std::move(failed), min_class_count);
    for (double &p : out.prior)
        p /= kept;
    return out;
}

std::vector<size_t> attack_subset(size_t pool, size_t n_attack, uint64_t seed,
                                  size_t experiment) {
    return sample_without_replacement(pool, n_attack,
                                      splitmix64(seed ^ splitmix64(experiment)));
}

double guessing_entropy(const TraceSet &profiling, const TraceSet &attack_pool,
                        const aes::LeakageModel &model,
                        std::span<const size_t> poi, size_t n_attack,
                        size_t n_experiments, uint64_t seed, AttackMode mode,
                        size_t min_class_count) {
    if (n_attack == 0 || n_attack > attack_pool.n_traces())
        throw InvalidArgument("attack pool holds " +
                              std::to_string(attack_pool.n_traces()) +
                              " traces, cannot draw " + std::to_string(n_attack));
    if (n_experiments == 0)
        throw InvalidArgument("at least one experiment is required");

    TemplateSet plain;
    MaskedTemplates masked;
    if (mode == AttackMode::PLAIN)
        plain = build_templates(profiling, model, poi, {}, min_class_count);
    else
        masked = build_mask_class_templates(profiling, model, poi, {},
                                            min_class_count);

    double total = 0.0;
    for (size_t e = 0; e < n_experiments; e++) {
        const auto idx =
            attack_subset(attack_pool.n_traces(), n_attack, seed, e);
        const TraceSet attack = attack_pool.subset(idx);
        const AttackResult r =
            mode == AttackMode::PLAIN
                ? rank_keys(attack, plain)
                : masked_marginal_score(attack, masked.sets, masked.prior);
        total += r.correct_rank;
    }
    return total / double(n_experiments);
}

} // namespace ta
} // namespace scaeda
