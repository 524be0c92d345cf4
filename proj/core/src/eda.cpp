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

#include "scaeda/random.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scaeda {
namespace eda {

GeAggregation parse_aggregation(std::string_view name) {
    if (name == "product")
        return GeAggregation::PRODUCT;
    if (name == "sum")
        return GeAggregation::SUM;
    throw InvalidArgument("unknown ge aggregation '" + std::string(name) + "'");
}

std::string to_string(GeAggregation a) {
    return a == GeAggregation::PRODUCT ? "product" : "sum";
}

void EvalConfig::validate() const {
    if (!(correction_factor > 0.0))
        throw InvalidArgument("correction factor must be > 0");
    if (min_class_count < 1)
        throw InvalidArgument("min_class_count must be >= 1");
}

double single_device_eval(unsigned ge, size_t n_poi, size_t n_samples,
                          double correction_factor) {
    const unsigned ranks[1] = {ge};
    return multi_device_eval(ranks, n_poi, n_samples, correction_factor,
                             GeAggregation::PRODUCT);
}

double multi_device_eval(std::span<const unsigned> ge, size_t n_poi,
                         size_t n_samples, double correction_factor,
                         GeAggregation aggregation) {
    if (ge.empty())
        throw InvalidArgument("at least one device rank is required");
    if (n_samples == 0)
        throw InvalidArgument("eval n_samples must be >= 1");
    double all = aggregation == GeAggregation::PRODUCT ? 1.0 : 0.0;
    bool success = true;
    for (unsigned g : ge) {
        if (g < 1 || g > 256)
            throw InvalidArgument("rank must be in [1, 256]");
        if (aggregation == GeAggregation::PRODUCT)
            all *= double(g) / 256.0;
        else
            all += double(g) / 256.0;
        success = success && g == 1;
    }
    if (success)
        return -correction_factor * (double(n_poi) / double(n_samples)) * all;
    return -correction_factor * all;
}

// ---------------------------------------------------------------------------
// Reference evaluation

namespace {

size_t effective_attack(const TraceSet &attack, const EvalConfig &cfg) {
    return cfg.n_attack ? cfg.n_attack : attack.n_traces();
}

void store_sentinel(Individual &ind, size_t n_devices, const EvalConfig &cfg) {
    ind.ge.assign(n_devices, 256);
    ind.eval = -cfg.correction_factor;
}

} // namespace

double evaluate_single(Individual &ind, const TraceSet &profiling,
                       const TraceSet &attack, const aes::LeakageModel &model,
                       const EvalConfig &cfg) {
    return evaluate_multi(ind, profiling, std::span(&attack, 1), model, cfg);
}

double evaluate_multi(Individual &ind, const TraceSet &profiling,
                      std::span<const TraceSet> attacks,
                      const aes::LeakageModel &model, const EvalConfig &cfg) {
    if (ind.eval)
        return *ind.eval;
    cfg.validate();
    if (attacks.empty())
        throw InvalidArgument("at least one attack set is required");
    const auto poi = ind.poi();
    if (poi.empty()) {
        store_sentinel(ind, attacks.size(), cfg);
        return *ind.eval;
    }
    std::vector<unsigned> ranks;
    try {
        for (const auto &attack : attacks)
            ranks.push_back(static_cast<unsigned>(ta::guessing_entropy(
                profiling, attack, model, poi, effective_attack(attack, cfg), 1,
                cfg.seed, cfg.mode, cfg.min_class_count)));
    } catch (const ta::ClassCoverageError &) {
        store_sentinel(ind, attacks.size(), cfg);
        return *ind.eval;
    }
    const size_t n = cfg.eval_n_samples ? cfg.eval_n_samples : profiling.n_samples();
    ind.ge.assign(ranks.begin(), ranks.end());
    ind.eval = multi_device_eval(ranks, poi.size(), n, cfg.correction_factor,
                                 cfg.aggregation);
    return *ind.eval;
}

// ---------------------------------------------------------------------------
// Precomputed evaluation

namespace {

// Above this many cached terms the Gaussian terms are computed on demand.
constexpr size_t kTermBudget = size_t(1) << 24;

} // namespace

TemplateFitness::TemplateFitness(const TraceSet &profiling,
                                 std::vector<TraceSet> attacks,
                                 const aes::LeakageModel &model,
                                 const EvalConfig &cfg)
    : cfg_(cfg), model_(model), n_samples_(profiling.n_samples()),
      n_classes_(model.class_count()) {
    cfg_.validate();
    model_.validate();
    if (attacks.empty())
        throw InvalidArgument("at least one attack set is required");
    for (const auto &a : attacks)
        if (a.n_samples() != n_samples_)
            throw InvalidArgument("attack and profiling traces differ in length");

    // Per-group class moments over every sample. A single group for the
    // plain attack, one group per HW(m_out) class for the masked one.
    std::vector<poi::ClassMoments> moments;
    if (cfg_.mode == ta::AttackMode::PLAIN) {
        const auto labels = ta::known_key_labels(profiling, model_);
        auto m = poi::class_moments(profiling, labels, n_classes_);
        coverage_ok_ = std::all_of(m.counts.begin(), m.counts.end(),
                                   [&](size_t c) { return c >= cfg_.min_class_count; });
        moments.push_back(std::move(m));
        log_prior_ = {0.0};
    } else {
        const auto groups = ta::mask_class_labels(profiling);
        std::vector<double> prior;
        double kept = 0.0;
        for (unsigned j = 0; j < 9; j++) {
            std::vector<size_t> members;
            for (size_t i = 0; i < groups.size(); i++)
                if (groups[i] == j)
                    members.push_back(i);
            const TraceSet sub = profiling.subset(members);
            const auto labels = ta::known_key_labels(sub, model_);
            auto m = poi::class_moments(sub, labels, n_classes_);
            if (!std::all_of(m.counts.begin(), m.counts.end(),
                             [&](size_t c) { return c >= cfg_.min_class_count; }))
                continue;
            moments.push_back(std::move(m));
            prior.push_back(ta::mask_class_prior(j));
            kept += ta::mask_class_prior(j);
        }
        coverage_ok_ = !moments.empty();
        for (double &p : prior)
            p /= kept;
        for (double p : prior)
            log_prior_.push_back(std::log(p));
    }
    n_groups_ = std::max<size_t>(moments.size(), 1);
    if (!coverage_ok_)
        return;

    // Floored moments laid out [sample][group][class].
    const size_t block = n_groups_ * n_classes_;
    std::vector<double> mean(n_samples_ * block), var(n_samples_ * block);
    for (size_t s = 0; s < n_samples_; s++)
        for (size_t g = 0; g < n_groups_; g++)
            for (unsigned c = 0; c < n_classes_; c++) {
                mean[s * block + g * n_classes_ + c] = moments[g].mean_at(c, s);
                var[s * block + g * n_classes_ + c] =
                    std::max(moments[g].var_at(c, s), ta::VARIANCE_FLOOR);
            }

    size_t total_terms = 0;
    for (const auto &a : attacks)
        total_terms += effective_attack(a, cfg_) * n_samples_ * block;
    const bool cache_terms = total_terms <= kTermBudget;

    for (const auto &pool : attacks) {
        const auto idx = ta::attack_subset(pool.n_traces(),
                                           effective_attack(pool, cfg_),
                                           cfg_.seed, 0);
        const TraceSet attack = pool.subset(idx);
        Device d;
        d.n_traces = attack.n_traces();
        d.key = ta::attack_key(attack, model_, {});
        d.labels.resize(d.n_traces * 256);
        for (size_t i = 0; i < d.n_traces; i++)
            ta::key_labels(attack, i, model_,
                           std::span<uint16_t, 256>(&d.labels[i * 256], 256));
        if (cache_terms) {
            d.terms.resize(d.n_traces * n_samples_ * block);
            for (size_t i = 0; i < d.n_traces; i++) {
                auto row = attack.trace(i);
                for (size_t s = 0; s < n_samples_; s++) {
                    double *out = &d.terms[(i * n_samples_ + s) * block];
                    const double *mu = &mean[s * block];
                    const double *v = &var[s * block];
                    for (size_t b = 0; b < block; b++)
                        out[b] = ta::gaussian_log_term(row[s], mu[b], v[b]);
                }
            }
        } else {
            // Keep the raw samples and the moments; terms are formed per
            // evaluation.
            d.terms.assign(attack.samples().begin(), attack.samples().end());
        }
        devices_.push_back(std::move(d));
    }
    if (!cache_terms) {
        mean_ = std::move(mean);
        var_ = std::move(var);
    }
}

void TemplateFitness::set_correction_factor(double cf) {
    if (!(cf > 0.0))
        throw InvalidArgument("correction factor must be > 0");
    cfg_.correction_factor = cf;
}

void TemplateFitness::score(const std::vector<size_t> &poi,
                            std::vector<unsigned> &ranks) const {
    const size_t block = n_groups_ * n_classes_;
    const bool cached = mean_.empty();
    std::vector<double> cls(block);
    ranks.clear();
    for (const auto &d : devices_) {
        ta::KeyScoreAccumulator acc(n_classes_, log_prior_, d.key);
        for (size_t i = 0; i < d.n_traces; i++) {
            std::fill(cls.begin(), cls.end(), 0.0);
            for (size_t s : poi) {
                if (cached) {
                    const double *t = &d.terms[(i * n_samples_ + s) * block];
                    for (size_t b = 0; b < block; b++)
                        cls[b] += t[b];
                } else {
                    const double x = d.terms[i * n_samples_ + s];
                    const double *mu = &mean_[s * block];
                    const double *v = &var_[s * block];
                    for (size_t b = 0; b < block; b++)
                        cls[b] += ta::gaussian_log_term(x, mu[b], v[b]);
                }
            }
            for (double &c : cls)
                c = -0.5 * c;
            acc.add_trace(cls, std::span<const uint16_t, 256>(&d.labels[i * 256], 256));
        }
        ranks.push_back(acc.rank_of_correct());
    }
}

void TemplateFitness::evaluate(Individual &ind) const {
    if (ind.eval)
        return;
    if (ind.size() != n_samples_)
        throw InvalidArgument("individual length differs from trace length");
    const auto poi = ind.poi();
    if (poi.empty() || !coverage_ok_) {
        store_sentinel(ind, devices_.empty() ? 1 : devices_.size(), cfg_);
        return;
    }
    std::vector<unsigned> ranks;
    score(poi, ranks);
    const size_t n = cfg_.eval_n_samples ? cfg_.eval_n_samples : n_samples_;
    ind.ge.assign(ranks.begin(), ranks.end());
    ind.eval = multi_device_eval(ranks, poi.size(), n, cfg_.correction_factor,
                                 cfg_.aggregation);
}

// ---------------------------------------------------------------------------
// UMDA

void EDAConfig::validate(size_t length) const {
    if (length < 2)
        throw InvalidArgument("individuals need at least two samples");
    if (population_size < 2)
        throw InvalidArgument("population size must be >= 2");
    const size_t n = selected();
    if (n < 1 || n >= population_size)
        throw InvalidArgument("selected count N must satisfy 1 <= N < R");
    if (!(init_p > 0.0 && init_p < 1.0))
        throw InvalidArgument("initial probability must be in (0, 1)");
    if (init == InitKind::FROM_GRAPHIC) {
        if (!graphic)
            throw InvalidArgument("graphic initialization needs a graphic");
        if (graphic->values.size() != length)
            throw InvalidArgument("graphic length differs from trace length");
    }
    const double lo = p_floor > 0.0 ? p_floor : 1.0 / double(length);
    const double hi = p_ceil > 0.0 ? p_ceil : 1.0 - 1.0 / double(length);
    if (!(lo > 0.0 && lo < hi && hi < 1.0))
        throw InvalidArgument("marginal bounds must satisfy 0 < floor < ceil < 1");
}

namespace {

// Draws one individual; an empty draw is retried up to 16 times, after
// which one bit with non-zero probability is forced on.
Individual draw(const std::vector<double> &probs, Rng &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Individual ind(std::vector<uint8_t>(probs.size(), 0));
    for (int attempt = 0; attempt <= 16; attempt++) {
        bool any = false;
        for (size_t i = 0; i < probs.size(); i++) {
            ind.bits[i] = u(rng) < probs[i] ? 1 : 0;
            any = any || ind.bits[i];
        }
        if (any)
            return ind;
    }
    std::vector<size_t> live;
    for (size_t i = 0; i < probs.size(); i++)
        if (probs[i] > 0.0)
            live.push_back(i);
    if (live.empty())
        throw InvalidArgument("every selection probability is zero");
    std::uniform_int_distribution<size_t> pick(0, live.size() - 1);
    ind.bits[live[pick(rng)]] = 1;
    return ind;
}

Population draw_population(const std::vector<double> &probs, size_t r,
                           uint64_t seed, size_t iteration) {
    Population pop;
    pop.reserve(r);
    for (size_t i = 0; i < r; i++) {
        Rng rng = keyed_rng(seed, {iteration, i});
        pop.push_back(draw(probs, rng));
    }
    return pop;
}

bool better(const Individual &a, const Individual &b) {
    if (!a.eval || !b.eval)
        throw InvalidArgument("selection needs evaluated individuals");
    if (*a.eval != *b.eval)
        return *a.eval > *b.eval;
    const size_t na = a.n_poi(), nb = b.n_poi();
    if (na != nb)
        return na < nb;
    return a.bits < b.bits;
}

} // namespace

Population init_uniform(size_t length, size_t r, double p, uint64_t seed) {
    if (!(p > 0.0 && p < 1.0))
        throw InvalidArgument("Bernoulli p must be in (0, 1)");
    return draw_population(std::vector<double>(length, p), r, seed, 0);
}

Population init_from_graphic(const poi::SelectionGraphic &g, size_t r,
                             double base_p, uint64_t seed) {
    if (!(base_p > 0.0 && base_p < 1.0))
        throw InvalidArgument("base p must be in (0, 1)");
    const auto alpha = poi::normalize(g);
    if (alpha.degenerate)
        return init_uniform(g.values.size(), r, base_p, seed);
    std::vector<double> probs(alpha.values.size());
    for (size_t i = 0; i < probs.size(); i++)
        probs[i] = alpha.values[i] * base_p;
    return draw_population(probs, r, seed, 0);
}

void sort_population(Population &pop) {
    for (const auto &ind : pop)
        if (!ind.eval)
            throw InvalidArgument("selection needs evaluated individuals");
    std::stable_sort(pop.begin(), pop.end(), better);
}

Population select_top_n(const Population &pop, size_t n) {
    if (n > pop.size())
        throw InvalidArgument("cannot select more individuals than exist");
    Population sorted = pop;
    sort_population(sorted);
    sorted.resize(n);
    return sorted;
}

MarginalModel learn_marginals(const Population &selected, double p_floor,
                              double p_ceil) {
    if (selected.empty())
        throw InvalidArgument("cannot learn marginals from an empty selection");
    if (!(p_floor <= p_ceil))
        throw InvalidArgument("marginal floor exceeds ceiling");
    const size_t t = selected.front().size();
    std::vector<size_t> counts(t, 0);
    for (const auto &ind : selected) {
        if (ind.size() != t)
            throw InvalidArgument("selected individuals differ in length");
        for (size_t i = 0; i < t; i++)
            counts[i] += ind.bits[i];
    }
    MarginalModel m;
    m.probs.resize(t);
    for (size_t i = 0; i < t; i++)
        m.probs[i] = std::clamp(double(counts[i]) / double(selected.size()),
                                p_floor, p_ceil);
    return m;
}

Population sample_population(const MarginalModel &m, size_t r, uint64_t seed,
                             size_t iteration) {
    return draw_population(m.probs, r, seed, iteration);
}

double max_marginal_entropy(const MarginalModel &m) {
    double hi = 0.0;
    for (double p : m.probs) {
        if (p <= 0.0 || p >= 1.0)
            continue;
        hi = std::max(hi, -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p));
    }
    return hi;
}

EdaResult run_eda(const EDAConfig &cfg, const Fitness &fitness) {
    const size_t t = fitness.length();
    cfg.validate(t);
    const size_t n = cfg.selected();
    const double lo = cfg.p_floor > 0.0 ? cfg.p_floor : 1.0 / double(t);
    const double hi = cfg.p_ceil > 0.0 ? cfg.p_ceil : 1.0 - 1.0 / double(t);

    EdaResult result;
    Population pop = cfg.init == InitKind::FROM_GRAPHIC
                         ? init_from_graphic(*cfg.graphic, cfg.population_size,
                                             cfg.init_p, cfg.seed)
                         : init_uniform(t, cfg.population_size, cfg.init_p,
                                        cfg.seed);

    for (size_t iter = 0;; iter++) {
        for (auto &ind : pop)
            fitness.evaluate(ind);
        sort_population(pop);
        if (iter == 0 || better(pop.front(), result.best))
            result.best = pop.front();

        IterationRecord rec;
        rec.iteration = iter;
        rec.marginals = learn_marginals(
            Population(pop.begin(), pop.begin() + static_cast<ptrdiff_t>(n)), lo, hi);
        rec.population = std::move(pop);
        result.records.push_back(std::move(rec));

        if (iter == cfg.n_iterations)
            break;
        if (cfg.entropy_stop > 0.0 &&
            max_marginal_entropy(result.records.back().marginals) < cfg.entropy_stop)
            break;

        pop = sample_population(result.records.back().marginals,
                                cfg.population_size, cfg.seed, iter + 1);
        if (cfg.elitism)
            pop.back() = result.best;
    }
    return result;
}

} // namespace eda
} // namespace scaeda
