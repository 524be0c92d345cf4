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

#include "scaeda/poi.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scaeda {
namespace poi {

ClassMoments class_moments(const TraceSet &ts, std::span<const unsigned> labels,
                           unsigned n_classes, std::span<const size_t> columns) {
    if (labels.size() != ts.n_traces())
        throw InvalidArgument("one label per trace is required");
    ClassMoments m;
    m.n_classes = n_classes;
    m.n_columns = columns.size();
    m.counts.assign(n_classes, 0);
    m.mean.assign(size_t(n_classes) * columns.size(), 0.0);
    m.var.assign(size_t(n_classes) * columns.size(), 0.0);

    for (size_t i = 0; i < ts.n_traces(); i++) {
        const unsigned c = labels[i];
        if (c >= n_classes)
            throw InvalidArgument("label " + std::to_string(c) +
                                  " outside the class domain");
        m.counts[c]++;
        auto row = ts.trace(i);
        double *acc = &m.mean[size_t(c) * columns.size()];
        for (size_t j = 0; j < columns.size(); j++)
            acc[j] += row[columns[j]];
    }
    for (unsigned c = 0; c < n_classes; c++) {
        if (m.counts[c] == 0)
            continue;
        double *acc = &m.mean[size_t(c) * columns.size()];
        for (size_t j = 0; j < columns.size(); j++)
            acc[j] /= double(m.counts[c]);
    }
    for (size_t i = 0; i < ts.n_traces(); i++) {
        const unsigned c = labels[i];
        auto row = ts.trace(i);
        const double *mu = &m.mean[size_t(c) * columns.size()];
        double *acc = &m.var[size_t(c) * columns.size()];
        for (size_t j = 0; j < columns.size(); j++) {
            const double d = row[columns[j]] - mu[j];
            acc[j] += d * d;
        }
    }
    for (unsigned c = 0; c < n_classes; c++) {
        if (m.counts[c] == 0)
            continue;
        double *acc = &m.var[size_t(c) * columns.size()];
        for (size_t j = 0; j < columns.size(); j++)
            acc[j] /= double(m.counts[c]);
    }
    return m;
}

ClassMoments class_moments(const TraceSet &ts, std::span<const unsigned> labels,
                           unsigned n_classes) {
    std::vector<size_t> all(ts.n_samples());
    std::iota(all.begin(), all.end(), size_t(0));
    return class_moments(ts, labels, n_classes, all);
}

Method parse_method(std::string_view name) {
    if (name == "sost")
        return Method::SOST;
    if (name == "sosd")
        return Method::SOSD;
    if (name == "snr")
        return Method::SNR;
    if (name == "correlation" || name == "corr")
        return Method::CORRELATION;
    throw InvalidArgument("unknown POI selection method '" + std::string(name) +
                          "'");
}

std::string to_string(Method m) {
    switch (m) {
    case Method::SOST:
        return "sost";
    case Method::SOSD:
        return "sosd";
    case Method::SNR:
        return "snr";
    case Method::CORRELATION:
        return "correlation";
    }
    return "unknown";
}

namespace {

ClassMoments checked_moments(const TraceSet &ts,
                             std::span<const unsigned> labels,
                             std::vector<unsigned> &present) {
    if (labels.size() != ts.n_traces())
        throw InvalidArgument("one label per trace is required");
    unsigned n_classes = 0;
    for (unsigned l : labels)
        n_classes = std::max(n_classes, l + 1);
    auto m = class_moments(ts, labels, n_classes);
    present.clear();
    for (unsigned c = 0; c < n_classes; c++)
        if (m.counts[c] > 0)
            present.push_back(c);
    if (present.size() < 2)
        throw InvalidArgument(
            "POI selection graphics need traces from at least two classes");
    return m;
}

SelectionGraphic pairwise(const TraceSet &ts, std::span<const unsigned> labels,
                          bool t_statistic) {
    std::vector<unsigned> present;
    const auto m = checked_moments(ts, labels, present);
    SelectionGraphic g;
    g.method = t_statistic ? Method::SOST : Method::SOSD;
    g.values.assign(ts.n_samples(), 0.0);
    for (size_t s = 0; s < ts.n_samples(); s++) {
        double acc = 0.0;
        for (size_t a = 0; a < present.size(); a++) {
            const unsigned i = present[a];
            for (size_t b = a + 1; b < present.size(); b++) {
                const unsigned j = present[b];
                const double d = m.mean_at(i, s) - m.mean_at(j, s);
                if (!t_statistic) {
                    acc += d * d;
                    continue;
                }
                const double den = m.var_at(i, s) / double(m.counts[i]) +
                                   m.var_at(j, s) / double(m.counts[j]);
                if (den > 0.0)
                    acc += d * d / den;
            }
        }
        g.values[s] = acc;
    }
    return g;
}

} // namespace

SelectionGraphic sost(const TraceSet &ts, std::span<const unsigned> labels) {
    return pairwise(ts, labels, true);
}

SelectionGraphic sosd(const TraceSet &ts, std::span<const unsigned> labels) {
    return pairwise(ts, labels, false);
}

namespace {
constexpr double kNoiseFloor = 1e-12;
} // namespace

SelectionGraphic snr(const TraceSet &ts, std::span<const unsigned> labels) {
    std::vector<unsigned> present;
    const auto m = checked_moments(ts, labels, present);
    SelectionGraphic g;
    g.method = Method::SNR;
    g.values.assign(ts.n_samples(), 0.0);
    const double k = double(present.size());
    for (size_t s = 0; s < ts.n_samples(); s++) {
        double mean_of_means = 0.0, mean_of_vars = 0.0;
        for (unsigned c : present) {
            mean_of_means += m.mean_at(c, s);
            mean_of_vars += m.var_at(c, s);
        }
        mean_of_means /= k;
        mean_of_vars /= k;
        double signal = 0.0;
        for (unsigned c : present) {
            const double d = m.mean_at(c, s) - mean_of_means;
            signal += d * d;
        }
        signal /= k;
        // A noiseless column separating the classes still has to rank as a
        // leak, so the noise term is floored rather than tested for zero.
        g.values[s] = signal > 0.0 ? signal / std::max(mean_of_vars, kNoiseFloor) : 0.0;
    }
    return g;
}

SelectionGraphic correlation_graphic(const TraceSet &ts,
                                     std::span<const double> hypothesis) {
    if (hypothesis.size() != ts.n_traces())
        throw InvalidArgument("one hypothesis value per trace is required");
    if (ts.n_traces() < 2)
        throw InvalidArgument("correlation needs at least two traces");
    const size_t n = ts.n_traces(), t = ts.n_samples();
    const double h_mean =
        std::accumulate(hypothesis.begin(), hypothesis.end(), 0.0) / double(n);
    std::vector<double> t_mean(t, 0.0);
    for (size_t i = 0; i < n; i++) {
        auto row = ts.trace(i);
        for (size_t s = 0; s < t; s++)
            t_mean[s] += row[s];
    }
    for (double &v : t_mean)
        v /= double(n);

    std::vector<double> sxy(t, 0.0), sxx(t, 0.0);
    double syy = 0.0;
    for (size_t i = 0; i < n; i++) {
        const double dh = hypothesis[i] - h_mean;
        syy += dh * dh;
        auto row = ts.trace(i);
        for (size_t s = 0; s < t; s++) {
            const double dt = row[s] - t_mean[s];
            sxy[s] += dt * dh;
            sxx[s] += dt * dt;
        }
    }
    SelectionGraphic g;
    g.method = Method::CORRELATION;
    g.values.assign(t, 0.0);
    for (size_t s = 0; s < t; s++)
        if (sxx[s] > 0.0 && syy > 0.0)
            g.values[s] = std::min(1.0, std::abs(sxy[s]) / std::sqrt(sxx[s] * syy));
    return g;
}

SelectionGraphic normalize(const SelectionGraphic &g) {
    SelectionGraphic out = g;
    out.normalized = true;
    out.degenerate = false;
    if (g.values.empty())
        return out;
    const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
    const double min = *lo, max = *hi;
    if (!(max > min)) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        out.degenerate = true;
        return out;
    }
    for (double &v : out.values)
        v = (v - min) / (max - min);
    return out;
}

Individual top_k_select(const SelectionGraphic &g, size_t k) {
    if (k > g.values.size())
        throw InvalidArgument("cannot select " + std::to_string(k) +
                              " samples from a graphic of length " +
                              std::to_string(g.values.size()));
    std::vector<size_t> order(g.values.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return g.values[a] > g.values[b];
    });
    order.resize(k);
    return Individual::from_indices(g.values.size(), order);
}

} // namespace poi
} // namespace scaeda
