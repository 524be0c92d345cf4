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

#include "scaeda/individual.h"
#include "scaeda/traces.h"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scaeda {
namespace poi {

/// Per-class mean and population variance over a set of sample columns.
/// Entries are stored class-major: index = label * n_columns + column.
struct ClassMoments {
    unsigned n_classes = 0;
    size_t n_columns = 0;
    std::vector<size_t> counts;
    std::vector<double> mean;
    std::vector<double> var;

    double mean_at(unsigned c, size_t j) const { return mean[c * n_columns + j]; }
    double var_at(unsigned c, size_t j) const { return var[c * n_columns + j]; }
};

/// Moments over the listed columns (in the listed order).
ClassMoments class_moments(const TraceSet &ts, std::span<const unsigned> labels,
                           unsigned n_classes, std::span<const size_t> columns);
/// Moments over every sample column.
ClassMoments class_moments(const TraceSet &ts, std::span<const unsigned> labels,
                           unsigned n_classes);

enum class Method { SOST, SOSD, SNR, CORRELATION };

Method parse_method(std::string_view name);
std::string to_string(Method m);

struct SelectionGraphic {
    std::vector<double> values;
    Method method = Method::SOST;
    bool normalized = false;
    /// Set by normalize() when the input was constant.
    bool degenerate = false;
};

SelectionGraphic sost(const TraceSet &ts, std::span<const unsigned> labels);
SelectionGraphic sosd(const TraceSet &ts, std::span<const unsigned> labels);
SelectionGraphic snr(const TraceSet &ts, std::span<const unsigned> labels);
SelectionGraphic correlation_graphic(const TraceSet &ts,
                                     std::span<const double> hypothesis);

/// Min-max rescale to [0, 1]. A constant graphic maps to zeros with the
/// degenerate flag set.
SelectionGraphic normalize(const SelectionGraphic &g);

/// Individual selecting the k largest values; ties go to the lower index.
Individual top_k_select(const SelectionGraphic &g, size_t k);

} // namespace poi
} // namespace scaeda
