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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scaeda {

/// Binary POI-selection candidate: bit n set means sample n is used to build
/// templates.
struct Individual {
    std::vector<uint8_t> bits;
    std::optional<double> eval;
    /// Correct-key rank per attacked device, filled by evaluation.
    std::vector<unsigned> ge;

    Individual() = default;
    explicit Individual(std::vector<uint8_t> b) : bits(std::move(b)) {}

    static Individual from_indices(size_t length,
                                   const std::vector<size_t> &indices);

    size_t size() const { return bits.size(); }
    size_t n_poi() const;
    /// Indices of the set bits, ascending.
    std::vector<size_t> poi() const;
    /// Hex digest of the bit vector (FNV-1a 64).
    std::string digest() const;

    void clear_cache() {
        eval.reset();
        ge.clear();
    }
};

using Population = std::vector<Individual>;

} // namespace scaeda
