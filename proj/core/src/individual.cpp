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

#include "scaeda/individual.h"

#include "scaeda/error.h"

#include <algorithm>
#include <cstdio>

namespace scaeda {

Individual Individual::from_indices(size_t length,
                                    const std::vector<size_t> &indices) {
    Individual ind(std::vector<uint8_t>(length, 0));
    for (size_t i : indices) {
        if (i >= length)
            throw InvalidArgument("POI index " + std::to_string(i) +
                                  " out of range for traces of " +
                                  std::to_string(length) + " samples");
        ind.bits[i] = 1;
    }
    return ind;
}

size_t Individual::n_poi() const {
    return static_cast<size_t>(std::count(bits.begin(), bits.end(), 1));
}

std::vector<size_t> Individual::poi() const {
    std::vector<size_t> out;
    for (size_t i = 0; i < bits.size(); i++)
        if (bits[i])
            out.push_back(i);
    return out;
}

std::string Individual::digest() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint8_t b : bits) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

} // namespace scaeda
