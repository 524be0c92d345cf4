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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace scaeda {
namespace aes {

using ByteTable = std::array<uint8_t, 256>;

/// The Rijndael substitution box and its inverse.
struct SboxTable {
    ByteTable entries;
    ByteTable inverse;

    /// The standard AES-128 tables.
    static const SboxTable &rijndael();
};

uint8_t sbox(uint8_t x);
uint8_t inv_sbox(uint8_t x);

inline int hamming_weight(uint8_t x) {
    int n = 0;
    for (; x; x &= static_cast<uint8_t>(x - 1))
        n++;
    return n;
}

/// Builds the masked lookup table Sm with Sm[x ^ m_in] = S[x] ^ m_out.
ByteTable mask_sbox_table(const SboxTable &s, uint8_t m_in, uint8_t m_out);

enum class LeakageKind { IV_SBOX, HW_SBOX, HD_LAST_ROUND };

/// Intermediate-value model used to label traces and to map key hypotheses
/// onto template classes.
struct LeakageModel {
    LeakageKind kind = LeakageKind::HW_SBOX;
    /// Targeted plaintext byte (IV_SBOX, HW_SBOX).
    unsigned byte_index = 0;
    /// Ciphertext bytes (b1, b2) used by HD_LAST_ROUND.
    unsigned ct_byte_1 = 0;
    unsigned ct_byte_2 = 0;

    /// Size of the label domain: 256 for IV_SBOX, 9 otherwise.
    unsigned class_count() const;

    /// Class label of one trace under key byte hypothesis \p key.
    unsigned label(std::span<const uint8_t> plaintext,
                   std::span<const uint8_t> ciphertext, uint8_t key) const;

    /// Throws InvalidArgument when a byte index is out of range or the kind
    /// is not one of the known enumerators.
    void validate() const;
};

/// Parses "iv-sbox", "hw-sbox" or "hd-last-round".
LeakageKind parse_leakage_kind(std::string_view name);
std::string to_string(LeakageKind kind);

} // namespace aes
} // namespace scaeda
