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

#include "scaeda/traces.h"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace scaeda {
namespace sim {

/// Leakage characteristics of one (simulated) device.
///
/// Every sample is baseline + offset + N(0, noise_sigma^2). At each value
/// position the device adds gain * coeff * HW(v), where v is the first-round
/// Sbox output (masked with m_out in MASKED mode). In MASKED mode, each mask
/// position adds gain * coeff * HW(m_out).
struct DeviceProfile {
    double gain = 1.0;
    double offset = 0.0;
    double noise_sigma = 0.0;
    std::vector<size_t> value_positions;
    std::vector<double> value_coeffs;
    std::vector<size_t> mask_positions;
    std::vector<double> mask_coeffs;
    uint64_t baseline_seed = 0;
    /// Peak amplitude of the smooth baseline waveform; 0 gives a flat one.
    double baseline_amplitude = 0.0;

    void validate(size_t n_samples) const;
    bool operator==(const DeviceProfile &) const = default;
};

enum class Implementation { UNPROTECTED, MASKED };

struct SimConfig {
    Implementation implementation = Implementation::UNPROTECTED;
    size_t n_traces = 1;
    /// Fixed key for every trace; a fresh uniform key per trace otherwise.
    std::optional<std::array<uint8_t, 16>> fixed_key;
    unsigned byte_index = 0;
    size_t n_samples = 1;
    uint64_t seed = 0;
    SampleEncoding encoding = SampleEncoding::FLOAT32;
};

/// The smooth baseline waveform of a profile over n_samples.
std::vector<double> baseline(const DeviceProfile &profile, size_t n_samples);

/// Generates a trace set. Metadata always holds plaintext, key and a
/// ciphertext proxy (the 16 first-round Sbox outputs); MASKED sets also hold
/// mask_in and mask_out. Each trace draws its randomness from
/// (seed, trace index), so the result is fully determined by the inputs.
TraceSet simulate(const DeviceProfile &profile, const SimConfig &cfg);

/// Family of clone devices: device 0 is \p base, the others scale gain,
/// offset and noise_sigma by (1 + u) with u uniform in +/- the jitter.
std::vector<DeviceProfile> make_clone_family(const DeviceProfile &base,
                                             size_t n_devices,
                                             uint64_t variation_seed,
                                             double gain_jitter,
                                             double offset_jitter,
                                             double noise_jitter);

} // namespace sim
} // namespace scaeda
