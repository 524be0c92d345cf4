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

#include "scaeda/sim.h"

#include "scaeda/aes.h"
#include "scaeda/random.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scaeda {
namespace sim {

void DeviceProfile::validate(size_t n_samples) const {
    if (!(noise_sigma >= 0.0))
        throw InvalidArgument("noise_sigma must be >= 0");
    if (value_coeffs.size() != value_positions.size())
        throw InvalidArgument("value_coeffs must match value_positions");
    if (mask_coeffs.size() != mask_positions.size())
        throw InvalidArgument("mask_coeffs must match mask_positions");
    for (size_t p : value_positions)
        if (p >= n_samples)
            throw InvalidArgument("value leak position " + std::to_string(p) +
                                  " out of range");
    for (size_t p : mask_positions) {
        if (p >= n_samples)
            throw InvalidArgument("mask leak position " + std::to_string(p) +
                                  " out of range");
        if (std::find(value_positions.begin(), value_positions.end(), p) !=
            value_positions.end())
            throw InvalidArgument("position " + std::to_string(p) +
                                  " leaks both value and mask");
    }
}

std::vector<double> baseline(const DeviceProfile &profile, size_t n_samples) {
    std::vector<double> out(n_samples, 0.0);
    if (profile.baseline_amplitude == 0.0 || n_samples == 0)
        return out;
    // A few low-frequency sinusoids; their sum is rescaled to the requested
    // peak amplitude.
    Rng rng(splitmix64(profile.baseline_seed));
    std::uniform_real_distribution<double> freq(0.5, 4.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amp(0.2, 1.0);
    for (int h = 0; h < 4; h++) {
        const double f = freq(rng), ph = phase(rng), a = amp(rng);
        for (size_t s = 0; s < n_samples; s++)
            out[s] += a * std::sin(2.0 * std::numbers::pi * f * double(s) /
                                       double(n_samples) +
                                   ph);
    }
    double peak = 0.0;
    for (double v : out)
        peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double &v : out)
            v *= profile.baseline_amplitude / peak;
    return out;
}

TraceSet simulate(const DeviceProfile &profile, const SimConfig &cfg) {
    if (cfg.n_traces < 1 || cfg.n_samples < 1)
        throw InvalidArgument("simulation needs n_traces >= 1 and n_samples >= 1");
    if (cfg.byte_index >= 16)
        throw InvalidArgument("byte index must be < 16");
    profile.validate(cfg.n_samples);

    const bool masked = cfg.implementation == Implementation::MASKED;
    std::vector<MetadataField> fields = {{field::PLAINTEXT, 16},
                                         {field::CIPHERTEXT, 16},
                                         {field::KEY, 16}};
    if (masked) {
        fields.push_back({field::MASK_IN, 1});
        fields.push_back({field::MASK_OUT, 1});
    }
    TraceSet ts(cfg.n_traces, cfg.n_samples, fields, cfg.encoding);
    const size_t f_pt = 0, f_ct = 1, f_key = 2, f_min = 3, f_mout = 4;

    const auto base = baseline(profile, cfg.n_samples);
    const auto &sbox = aes::SboxTable::rijndael();

    for (size_t i = 0; i < cfg.n_traces; i++) {
        Rng rng = keyed_rng(cfg.seed, {i});
        std::uniform_int_distribution<int> byte(0, 255);
        std::normal_distribution<double> noise(0.0, 1.0);

        auto pt = ts.meta(f_pt, i);
        auto ct = ts.meta(f_ct, i);
        auto key = ts.meta(f_key, i);
        for (auto &b : pt)
            b = static_cast<uint8_t>(byte(rng));
        if (cfg.fixed_key)
            std::copy(cfg.fixed_key->begin(), cfg.fixed_key->end(), key.begin());
        else
            for (auto &b : key)
                b = static_cast<uint8_t>(byte(rng));
        for (size_t b = 0; b < 16; b++)
            ct[b] = aes::sbox(pt[b] ^ key[b]);

        const uint8_t x = pt[cfg.byte_index] ^ key[cfg.byte_index];
        uint8_t leaked = sbox.entries[x];
        uint8_t m_out = 0;
        if (masked) {
            const auto m_in = static_cast<uint8_t>(byte(rng));
            m_out = static_cast<uint8_t>(byte(rng));
            ts.meta(f_min, i)[0] = m_in;
            ts.meta(f_mout, i)[0] = m_out;
            const auto sm = aes::mask_sbox_table(sbox, m_in, m_out);
            leaked = sm[x ^ m_in];
        }

        auto row = ts.trace(i);
        for (size_t s = 0; s < cfg.n_samples; s++)
            row[s] = base[s] + profile.offset + profile.noise_sigma * noise(rng);
        const double hw_value = aes::hamming_weight(leaked);
        for (size_t j = 0; j < profile.value_positions.size(); j++)
            row[profile.value_positions[j]] +=
                profile.gain * profile.value_coeffs[j] * hw_value;
        if (masked) {
            const double hw_mask = aes::hamming_weight(m_out);
            for (size_t j = 0; j < profile.mask_positions.size(); j++)
                row[profile.mask_positions[j]] +=
                    profile.gain * profile.mask_coeffs[j] * hw_mask;
        }

        for (double &v : row) {
            if (cfg.encoding == SampleEncoding::INT8)
                v = std::clamp(std::round(v), -128.0, 127.0);
            else
                v = static_cast<float>(v);
        }
    }
    return ts;
}

std::vector<DeviceProfile> make_clone_family(const DeviceProfile &base,
                                             size_t n_devices,
                                             uint64_t variation_seed,
                                             double gain_jitter,
                                             double offset_jitter,
                                             double noise_jitter) {
    if (n_devices < 1)
        throw InvalidArgument("a clone family needs at least one device");
    if (gain_jitter < 0.0 || offset_jitter < 0.0 || noise_jitter < 0.0)
        throw InvalidArgument("jitters must be >= 0");

    std::vector<DeviceProfile> family{base};
    for (size_t d = 1; d < n_devices; d++) {
        Rng rng = keyed_rng(variation_seed, {d});
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        DeviceProfile p = base;
        p.gain = base.gain * (1.0 + gain_jitter * u(rng));
        p.offset = base.offset * (1.0 + offset_jitter * u(rng));
        p.noise_sigma = base.noise_sigma * (1.0 + noise_jitter * u(rng));
        if (p.noise_sigma < 0.0)
            throw InvalidArgument("perturbed noise_sigma of device " +
                                  std::to_string(d) + " is negative");
        family.push_back(std::move(p));
    }
    return family;
}

} // namespace sim
} // namespace scaeda
