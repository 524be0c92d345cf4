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
#include "scaeda/poi.h"

#include "oracles.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace scaeda;
using namespace scaeda::sim;

namespace {

DeviceProfile single_leak(size_t pos) {
    DeviceProfile p;
    p.value_positions = {pos};
    p.value_coeffs = {1.0};
    return p;
}

unsigned sbox_hw(const TraceSet &ts, size_t i, size_t byte) {
    const auto p = ts.meta(field::PLAINTEXT, i)[byte];
    const auto k = ts.meta(field::KEY, i)[byte];
    return oracle::popcount(aes::sbox(p ^ k));
}

} // namespace

TEST(Simulate, NoiselessUnprotectedLeaksHammingWeight) {
    SimConfig cfg;
    cfg.n_traces = 200;
    cfg.n_samples = 10;
    cfg.byte_index = 3;
    const auto ts = simulate(single_leak(4), cfg);
    for (size_t i = 0; i < ts.n_traces(); i++) {
        EXPECT_EQ(ts.at(i, 4), double(sbox_hw(ts, i, 3)));
        EXPECT_EQ(ts.at(i, 0), 0.0);
    }
}

TEST(Simulate, NoiselessMaskedLeaksMaskedValueAndMask) {
    auto p = single_leak(2);
    p.mask_positions = {6};
    p.mask_coeffs = {1.0};
    SimConfig cfg;
    cfg.implementation = Implementation::MASKED;
    cfg.n_traces = 300;
    cfg.n_samples = 8;
    const auto ts = simulate(p, cfg);
    ASSERT_TRUE(ts.has_field(field::MASK_IN));
    ASSERT_TRUE(ts.has_field(field::MASK_OUT));
    for (size_t i = 0; i < ts.n_traces(); i++) {
        const auto pt = ts.meta(field::PLAINTEXT, i)[0];
        const auto k = ts.meta(field::KEY, i)[0];
        const auto m_out = ts.meta(field::MASK_OUT, i)[0];
        EXPECT_EQ(ts.at(i, 2), double(oracle::popcount(aes::sbox(pt ^ k) ^ m_out)));
        EXPECT_EQ(ts.at(i, 6), double(oracle::popcount(m_out)));
    }
}

TEST(Simulate, CiphertextProxyHoldsSboxOutputs) {
    SimConfig cfg;
    cfg.n_traces = 20;
    cfg.n_samples = 3;
    const auto ts = simulate(single_leak(0), cfg);
    for (size_t i = 0; i < ts.n_traces(); i++)
        for (size_t b = 0; b < 16; b++)
            EXPECT_EQ(ts.meta(field::CIPHERTEXT, i)[b],
                      aes::sbox(ts.meta(field::PLAINTEXT, i)[b] ^
                                ts.meta(field::KEY, i)[b]));
}

TEST(Simulate, FixedAndRandomKeys) {
    SimConfig cfg;
    cfg.n_traces = 50;
    cfg.n_samples = 3;
    std::array<uint8_t, 16> key{};
    for (size_t b = 0; b < 16; b++)
        key[b] = uint8_t(0x10 + b);
    cfg.fixed_key = key;
    const auto fixed = simulate(single_leak(0), cfg);
    for (size_t i = 0; i < fixed.n_traces(); i++) {
        auto k = fixed.meta(field::KEY, i);
        EXPECT_TRUE(std::equal(k.begin(), k.end(), key.begin()));
    }
    cfg.fixed_key.reset();
    const auto random = simulate(single_leak(0), cfg);
    std::set<uint8_t> first_bytes;
    for (size_t i = 0; i < random.n_traces(); i++)
        first_bytes.insert(random.meta(field::KEY, i)[0]);
    EXPECT_GT(first_bytes.size(), 30u);
}

TEST(Simulate, DeterministicPerSeed) {
    auto p = single_leak(5);
    p.noise_sigma = 2.0;
    p.baseline_amplitude = 1.0;
    SimConfig cfg;
    cfg.n_traces = 40;
    cfg.n_samples = 20;
    cfg.seed = 99;
    EXPECT_EQ(encode_sctf(simulate(p, cfg)), encode_sctf(simulate(p, cfg)));
    auto other = cfg;
    other.seed = 100;
    EXPECT_NE(simulate(p, cfg), simulate(p, other));
}

TEST(Simulate, Int8EncodingQuantizes) {
    auto p = single_leak(1);
    p.noise_sigma = 3.0;
    p.offset = 10.0;
    SimConfig cfg;
    cfg.n_traces = 100;
    cfg.n_samples = 4;
    cfg.encoding = SampleEncoding::INT8;
    const auto ts = simulate(p, cfg);
    for (double v : ts.samples()) {
        EXPECT_EQ(v, std::round(v));
        EXPECT_GE(v, -128.0);
        EXPECT_LE(v, 127.0);
    }
    EXPECT_NO_THROW(encode_sctf(ts));
}

TEST(Simulate, RejectsInvalidProfiles) {
    SimConfig cfg;
    cfg.n_traces = 1;
    cfg.n_samples = 10;
    EXPECT_THROW(simulate(single_leak(10), cfg), InvalidArgument);
    auto overlap = single_leak(3);
    overlap.mask_positions = {3};
    overlap.mask_coeffs = {1.0};
    EXPECT_THROW(simulate(overlap, cfg), InvalidArgument);
    auto coeffs = single_leak(3);
    coeffs.value_coeffs = {1.0, 2.0};
    EXPECT_THROW(simulate(coeffs, cfg), InvalidArgument);
    auto noise = single_leak(3);
    noise.noise_sigma = -1.0;
    EXPECT_THROW(simulate(noise, cfg), InvalidArgument);
    cfg.n_traces = 0;
    EXPECT_THROW(simulate(single_leak(3), cfg), InvalidArgument);
}

TEST(Simulate, LowNoiseLeakCorrelatesWithHammingWeight) {
    auto p = single_leak(7);
    p.value_coeffs = {2.0};
    p.noise_sigma = 0.2;
    p.baseline_amplitude = 3.0;
    SimConfig cfg;
    cfg.n_traces = 2000;
    cfg.n_samples = 16;
    const auto ts = simulate(p, cfg);
    std::vector<double> h(ts.n_traces());
    for (size_t i = 0; i < ts.n_traces(); i++)
        h[i] = sbox_hw(ts, i, 0);
    const auto g = poi::correlation_graphic(ts, h);
    EXPECT_GT(g.values[7], 0.9);
}

TEST(Simulate, MaskedOutputIsFirstOrderResistant) {
    DeviceProfile p;
    p.value_positions = {10};
    p.value_coeffs = {1.0};
    p.mask_positions = {30};
    p.mask_coeffs = {1.0};
    p.noise_sigma = 0.5;
    SimConfig cfg;
    cfg.implementation = Implementation::MASKED;
    cfg.n_traces = 20000;
    cfg.n_samples = 40;
    const auto ts = simulate(p, cfg);

    std::vector<unsigned> unmasked(ts.n_traces()), masked(ts.n_traces());
    for (size_t i = 0; i < ts.n_traces(); i++) {
        const auto v = aes::sbox(ts.meta(field::PLAINTEXT, i)[0] ^
                                 ts.meta(field::KEY, i)[0]);
        unmasked[i] = oracle::popcount(v);
        masked[i] = oracle::popcount(v ^ ts.meta(field::MASK_OUT, i)[0]);
    }
    const auto g = poi::sost(ts, unmasked);
    std::vector<double> off;
    for (size_t s = 0; s < ts.n_samples(); s++)
        if (s != 10 && s != 30)
            off.push_back(g.values[s]);
    std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
    const double median = off[off.size() / 2];
    for (double v : g.values)
        EXPECT_LE(v, 5.0 * median);

    const auto gm = poi::sost(ts, masked);
    EXPECT_EQ(std::max_element(gm.values.begin(), gm.values.end()) - gm.values.begin(), 10);
}

TEST(CloneFamily, SingletonAndZeroJitter) {
    auto base = single_leak(1);
    base.gain = 2.0;
    base.offset = 3.0;
    base.noise_sigma = 0.5;
    const auto one = make_clone_family(base, 1, 7, 0.2, 0.2, 0.2);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].gain, 2.0);
    const auto four = make_clone_family(base, 4, 7, 0.0, 0.0, 0.0);
    ASSERT_EQ(four.size(), 4u);
    for (const auto &d : four) {
        EXPECT_EQ(d.gain, base.gain);
        EXPECT_EQ(d.offset, base.offset);
        EXPECT_EQ(d.noise_sigma, base.noise_sigma);
    }
}

TEST(CloneFamily, JitterBoundsAndSharedLayout) {
    DeviceProfile base;
    base.gain = 1.5;
    base.offset = -4.0;
    base.noise_sigma = 2.0;
    base.value_positions = {1, 5};
    base.value_coeffs = {1.0, 0.5};
    base.baseline_seed = 12;
    base.baseline_amplitude = 0.7;
    for (uint64_t seed = 0; seed < 200; seed++) {
        const auto fam = make_clone_family(base, 4, seed, 0.2, 0.1, 0.3);
        EXPECT_EQ(fam[0].gain, base.gain);
        for (const auto &d : fam) {
            EXPECT_GE(d.gain, 0.8 * 1.5 - 1e-12);
            EXPECT_LE(d.gain, 1.2 * 1.5 + 1e-12);
            EXPECT_LE(std::abs(d.offset - base.offset), 0.1 * 4.0 + 1e-12);
            EXPECT_LE(std::abs(d.noise_sigma - base.noise_sigma), 0.3 * 2.0 + 1e-12);
            EXPECT_EQ(d.value_positions, base.value_positions);
            EXPECT_EQ(d.value_coeffs, base.value_coeffs);
            EXPECT_EQ(d.baseline_seed, base.baseline_seed);
            EXPECT_EQ(d.baseline_amplitude, base.baseline_amplitude);
        }
    }
    EXPECT_EQ(make_clone_family(base, 4, 3, 0.2, 0.1, 0.3)[2].gain,
              make_clone_family(base, 4, 3, 0.2, 0.1, 0.3)[2].gain);
}

TEST(CloneFamily, Errors) {
    DeviceProfile base;
    base.noise_sigma = 1.0;
    EXPECT_THROW(make_clone_family(base, 0, 1, 0, 0, 0), InvalidArgument);
    EXPECT_THROW(make_clone_family(base, 2, 1, -0.1, 0, 0), InvalidArgument);
    // A jitter above 1 can push the noise below zero for some device.
    bool threw = false;
    for (uint64_t seed = 0; seed < 50 && !threw; seed++) {
        try {
            make_clone_family(base, 8, seed, 0, 0, 3.0);
        } catch (const InvalidArgument &) {
            threw = true;
        }
    }
    EXPECT_TRUE(threw);
}

TEST(Baseline, SmoothBoundedAndSeeded) {
    DeviceProfile p;
    p.baseline_amplitude = 2.0;
    p.baseline_seed = 4;
    const auto b = baseline(p, 500);
    double peak = 0.0, max_step = 0.0;
    for (size_t s = 0; s < b.size(); s++) {
        peak = std::max(peak, std::abs(b[s]));
        if (s)
            max_step = std::max(max_step, std::abs(b[s] - b[s - 1]));
    }
    EXPECT_NEAR(peak, 2.0, 1e-12);
    EXPECT_LT(max_step, 0.2);
    EXPECT_EQ(b, baseline(p, 500));
    p.baseline_amplitude = 0.0;
    for (double v : baseline(p, 10))
        EXPECT_EQ(v, 0.0);
}
