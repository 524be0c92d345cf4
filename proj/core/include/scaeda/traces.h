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

#include "scaeda/error.h"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scaeda {

enum class SampleEncoding : uint8_t { INT8 = 0, FLOAT32 = 1 };

/// Standard metadata field names.
namespace field {
inline constexpr const char *PLAINTEXT = "plaintext";
inline constexpr const char *CIPHERTEXT = "ciphertext";
inline constexpr const char *KEY = "key";
inline constexpr const char *MASK_IN = "mask_in";
inline constexpr const char *MASK_OUT = "mask_out";
} // namespace field

struct MetadataField {
    std::string name;
    uint16_t width = 0;

    bool operator==(const MetadataField &) const = default;
};

/// A set of power traces with identical length plus per-trace metadata.
///
/// Samples are held as doubles in row-major order. The encoding only
/// describes how the set is serialized: INT8 sets must hold integers in
/// [-128, 127], FLOAT32 sets are narrowed to IEEE-754 single precision on
/// write.
class TraceSet {
  public:
    TraceSet() = default;
    TraceSet(size_t n_traces, size_t n_samples,
             std::vector<MetadataField> fields,
             SampleEncoding encoding = SampleEncoding::FLOAT32);

    size_t n_traces() const { return n_traces_; }
    size_t n_samples() const { return n_samples_; }
    SampleEncoding encoding() const { return encoding_; }
    void set_encoding(SampleEncoding e) { encoding_ = e; }
    const std::vector<MetadataField> &fields() const { return fields_; }

    std::span<const double> trace(size_t i) const {
        return {samples_.data() + i * n_samples_, n_samples_};
    }
    std::span<double> trace(size_t i) {
        return {samples_.data() + i * n_samples_, n_samples_};
    }
    double at(size_t i, size_t s) const { return samples_[i * n_samples_ + s]; }
    double &at(size_t i, size_t s) { return samples_[i * n_samples_ + s]; }
    const std::vector<double> &samples() const { return samples_; }
    std::vector<double> &samples() { return samples_; }

    bool has_field(const std::string &name) const;
    /// Index of a declared field; throws InvalidArgument if absent.
    size_t field_index(const std::string &name) const;

    std::span<const uint8_t> meta(size_t field, size_t trace) const;
    std::span<uint8_t> meta(size_t field, size_t trace);
    std::span<const uint8_t> meta(const std::string &name, size_t trace) const {
        return meta(field_index(name), trace);
    }
    std::span<uint8_t> meta(const std::string &name, size_t trace) {
        return meta(field_index(name), trace);
    }
    /// Raw per-field storage (n_traces * width bytes).
    const std::vector<uint8_t> &meta_column(size_t field) const {
        return meta_[field];
    }

    /// New set holding the given traces, in the given order.
    TraceSet subset(std::span<const size_t> indices) const;

    /// Throws InvalidArgument when a structural invariant is broken.
    void validate() const;

    bool operator==(const TraceSet &) const = default;

  private:
    size_t n_traces_ = 0;
    size_t n_samples_ = 0;
    SampleEncoding encoding_ = SampleEncoding::FLOAT32;
    std::vector<MetadataField> fields_;
    std::vector<double> samples_;
    std::vector<std::vector<uint8_t>> meta_;
};

/// Errors raised while decoding an SCTF file.
class SctfError : public Error {
  public:
    enum class Code {
        IO,
        BAD_MAGIC,
        UNSUPPORTED_VERSION,
        BAD_HEADER,
        TRUNCATED,
        WIDTH_MISMATCH,
        TRAILING_DATA,
        NAME_TOO_LONG,
        BAD_SAMPLE,
    };

    SctfError(Code code, const std::string &what) : Error(what), code_(code) {}
    Code code() const { return code_; }

  private:
    Code code_;
};

/// Required width of the standard metadata fields, 0 for unknown names.
uint16_t standard_field_width(const std::string &name);

void write_sctf(const TraceSet &ts, const std::filesystem::path &path);
TraceSet read_sctf(const std::filesystem::path &path);

/// In-memory variants; the file functions are thin wrappers.
std::vector<uint8_t> encode_sctf(const TraceSet &ts);
TraceSet decode_sctf(std::span<const uint8_t> bytes);

struct PreprocessSpec {
    bool zero_mean = false;
    bool standardize = false;
    size_t lowpass_window = 1;
};

/// Applies zero-mean, then low-pass, then standardization. The result is
/// FLOAT32-encoded.
TraceSet preprocess(const TraceSet &ts, const PreprocessSpec &spec);

/// Draws disjoint profiling and attack subsets uniformly without
/// replacement.
std::pair<TraceSet, TraceSet> split(const TraceSet &ts, size_t n_profiling,
                                    size_t n_attack, uint64_t seed);

/// First \p n indices of a seeded uniform permutation of [0, pool).
std::vector<size_t> sample_without_replacement(size_t pool, size_t n,
                                               uint64_t seed);

} // namespace scaeda
