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

#include "scaeda/traces.h"

#include "scaeda/random.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

namespace scaeda {

TraceSet::TraceSet(size_t n_traces, size_t n_samples,
                   std::vector<MetadataField> fields, SampleEncoding encoding)
    : n_traces_(n_traces), n_samples_(n_samples), encoding_(encoding),
      fields_(std::move(fields)), samples_(n_traces * n_samples, 0.0) {
    meta_.reserve(fields_.size());
    for (const auto &f : fields_)
        meta_.emplace_back(n_traces * f.width, uint8_t(0));
}

bool TraceSet::has_field(const std::string &name) const {
    return std::any_of(fields_.begin(), fields_.end(),
                       [&](const MetadataField &f) { return f.name == name; });
}

size_t TraceSet::field_index(const std::string &name) const {
    for (size_t i = 0; i < fields_.size(); i++)
        if (fields_[i].name == name)
            return i;
    throw InvalidArgument("trace set has no metadata field '" + name + "'");
}

std::span<const uint8_t> TraceSet::meta(size_t field, size_t trace) const {
    const size_t w = fields_[field].width;
    return {meta_[field].data() + trace * w, w};
}

std::span<uint8_t> TraceSet::meta(size_t field, size_t trace) {
    const size_t w = fields_[field].width;
    return {meta_[field].data() + trace * w, w};
}

TraceSet TraceSet::subset(std::span<const size_t> indices) const {
    TraceSet out(indices.size(), n_samples_, fields_, encoding_);
    for (size_t r = 0; r < indices.size(); r++) {
        const size_t i = indices[r];
        if (i >= n_traces_)
            throw InvalidArgument("subset index out of range");
        std::copy_n(trace(i).begin(), n_samples_, out.trace(r).begin());
        for (size_t f = 0; f < fields_.size(); f++) {
            auto src = meta(f, i);
            std::copy(src.begin(), src.end(), out.meta(f, r).begin());
        }
    }
    return out;
}

void TraceSet::validate() const {
    if (samples_.size() != n_traces_ * n_samples_)
        throw InvalidArgument("sample matrix does not match declared shape");
    if (meta_.size() != fields_.size())
        throw InvalidArgument("metadata columns do not match declared fields");
    for (size_t f = 0; f < fields_.size(); f++) {
        if (fields_[f].width == 0)
            throw InvalidArgument("metadata field '" + fields_[f].name +
                                  "' has zero width");
        if (meta_[f].size() != n_traces_ * fields_[f].width)
            throw InvalidArgument("metadata field '" + fields_[f].name +
                                  "' is not present for every trace");
    }
}

uint16_t standard_field_width(const std::string &name) {
    if (name == field::PLAINTEXT || name == field::CIPHERTEXT ||
        name == field::KEY)
        return 16;
    if (name == field::MASK_IN || name == field::MASK_OUT)
        return 1;
    return 0;
}

// ---------------------------------------------------------------------------
// SCTF codec

namespace {

constexpr uint8_t kMagic[4] = {'S', 'C', 'T', 'F'};
constexpr uint32_t kVersion = 1;

template <typename T> void put_le(std::vector<uint8_t> &out, T v) {
    for (size_t i = 0; i < sizeof(T); i++)
        out.push_back(static_cast<uint8_t>(static_cast<uint64_t>(v) >> (8 * i)));
}

class Reader {
  public:
    explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    template <typename T> T get(const char *what) {
        need(sizeof(T), what);
        uint64_t v = 0;
        for (size_t i = 0; i < sizeof(T); i++)
            v |= uint64_t(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    std::span<const uint8_t> take(size_t n, const char *what) {
        need(n, what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(size_t n, const char *what) const {
        if (remaining() < n)
            throw SctfError(SctfError::Code::TRUNCATED,
                            std::string("SCTF file truncated in ") + what);
    }

    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

size_t sample_width(SampleEncoding e) {
    return e == SampleEncoding::INT8 ? 1 : 4;
}

} // namespace

std::vector<uint8_t> encode_sctf(const TraceSet &ts) {
    ts.validate();
    if (ts.fields().size() > 255)
        throw SctfError(SctfError::Code::BAD_HEADER,
                        "SCTF supports at most 255 metadata fields");
    if (ts.n_samples() > UINT32_MAX)
        throw SctfError(SctfError::Code::BAD_HEADER,
                        "SCTF supports at most 2^32-1 samples per trace");

    std::vector<uint8_t> out;
    size_t meta_bytes = 0;
    for (const auto &f : ts.fields())
        meta_bytes += f.width;
    out.reserve(64 + ts.n_traces() *
                         (meta_bytes + ts.n_samples() *
                                           sample_width(ts.encoding())));

    for (uint8_t b : kMagic)
        out.push_back(b);
    put_le<uint32_t>(out, kVersion);
    put_le<uint64_t>(out, ts.n_traces());
    put_le<uint32_t>(out, static_cast<uint32_t>(ts.n_samples()));
    put_le<uint8_t>(out, static_cast<uint8_t>(ts.encoding()));
    put_le<uint8_t>(out, static_cast<uint8_t>(ts.fields().size()));
    for (const auto &f : ts.fields()) {
        if (f.name.size() > 255)
            throw SctfError(SctfError::Code::NAME_TOO_LONG,
                            "metadata field name longer than 255 bytes");
        put_le<uint8_t>(out, static_cast<uint8_t>(f.name.size()));
        out.insert(out.end(), f.name.begin(), f.name.end());
        put_le<uint16_t>(out, f.width);
    }

    for (size_t i = 0; i < ts.n_traces(); i++) {
        for (size_t f = 0; f < ts.fields().size(); f++) {
            auto m = ts.meta(f, i);
            out.insert(out.end(), m.begin(), m.end());
        }
        for (double v : ts.trace(i)) {
            if (ts.encoding() == SampleEncoding::INT8) {
                if (!(v >= -128.0 && v <= 127.0) || v != std::trunc(v))
                    throw SctfError(SctfError::Code::BAD_SAMPLE,
                                    "INT8 trace set holds a non-integer or "
                                    "out-of-range sample");
                put_le<uint8_t>(out, static_cast<uint8_t>(
                                         static_cast<int8_t>(v)));
            } else {
                put_le<uint32_t>(out,
                                 std::bit_cast<uint32_t>(static_cast<float>(v)));
            }
        }
    }
    return out;
}

TraceSet decode_sctf(std::span<const uint8_t> bytes) {
    Reader rd(bytes);
    auto magic = rd.take(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic)))
        throw SctfError(SctfError::Code::BAD_MAGIC, "not an SCTF file");
    const auto version = rd.get<uint32_t>("version");
    if (version != kVersion)
        throw SctfError(SctfError::Code::UNSUPPORTED_VERSION,
                        "unsupported SCTF version " + std::to_string(version));
    const auto n_traces = rd.get<uint64_t>("header");
    const auto n_samples = rd.get<uint32_t>("header");
    const auto enc = rd.get<uint8_t>("header");
    if (enc > 1)
        throw SctfError(SctfError::Code::BAD_HEADER,
                        "unknown sample encoding " + std::to_string(enc));
    const auto encoding = static_cast<SampleEncoding>(enc);
    const auto n_fields = rd.get<uint8_t>("header");

    std::vector<MetadataField> fields;
    size_t meta_bytes = 0;
    for (unsigned f = 0; f < n_fields; f++) {
        const auto len = rd.get<uint8_t>("field table");
        auto name = rd.take(len, "field table");
        MetadataField mf{std::string(name.begin(), name.end()),
                         rd.get<uint16_t>("field table")};
        if (mf.width == 0)
            throw SctfError(SctfError::Code::BAD_HEADER,
                            "metadata field '" + mf.name + "' has zero width");
        const uint16_t expected = standard_field_width(mf.name);
        if (expected != 0 && expected != mf.width)
            throw SctfError(SctfError::Code::WIDTH_MISMATCH,
                            "metadata field '" + mf.name + "' declared with " +
                                std::to_string(mf.width) +
                                " bytes, expected " + std::to_string(expected));
        for (const auto &other : fields)
            if (other.name == mf.name)
                throw SctfError(SctfError::Code::BAD_HEADER,
                                "duplicate metadata field '" + mf.name + "'");
        meta_bytes += mf.width;
        fields.push_back(std::move(mf));
    }

    const size_t record = meta_bytes + size_t(n_samples) * sample_width(encoding);
    if (record != 0 && n_traces > rd.remaining() / record)
        throw SctfError(SctfError::Code::TRUNCATED,
                        "SCTF file truncated: expected " +
                            std::to_string(n_traces) + " records");
    if (rd.remaining() != n_traces * record)
        throw SctfError(SctfError::Code::TRAILING_DATA,
                        "SCTF file has bytes after the last record");

    TraceSet ts(n_traces, n_samples, fields, encoding);
    for (size_t i = 0; i < n_traces; i++) {
        for (size_t f = 0; f < fields.size(); f++) {
            auto src = rd.take(fields[f].width, "record");
            std::copy(src.begin(), src.end(), ts.meta(f, i).begin());
        }
        auto row = ts.trace(i);
        for (size_t s = 0; s < n_samples; s++) {
            if (encoding == SampleEncoding::INT8)
                row[s] = static_cast<int8_t>(rd.get<uint8_t>("record"));
            else
                row[s] = std::bit_cast<float>(rd.get<uint32_t>("record"));
        }
    }
    return ts;
}

void write_sctf(const TraceSet &ts, const std::filesystem::path &path) {
    const auto bytes = encode_sctf(ts);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw SctfError(SctfError::Code::IO,
                        "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw SctfError(SctfError::Code::IO,
                        "write to '" + path.string() + "' failed");
}

TraceSet read_sctf(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SctfError(SctfError::Code::IO,
                        "cannot open '" + path.string() + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return decode_sctf(bytes);
}

// ---------------------------------------------------------------------------
// Preprocessing

TraceSet preprocess(const TraceSet &ts, const PreprocessSpec &spec) {
    const size_t n = ts.n_traces();
    const size_t t = ts.n_samples();
    if (spec.lowpass_window < 1 || spec.lowpass_window > std::max<size_t>(t, 1))
        throw InvalidArgument("lowpass window must be in [1, n_samples]");

    TraceSet out = ts;
    out.set_encoding(SampleEncoding::FLOAT32);

    if (spec.zero_mean) {
        for (size_t i = 0; i < n; i++) {
            auto row = out.trace(i);
            const double mean =
                std::accumulate(row.begin(), row.end(), 0.0) / double(t);
            for (double &v : row)
                v -= mean;
        }
    }

    if (spec.lowpass_window > 1) {
        // Centered window; samples beyond the trace edges are left out of
        // the average instead of being padded.
        const size_t left = (spec.lowpass_window - 1) / 2;
        const size_t right = spec.lowpass_window - 1 - left;
        std::vector<double> prefix(t + 1);
        for (size_t i = 0; i < n; i++) {
            auto row = out.trace(i);
            prefix[0] = 0.0;
            for (size_t s = 0; s < t; s++)
                prefix[s + 1] = prefix[s] + row[s];
            for (size_t s = 0; s < t; s++) {
                const size_t lo = s >= left ? s - left : 0;
                const size_t hi = std::min(t, s + right + 1);
                row[s] = (prefix[hi] - prefix[lo]) / double(hi - lo);
            }
        }
    }

    if (spec.standardize && n > 0) {
        for (size_t s = 0; s < t; s++) {
            double mean = 0.0;
            for (size_t i = 0; i < n; i++)
                mean += out.at(i, s);
            mean /= double(n);
            double var = 0.0;
            for (size_t i = 0; i < n; i++) {
                const double d = out.at(i, s) - mean;
                var += d * d;
            }
            var /= double(n);
            const double sd = std::sqrt(var);
            for (size_t i = 0; i < n; i++)
                out.at(i, s) = var > 0.0 ? (out.at(i, s) - mean) / sd : 0.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting

std::vector<size_t> sample_without_replacement(size_t pool, size_t n,
                                               uint64_t seed) {
    if (n > pool)
        throw InvalidArgument("cannot draw " + std::to_string(n) +
                              " items from a pool of " + std::to_string(pool));
    std::vector<size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), size_t(0));
    Rng rng(splitmix64(seed));
    for (size_t i = 0; i < n; i++) {
        std::uniform_int_distribution<size_t> pick(i, pool - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    return idx;
}

std::pair<TraceSet, TraceSet> split(const TraceSet &ts, size_t n_profiling,
                                    size_t n_attack, uint64_t seed) {
    if (n_profiling + n_attack > ts.n_traces())
        throw InvalidArgument("split needs " +
                              std::to_string(n_profiling + n_attack) +
                              " traces but the set holds " +
                              std::to_string(ts.n_traces()));
    const auto idx =
        sample_without_replacement(ts.n_traces(), n_profiling + n_attack, seed);
    std::span<const size_t> all(idx);
    return {ts.subset(all.first(n_profiling)),
            ts.subset(all.subspan(n_profiling))};
}

} // namespace scaeda
