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

#include "scaeda/doe.h"
#include "scaeda/eda.h"
#include "scaeda/poi.h"
#include "scaeda/template_attack.h"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace scaeda {
namespace report {

/// Error in a configuration file; carries the offending key (or line).
class ConfigError : public Error {
  public:
    ConfigError(const std::string &key, const std::string &what)
        : Error(what), key_(key) {}
    const std::string &key() const { return key_; }

  private:
    std::string key_;
};

/// Line-oriented configuration: `# comment`, `[section]`, `key = value`.
/// Keys are addressed as "section.key"; keys before any section header
/// belong to the empty section and are addressed by their bare name.
class Config {
  public:
    static Config parse(const std::string &text);
    static Config load(const std::filesystem::path &path);

    std::optional<std::string> get(const std::string &qualified) const;
    void set(const std::string &qualified, const std::string &value);
    const std::map<std::string, std::string> &entries() const { return entries_; }

    /// Serializes back to the file grammar, sections in sorted order.
    std::string dump() const;

  private:
    std::map<std::string, std::string> entries_;
};

/// Eval in scientific notation with 6 significant digits.
std::string format_eval(double v);

/// Writes one iteration table: Ind, Eval, n_POI, then ge (single device) or
/// ge_D1..ge_Dk.
void write_iteration_csv(std::ostream &out, const eda::IterationRecord &rec,
                         size_t n_devices);

/// One CSV per iteration ("iteration_NNN.csv") under \p dir.
std::vector<std::filesystem::path>
emit_iteration_csv(const std::vector<eda::IterationRecord> &records,
                   size_t n_devices, const std::filesystem::path &dir);

/// Columns n_traces_used, rank.
void write_ge_curve_csv(std::ostream &out, const ta::AttackResult &result);
void emit_ge_curve_csv(const ta::AttackResult &result,
                       const std::filesystem::path &path);

/// Columns sample_index, value.
void write_graphic_csv(std::ostream &out, const poi::SelectionGraphic &g);

/// Columns Exp, A, B, C, n_POI, ge, Eval.
void write_doe_runs_csv(std::ostream &out, const doe::DoeResult &r);
/// Columns effect, value.
void write_doe_effects_csv(std::ostream &out, const doe::EffectTable &t);

/// Columns sample_index, probability.
void write_marginals_csv(std::ostream &out, const eda::MarginalModel &m);

/// SHA-256 of a file, lowercase hex.
std::string file_sha256(const std::filesystem::path &path);

/// Everything needed to reproduce a run.
struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    Config config;
    std::map<std::string, uint64_t> seeds;
    std::map<std::string, std::string> input_digests;
    std::string started;
    std::string finished;
    std::map<std::string, std::string> conventions;

    std::string to_json() const;
    static RunManifest from_json(const std::string &text);
};

/// Current UTC time, ISO-8601.
std::string utc_timestamp();

} // namespace report
} // namespace scaeda
