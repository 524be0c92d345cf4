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

#include "scaeda/report.h"

#include <json.hpp>
#include <openssl/evp.h>

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace scaeda {
namespace report {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string &s) {
    if (s.empty())
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            return false;
    return true;
}

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace

Config Config::parse(const std::string &text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    for (size_t lineno = 1; std::getline(in, line); lineno++) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where, where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section))
                throw ConfigError(where, where + ": bad section name '" +
                                             section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where, where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_name(key))
            throw ConfigError(where, where + ": bad key '" + key + "'");
        const std::string qualified = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(qualified))
            throw ConfigError(qualified, where + ": duplicate key '" + qualified + "'");
        cfg.entries_[qualified] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path.string(), "cannot read config file '" +
                                             path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string &qualified) const {
    const auto it = entries_.find(qualified);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void Config::set(const std::string &qualified, const std::string &value) {
    entries_[qualified] = value;
}

std::string Config::dump() const {
    // Bare keys must precede every section header to stay sectionless.
    std::string out;
    for (const auto &[k, v] : entries_)
        if (k.find('.') == std::string::npos)
            out += k + " = " + v + "\n";
    std::string current;
    for (const auto &[k, v] : entries_) {
        const auto dot = k.find('.');
        if (dot == std::string::npos)
            continue;
        const std::string section = k.substr(0, dot);
        if (section != current) {
            out += (out.empty() ? "" : "\n") + std::string("[") + section + "]\n";
            current = section;
        }
        out += k.substr(dot + 1) + " = " + v + "\n";
    }
    return out;
}

std::string format_eval(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5E", v);
    return buf;
}

void write_iteration_csv(std::ostream &out, const eda::IterationRecord &rec,
                         size_t n_devices) {
    out << "Ind,Eval,n_POI";
    if (n_devices == 1)
        out << ",ge";
    else
        for (size_t d = 1; d <= n_devices; d++)
            out << ",ge_D" << d;
    out << "\n";
    size_t ind = 1;
    for (const auto &i : rec.population) {
        out << ind++ << "," << format_eval(i.eval.value_or(0.0)) << ","
            << i.n_poi();
        for (size_t d = 0; d < n_devices; d++)
            out << "," << (d < i.ge.size() ? i.ge[d] : 0u);
        out << "\n";
    }
}

std::vector<std::filesystem::path>
emit_iteration_csv(const std::vector<eda::IterationRecord> &records,
                   size_t n_devices, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (const auto &rec : records) {
        char name[32];
        std::snprintf(name, sizeof(name), "iteration_%03zu.csv", rec.iteration);
        const auto path = dir / name;
        auto out = open_out(path);
        write_iteration_csv(out, rec, n_devices);
        paths.push_back(path);
    }
    return paths;
}

void write_ge_curve_csv(std::ostream &out, const ta::AttackResult &result) {
    out << "n_traces_used,rank\n";
    for (size_t i = 0; i < result.ge_curve.size(); i++)
        out << (i + 1) << "," << result.ge_curve[i] << "\n";
}

void emit_ge_curve_csv(const ta::AttackResult &result,
                       const std::filesystem::path &path) {
    auto out = open_out(path);
    write_ge_curve_csv(out, result);
}

void write_graphic_csv(std::ostream &out, const poi::SelectionGraphic &g) {
    out << "sample_index,value\n";
    char buf[40];
    for (size_t i = 0; i < g.values.size(); i++) {
        std::snprintf(buf, sizeof(buf), "%.9E", g.values[i]);
        out << i << "," << buf << "\n";
    }
}

void write_doe_runs_csv(std::ostream &out, const doe::DoeResult &r) {
    out << "Exp,A,B,C,n_POI,ge,Eval\n";
    for (size_t i = 0; i < r.runs.size(); i++) {
        const auto &run = r.runs[i];
        out << (i + 1);
        for (double l : run.point.level)
            out << "," << l;
        out << "," << run.best.n_poi() << ",";
        for (size_t d = 0; d < run.best.ge.size(); d++)
            out << (d ? ";" : "") << run.best.ge[d];
        out << "," << format_eval(run.best.eval.value_or(0.0)) << "\n";
    }
}

void write_doe_effects_csv(std::ostream &out, const doe::EffectTable &t) {
    out << "effect,value\n";
    for (size_t e = 0; e < t.effects.size(); e++)
        out << doe::EFFECT_NAMES[e] << "," << format_eval(t.effects[e]) << "\n";
}

void write_marginals_csv(std::ostream &out, const eda::MarginalModel &m) {
    out << "sample_index,probability\n";
    char buf[32];
    for (size_t i = 0; i < m.probs.size(); i++) {
        std::snprintf(buf, sizeof(buf), "%.6f", m.probs[i]);
        out << i << "," << buf << "\n";
    }
}

std::string file_sha256(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read '" + path.string() + "'");
    EVP_MD_CTX *ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < len; i++) {
        std::snprintf(b, sizeof(b), "%02x", md[i]);
        hex += b;
    }
    return hex;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["subcommand"] = subcommand;
    j["config"] = config.entries();
    j["seeds"] = seeds;
    j["input_digests"] = input_digests;
    j["started"] = started;
    j["finished"] = finished;
    j["conventions"] = conventions;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string &text) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.tool_version = j.value("tool_version", "");
        m.subcommand = j.at("subcommand").get<std::string>();
        for (const auto &[k, v] : j.at("config").items())
            m.config.set(k, v.get<std::string>());
        if (j.contains("seeds"))
            m.seeds = j["seeds"].get<std::map<std::string, uint64_t>>();
        if (j.contains("input_digests"))
            m.input_digests =
                j["input_digests"].get<std::map<std::string, std::string>>();
        m.started = j.value("started", "");
        m.finished = j.value("finished", "");
        if (j.contains("conventions"))
            m.conventions =
                j["conventions"].get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("manifest", std::string("malformed manifest: ") + e.what());
    }
    return m;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace report
} // namespace scaeda
