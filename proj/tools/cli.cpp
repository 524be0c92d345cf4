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

#include "cli.h"

#include "scaeda/aes.h"
#include "scaeda/doe.h"
#include "scaeda/eda.h"
#include "scaeda/poi.h"
#include "scaeda/report.h"
#include "scaeda/sim.h"
#include "scaeda/template_attack.h"
#include "scaeda/traces.h"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace scaeda {
namespace cli {

namespace {

namespace fs = std::filesystem;

constexpr const char *TOOL_VERSION = "scaeda 0.1.0";

/// Raised for bad input data (as opposed to bad usage); maps to DATA_ERROR.
class DataError : public Error {
  public:
    using Error::Error;
};

/// Every key a configuration file may contain, across all subcommands.
const std::set<std::string> &known_keys() {
    static const std::set<std::string> keys = {
        "io.out",
        "sim.impl", "sim.n_traces", "sim.n_samples", "sim.byte", "sim.key",
        "sim.encoding", "sim.seed",
        "device.gain", "device.offset", "device.noise",
        "device.value_positions", "device.value_coeffs",
        "device.mask_positions", "device.mask_coeffs",
        "device.baseline_seed", "device.baseline_amplitude",
        "family.size", "family.index", "family.seed", "family.gain_jitter",
        "family.offset_jitter", "family.noise_jitter",
        "data.profile", "data.attack",
        "model.kind", "model.byte", "model.ct_byte_1", "model.ct_byte_2",
        "preprocess.zero_mean", "preprocess.standardize",
        "preprocess.lowpass_window",
        "poi.method", "poi.normalize",
        "attack.poi", "attack.top_k", "attack.n_attack", "attack.seed",
        "attack.mode", "attack.key",
        "eval.cf", "eval.n_samples", "eval.aggregation", "eval.n_attack",
        "eval.mode", "eval.seed", "eval.min_class_count",
        "eda.population", "eda.selected", "eda.iterations", "eda.seed",
        "eda.init", "eda.init_p", "eda.graphic_method", "eda.elitism",
        "eda.p_floor", "eda.p_ceil", "eda.entropy_stop",
        "doe.a_low", "doe.a_high", "doe.b_low", "doe.b_high", "doe.c_low",
        "doe.c_high", "doe.response",
    };
    return keys;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!(item = trim(item)).empty())
            out.push_back(item);
    return out;
}

template <typename T> std::string join(const std::vector<T> &v) {
    std::ostringstream out;
    for (size_t i = 0; i < v.size(); i++)
        out << (i ? "," : "") << v[i];
    return out.str();
}

std::string real_text(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

/// Resolved settings: flags override the configuration file (or the
/// replayed manifest); every value read, including defaults, is recorded so
/// the manifest captures the complete configuration.
class Settings {
  public:
    explicit Settings(report::Config source) : source_(std::move(source)) {}

    void check_known() const {
        for (const auto &[key, value] : source_.entries())
            if (!known_keys().count(key))
                throw report::ConfigError(key, "unknown configuration key '" +
                                                   key + "'");
    }

    std::optional<std::string> raw(const std::string &key) {
        auto v = source_.get(key);
        if (v)
            resolved_.set(key, *v);
        return v;
    }

    std::string text(const std::string &key, const std::string &fallback) {
        auto v = source_.get(key).value_or(fallback);
        resolved_.set(key, v);
        return v;
    }

    std::string required(const std::string &key) {
        auto v = raw(key);
        if (!v || v->empty())
            throw report::ConfigError(key, "missing required setting '" + key + "'");
        return *v;
    }

    template <typename T> T integer(const std::string &key, T fallback) {
        auto v = source_.get(key);
        if (!v) {
            resolved_.set(key, std::to_string(fallback));
            return fallback;
        }
        resolved_.set(key, *v);
        return parse_integer<T>(key, *v);
    }

    double real(const std::string &key, double fallback) {
        auto v = source_.get(key);
        if (!v) {
            resolved_.set(key, real_text(fallback));
            return fallback;
        }
        resolved_.set(key, *v);
        return parse_real(key, *v);
    }

    bool boolean(const std::string &key, bool fallback) {
        auto v = source_.get(key);
        if (!v) {
            resolved_.set(key, fallback ? "true" : "false");
            return fallback;
        }
        resolved_.set(key, *v);
        if (*v == "true" || *v == "yes" || *v == "on" || *v == "1")
            return true;
        if (*v == "false" || *v == "no" || *v == "off" || *v == "0")
            return false;
        throw report::ConfigError(key, "'" + key + "' expects a boolean, got '" +
                                           *v + "'");
    }

    std::vector<size_t> index_list(const std::string &key,
                                   const std::vector<size_t> &fallback) {
        auto v = source_.get(key);
        if (!v) {
            resolved_.set(key, join(fallback));
            return fallback;
        }
        resolved_.set(key, *v);
        std::vector<size_t> out;
        for (const auto &item : split_list(*v))
            out.push_back(parse_integer<size_t>(key, item));
        return out;
    }

    std::vector<double> real_list(const std::string &key,
                                  const std::vector<double> &fallback) {
        auto v = source_.get(key);
        if (!v) {
            std::vector<std::string> parts;
            for (double d : fallback)
                parts.push_back(real_text(d));
            resolved_.set(key, join(parts));
            return fallback;
        }
        resolved_.set(key, *v);
        std::vector<double> out;
        for (const auto &item : split_list(*v))
            out.push_back(parse_real(key, item));
        return out;
    }

    /// A seed: the setting itself, else SCA_SEED, else 1.
    uint64_t seed(const std::string &key) {
        auto v = source_.get(key);
        std::string text;
        if (v)
            text = *v;
        else if (const char *env = std::getenv("SCA_SEED"); env && *env)
            text = env;
        else
            text = "1";
        const auto s = parse_integer<uint64_t>(key, text);
        resolved_.set(key, std::to_string(s));
        seeds_[key] = s;
        return s;
    }

    /// Runs a value-level check, attributing a failure to \p key.
    template <typename F> auto checked(const std::string &key, F &&f) {
        try {
            return f();
        } catch (const report::ConfigError &) {
            throw;
        } catch (const InvalidArgument &e) {
            throw report::ConfigError(key, "'" + key + "': " + e.what());
        }
    }

    const report::Config &resolved() const { return resolved_; }
    const std::map<std::string, uint64_t> &seeds() const { return seeds_; }

  private:
    template <typename T> static T parse_integer(const std::string &key,
                                                 const std::string &s) {
        T value{};
        const auto *end = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(s.data(), end, value);
        if (ec != std::errc() || ptr != end)
            throw report::ConfigError(key, "'" + key +
                                               "' expects a non-negative integer, got '" +
                                               s + "'");
        return value;
    }

    static double parse_real(const std::string &key, const std::string &s) {
        char *end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
            throw report::ConfigError(key, "'" + key + "' expects a number, got '" +
                                               s + "'");
        return v;
    }

    report::Config source_;
    report::Config resolved_;
    std::map<std::string, uint64_t> seeds_;
};

/// Inputs read during a run, with their digests; verified against the
/// manifest when replaying.
class Inputs {
  public:
    explicit Inputs(const std::map<std::string, std::string> *expected)
        : expected_(expected) {}

    TraceSet read(const std::string &label, const std::string &path) {
        if (!fs::exists(path))
            throw report::ConfigError(label, "'" + label + "': input file '" +
                                                 path + "' not found");
        const auto digest = report::file_sha256(path);
        if (expected_) {
            auto it = expected_->find(label);
            if (it != expected_->end() && it->second != digest)
                throw DataError("input '" + label + "' (" + path +
                                ") differs from the one recorded in the manifest");
        }
        digests_[label] = digest;
        return read_sctf(path);
    }

    const std::map<std::string, std::string> &digests() const { return digests_; }

  private:
    const std::map<std::string, std::string> *expected_;
    std::map<std::string, std::string> digests_;
};

struct Context {
    Settings settings;
    Inputs inputs;
    std::ostream &out;
    std::string subcommand;
    std::string started;
};

aes::LeakageModel read_model(Settings &s) {
    aes::LeakageModel m;
    const auto kind = s.text("model.kind", "hw-sbox");
    m.kind = s.checked("model.kind", [&] { return aes::parse_leakage_kind(kind); });
    m.byte_index = s.integer<unsigned>("model.byte", 0);
    if (m.kind == aes::LeakageKind::HD_LAST_ROUND) {
        m.ct_byte_1 = s.integer<unsigned>("model.ct_byte_1", 0);
        m.ct_byte_2 = s.integer<unsigned>("model.ct_byte_2", 0);
    }
    s.checked("model.byte", [&] {
        m.validate();
        return 0;
    });
    return m;
}

PreprocessSpec read_preprocess(Settings &s) {
    PreprocessSpec p;
    p.zero_mean = s.boolean("preprocess.zero_mean", false);
    p.standardize = s.boolean("preprocess.standardize", false);
    p.lowpass_window = s.integer<size_t>("preprocess.lowpass_window", 1);
    if (p.lowpass_window < 1)
        throw report::ConfigError("preprocess.lowpass_window",
                                  "'preprocess.lowpass_window' must be >= 1");
    return p;
}

TraceSet load(Context &ctx, const std::string &label, const std::string &path,
              const PreprocessSpec &pre) {
    auto ts = ctx.inputs.read(label, path);
    if (pre.zero_mean || pre.standardize || pre.lowpass_window > 1)
        ts = preprocess(ts, pre);
    return ts;
}

poi::SelectionGraphic graphic_for(const TraceSet &profiling,
                                  const aes::LeakageModel &model,
                                  poi::Method method) {
    const auto labels = ta::known_key_labels(profiling, model);
    switch (method) {
    case poi::Method::SOST:
        return poi::sost(profiling, labels);
    case poi::Method::SOSD:
        return poi::sosd(profiling, labels);
    case poi::Method::SNR:
        return poi::snr(profiling, labels);
    case poi::Method::CORRELATION: {
        std::vector<double> h(labels.begin(), labels.end());
        return poi::correlation_graphic(profiling, h);
    }
    }
    throw InvalidArgument("unknown POI selection method");
}

ta::AttackMode parse_mode(Settings &s, const std::string &key) {
    const auto v = s.text(key, "plain");
    if (v == "plain")
        return ta::AttackMode::PLAIN;
    if (v == "mask-marginal")
        return ta::AttackMode::MASK_MARGINAL;
    throw report::ConfigError(key, "'" + key + "' must be plain or mask-marginal, got '" +
                                       v + "'");
}

std::string mode_name(ta::AttackMode m) {
    return m == ta::AttackMode::PLAIN ? "plain" : "mask-marginal";
}

std::ofstream open_out(const fs::path &path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

void write_manifest(Context &ctx, const fs::path &path,
                    std::map<std::string, std::string> conventions) {
    report::RunManifest m;
    m.tool_version = TOOL_VERSION;
    m.subcommand = ctx.subcommand;
    m.config = ctx.settings.resolved();
    m.seeds = ctx.settings.seeds();
    m.input_digests = ctx.inputs.digests();
    m.started = ctx.started;
    m.finished = report::utc_timestamp();
    conventions.emplace("rank_base", "1");
    m.conventions = std::move(conventions);
    auto out = open_out(path);
    out << m.to_json();
}

fs::path sidecar_manifest(const fs::path &out) {
    return fs::path(out.string() + ".manifest.json");
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(Context &ctx) {
    auto &s = ctx.settings;
    const auto impl = s.text("sim.impl", "unprotected");
    sim::SimConfig cfg;
    if (impl == "unprotected")
        cfg.implementation = sim::Implementation::UNPROTECTED;
    else if (impl == "masked")
        cfg.implementation = sim::Implementation::MASKED;
    else
        throw report::ConfigError("sim.impl", "'sim.impl' must be unprotected or masked, got '" +
                                                  impl + "'");
    cfg.n_traces = s.integer<size_t>("sim.n_traces", 1000);
    cfg.n_samples = s.integer<size_t>("sim.n_samples", 500);
    cfg.byte_index = s.integer<unsigned>("sim.byte", 0);
    if (auto key = s.raw("sim.key"); key && !key->empty()) {
        if (key->size() != 32)
            throw report::ConfigError("sim.key", "'sim.key' must be 32 hex digits");
        std::array<uint8_t, 16> k{};
        for (size_t i = 0; i < 16; i++) {
            auto [p, ec] = std::from_chars(key->data() + 2 * i,
                                           key->data() + 2 * i + 2, k[i], 16);
            if (ec != std::errc() || p != key->data() + 2 * i + 2)
                throw report::ConfigError("sim.key", "'sim.key' must be 32 hex digits");
        }
        cfg.fixed_key = k;
    }
    const auto enc = s.text("sim.encoding", "float32");
    if (enc == "float32")
        cfg.encoding = SampleEncoding::FLOAT32;
    else if (enc == "int8")
        cfg.encoding = SampleEncoding::INT8;
    else
        throw report::ConfigError("sim.encoding", "'sim.encoding' must be float32 or int8, got '" +
                                                      enc + "'");
    cfg.seed = s.seed("sim.seed");

    const size_t t = cfg.n_samples;
    sim::DeviceProfile dev;
    dev.gain = s.real("device.gain", 1.0);
    dev.offset = s.real("device.offset", 0.0);
    dev.noise_sigma = s.real("device.noise", 1.0);
    std::vector<size_t> default_value;
    for (size_t i = 1; i <= 5 && t >= 6; i++)
        default_value.push_back(i * t / 6);
    dev.value_positions = s.index_list("device.value_positions", default_value);
    dev.value_coeffs = s.real_list(
        "device.value_coeffs", std::vector<double>(dev.value_positions.size(), 1.0));
    std::vector<size_t> default_mask;
    if (cfg.implementation == sim::Implementation::MASKED && t >= 12)
        default_mask.push_back(t / 12);
    dev.mask_positions = s.index_list("device.mask_positions", default_mask);
    dev.mask_coeffs = s.real_list(
        "device.mask_coeffs", std::vector<double>(dev.mask_positions.size(), 1.0));
    dev.baseline_seed = s.integer<uint64_t>("device.baseline_seed", 0);
    dev.baseline_amplitude = s.real("device.baseline_amplitude", 0.0);
    s.checked("device.value_positions", [&] {
        dev.validate(t);
        return 0;
    });

    const auto family_size = s.integer<size_t>("family.size", 1);
    const auto index = s.integer<size_t>("family.index", 0);
    if (family_size > 1 || index > 0) {
        if (index >= family_size)
            throw report::ConfigError("family.index", "'family.index' must be < family.size");
        const auto fseed = s.seed("family.seed");
        const double gj = s.real("family.gain_jitter", 0.0);
        const double oj = s.real("family.offset_jitter", 0.0);
        const double nj = s.real("family.noise_jitter", 0.0);
        dev = s.checked("family.size", [&] {
            return sim::make_clone_family(dev, family_size, fseed, gj, oj, nj)[index];
        });
    }

    const fs::path out = s.required("io.out");
    const auto ts = s.checked("sim.n_traces", [&] { return sim::simulate(dev, cfg); });
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    write_sctf(ts, out);
    write_manifest(ctx, sidecar_manifest(out), {});
    ctx.out << "wrote " << ts.n_traces() << " traces of " << ts.n_samples()
            << " samples to " << out.string() << "\n";
    return OK;
}

// ---------------------------------------------------------------- poi-graph

int cmd_poi_graph(Context &ctx) {
    auto &s = ctx.settings;
    const auto profile = s.required("data.profile");
    const auto model = read_model(s);
    const auto pre = read_preprocess(s);
    const auto method_name = s.text("poi.method", "sost");
    const auto method = s.checked("poi.method", [&] { return poi::parse_method(method_name); });
    const bool normalize = s.boolean("poi.normalize", true);
    const fs::path out = s.required("io.out");

    const auto ts = load(ctx, "data.profile", profile, pre);
    auto g = graphic_for(ts, model, method);
    if (normalize)
        g = poi::normalize(g);
    {
        auto f = open_out(out);
        report::write_graphic_csv(f, g);
    }
    write_manifest(ctx, sidecar_manifest(out), {{"leakage_model", aes::to_string(model.kind)}});
    const auto peak = std::max_element(g.values.begin(), g.values.end());
    ctx.out << "peak at sample " << (peak - g.values.begin()) << " ("
            << poi::to_string(method) << (normalize ? ", normalized" : "")
            << (g.degenerate ? ", degenerate" : "") << ")\n";
    return OK;
}

// ---------------------------------------------------------------- attack

int cmd_attack(Context &ctx) {
    auto &s = ctx.settings;
    const auto profile_path = s.required("data.profile");
    const auto attack_path = s.required("data.attack");
    const auto model = read_model(s);
    const auto pre = read_preprocess(s);
    const auto poi_text = s.raw("attack.poi");
    const auto n_attack = s.integer<size_t>("attack.n_attack", 0);
    const auto seed = s.seed("attack.seed");
    const auto mode = parse_mode(s, "attack.mode");
    std::optional<uint8_t> key;
    if (auto k = s.raw("attack.key"); k && !k->empty()) {
        unsigned v = 0;
        auto [p, ec] = std::from_chars(k->data(), k->data() + k->size(), v);
        if (ec != std::errc() || p != k->data() + k->size() || v > 255)
            throw report::ConfigError("attack.key", "'attack.key' must be a byte value 0..255");
        key = static_cast<uint8_t>(v);
    }
    const fs::path out = s.required("io.out");

    const auto profiling = load(ctx, "data.profile", profile_path, pre);
    const auto pool = load(ctx, "data.attack", attack_path, pre);

    std::vector<size_t> poi;
    if (poi_text && !poi_text->empty()) {
        poi = s.index_list("attack.poi", {});
    } else {
        const auto k = s.integer<size_t>("attack.top_k", 20);
        const auto method_name = s.text("poi.method", "sost");
        const auto method =
            s.checked("poi.method", [&] { return poi::parse_method(method_name); });
        poi = poi::top_k_select(graphic_for(profiling, model, method), k).poi();
    }
    for (size_t p : poi)
        if (p >= profiling.n_samples())
            throw report::ConfigError("attack.poi", "'attack.poi': sample " +
                                                        std::to_string(p) + " out of range");

    const size_t n = n_attack ? n_attack : pool.n_traces();
    if (n > pool.n_traces())
        throw report::ConfigError("attack.n_attack", "'attack.n_attack' exceeds the attack set");
    const auto attack = pool.subset(ta::attack_subset(pool.n_traces(), n, seed, 0));

    ta::AttackResult result;
    if (mode == ta::AttackMode::PLAIN) {
        const auto tset = ta::build_templates(profiling, model, poi);
        result = ta::rank_keys(attack, tset, key);
    } else {
        const auto masked = ta::build_mask_class_templates(profiling, model, poi);
        result = ta::masked_marginal_score(attack, masked.sets, masked.prior, key);
    }
    report::emit_ge_curve_csv(result, out);
    write_manifest(ctx, sidecar_manifest(out),
                   {{"leakage_model", aes::to_string(model.kind)},
                    {"attack_mode", mode_name(mode)}});
    ctx.out << "poi " << join(poi) << "\n"
            << "correct_rank " << result.correct_rank << "\n";
    return OK;
}

// ---------------------------------------------------------------- eda / doe

/// Everything the eda and doe subcommands share.
struct Campaign {
    TraceSet profiling;
    std::vector<TraceSet> attacks;
    aes::LeakageModel model;
    eda::EvalConfig eval;
    eda::EDAConfig eda;
};

Campaign read_campaign(Context &ctx) {
    auto &s = ctx.settings;
    Campaign c;
    const auto profile_path = s.required("data.profile");
    const auto attack_paths = split_list(s.required("data.attack"));
    c.model = read_model(s);
    const auto pre = read_preprocess(s);

    c.eval.correction_factor = s.real("eval.cf", 10.0);
    c.eval.eval_n_samples = s.integer<size_t>("eval.n_samples", 0);
    const auto agg = s.text("eval.aggregation", "product");
    c.eval.aggregation =
        s.checked("eval.aggregation", [&] { return eda::parse_aggregation(agg); });
    c.eval.n_attack = s.integer<size_t>("eval.n_attack", 0);
    c.eval.mode = parse_mode(s, "eval.mode");
    c.eval.seed = s.seed("eval.seed");
    c.eval.min_class_count =
        s.integer<size_t>("eval.min_class_count", ta::DEFAULT_MIN_CLASS_COUNT);
    s.checked("eval.cf", [&] {
        c.eval.validate();
        return 0;
    });

    c.eda.population_size = s.integer<size_t>("eda.population", 20);
    // 0 selects half the population, also for each DoE population level.
    c.eda.n_selected = s.integer<size_t>("eda.selected", 0);
    c.eda.n_iterations = s.integer<size_t>("eda.iterations", 10);
    c.eda.seed = s.seed("eda.seed");
    const auto init = s.text("eda.init", "graphic");
    if (init == "uniform")
        c.eda.init = eda::InitKind::UNIFORM;
    else if (init == "graphic")
        c.eda.init = eda::InitKind::FROM_GRAPHIC;
    else
        throw report::ConfigError("eda.init", "'eda.init' must be uniform or graphic, got '" +
                                                  init + "'");
    c.eda.init_p = s.real("eda.init_p", c.eda.init == eda::InitKind::UNIFORM ? 0.1 : 0.5);
    c.eda.elitism = s.boolean("eda.elitism", true);
    c.eda.p_floor = s.real("eda.p_floor", 0.0);
    c.eda.p_ceil = s.real("eda.p_ceil", 0.0);
    c.eda.entropy_stop = s.real("eda.entropy_stop", 0.0);
    poi::Method gmethod = poi::Method::SOST;
    if (c.eda.init == eda::InitKind::FROM_GRAPHIC) {
        const auto name = s.text("eda.graphic_method", "sost");
        gmethod = s.checked("eda.graphic_method", [&] { return poi::parse_method(name); });
    }

    c.profiling = load(ctx, "data.profile", profile_path, pre);
    for (size_t d = 0; d < attack_paths.size(); d++)
        c.attacks.push_back(load(ctx, attack_paths.size() == 1
                                          ? std::string("data.attack")
                                          : "data.attack." + std::to_string(d + 1),
                                 attack_paths[d], pre));
    if (c.eda.init == eda::InitKind::FROM_GRAPHIC)
        c.eda.graphic = poi::normalize(graphic_for(c.profiling, c.model, gmethod));
    s.checked("eda.population", [&] {
        c.eda.validate(c.profiling.n_samples());
        return 0;
    });
    return c;
}

std::map<std::string, std::string> campaign_conventions(const Campaign &c) {
    return {{"leakage_model", aes::to_string(c.model.kind)},
            {"ge_aggregation", eda::to_string(c.eval.aggregation)},
            {"eval_n_samples", std::to_string(c.eval.eval_n_samples
                                                  ? c.eval.eval_n_samples
                                                  : c.profiling.n_samples())},
            {"attack_mode", mode_name(c.eval.mode)},
            {"ge_experiments", "1"}};
}

std::string ge_text(const Individual &ind) {
    return join(ind.ge);
}

int cmd_eda(Context &ctx) {
    auto c = read_campaign(ctx);
    const fs::path out = ctx.settings.required("io.out");
    const eda::TemplateFitness fitness(c.profiling, c.attacks, c.model, c.eval);
    const auto result = eda::run_eda(c.eda, fitness);

    fs::create_directories(out);
    report::emit_iteration_csv(result.records, c.attacks.size(), out);
    {
        auto f = open_out(out / "marginals_final.csv");
        report::write_marginals_csv(f, result.records.back().marginals);
    }
    {
        auto f = open_out(out / "best_poi.csv");
        f << "sample_index\n";
        for (size_t p : result.best.poi())
            f << p << "\n";
    }
    write_manifest(ctx, out / "manifest.json", campaign_conventions(c));
    ctx.out << "iterations " << result.records.size() - 1 << "\n"
            << "best eval " << report::format_eval(*result.best.eval) << " n_POI "
            << result.best.n_poi() << " ge " << ge_text(result.best) << "\n"
            << "best poi " << join(result.best.poi()) << "\n";
    return OK;
}

/// Shares one precomputed fitness between DoE runs; only the correction
/// factor differs between them.
class SharedFitness : public eda::Fitness {
  public:
    explicit SharedFitness(std::shared_ptr<eda::TemplateFitness> f)
        : f_(std::move(f)) {}
    size_t length() const override { return f_->length(); }
    void evaluate(Individual &ind) const override { f_->evaluate(ind); }

  private:
    std::shared_ptr<eda::TemplateFitness> f_;
};

int cmd_doe(Context &ctx) {
    auto c = read_campaign(ctx);
    auto &s = ctx.settings;
    std::array<doe::FactorSpec, 3> factors = {{
        {"A", s.real("doe.a_low", 1.0), s.real("doe.a_high", 10.0),
         doe::Binder::CORRECTION_FACTOR},
        {"B", s.real("doe.b_low", 5.0), s.real("doe.b_high", 10.0),
         doe::Binder::N_ITERATIONS},
        {"C", s.real("doe.c_low", 10.0), s.real("doe.c_high", 20.0),
         doe::Binder::POPULATION_SIZE},
    }};
    const auto response_name = s.text("doe.response", "eval");
    doe::Response response;
    if (response_name == "eval")
        response = doe::Response::BEST_EVAL;
    else if (response_name == "ge")
        response = doe::Response::BEST_GE;
    else
        throw report::ConfigError("doe.response", "'doe.response' must be eval or ge, got '" +
                                                      response_name + "'");
    s.checked("doe.a_low", [&] { return doe::full_factorial_plan(factors); });
    const fs::path out = s.required("io.out");

    auto shared = std::make_shared<eda::TemplateFitness>(c.profiling, c.attacks,
                                                         c.model, c.eval);
    const auto result = doe::run_doe(
        factors, c.eda, c.eval,
        [&](const eda::EvalConfig &cfg) -> std::unique_ptr<eda::Fitness> {
            shared->set_correction_factor(cfg.correction_factor);
            return std::make_unique<SharedFitness>(shared);
        },
        response);

    fs::create_directories(out);
    {
        auto f = open_out(out / "doe_runs.csv");
        report::write_doe_runs_csv(f, result);
    }
    {
        auto f = open_out(out / "doe_effects.csv");
        report::write_doe_effects_csv(f, result.effects);
    }
    auto conv = campaign_conventions(c);
    conv["doe_response"] = response_name;
    write_manifest(ctx, out / "manifest.json", conv);
    for (size_t i = 0; i < doe::EFFECT_NAMES.size(); i++)
        ctx.out << "effect " << doe::EFFECT_NAMES[i] << " "
                << report::format_eval(result.effects.effects[i]) << "\n";
    return OK;
}

// ---------------------------------------------------------------- dispatch

struct FlagSpec {
    const char *flag;
    const char *key;
    const char *help;
};

const std::vector<FlagSpec> &common_model_flags() {
    static const std::vector<FlagSpec> flags = {
        {"--model", "model.kind", "Leakage model: iv-sbox, hw-sbox, hd-last-round"},
        {"--byte", "model.byte", "Key byte index of the Sbox models"},
        {"--ct-byte-1", "model.ct_byte_1", "Ciphertext byte XOR-ed with the key (hd-last-round)"},
        {"--ct-byte-2", "model.ct_byte_2", "Ciphertext byte of the distance (hd-last-round)"},
    };
    return flags;
}

std::vector<FlagSpec> flags_for(const std::string &cmd) {
    std::vector<FlagSpec> f;
    auto add = [&](std::initializer_list<FlagSpec> l) { f.insert(f.end(), l); };
    if (cmd == "simulate") {
        add({{"--impl", "sim.impl", "Implementation: unprotected or masked"},
             {"--n-traces", "sim.n_traces", "Number of traces"},
             {"--n-samples", "sim.n_samples", "Samples per trace"},
             {"--byte", "sim.byte", "Leaking state byte"},
             {"--key", "sim.key", "Fixed 16-byte key as 32 hex digits (default: random per trace)"},
             {"--encoding", "sim.encoding", "Sample encoding: float32 or int8"},
             {"--seed", "sim.seed", "Trace generation seed"},
             {"--noise", "device.noise", "Gaussian noise sigma"},
             {"--gain", "device.gain", "Leakage gain"},
             {"--offset", "device.offset", "DC offset"},
             {"--family-size", "family.size", "Clone family size"},
             {"--device-index", "family.index", "Device of the clone family to simulate (0-based)"}});
        return f;
    }
    f = common_model_flags();
    add({{"--profile", "data.profile", "Profiling SCTF file"}});
    if (cmd == "poi-graph") {
        add({{"--method", "poi.method", "Selection graphic: sost, sosd, snr, correlation"},
             {"--normalize", "poi.normalize", "Min-max normalize the graphic (true/false)"}});
        return f;
    }
    if (cmd == "attack") {
        add({{"--attack", "data.attack", "Attack SCTF file"},
             {"--poi", "attack.poi", "Comma-separated POI sample indices"},
             {"--top-k", "attack.top_k", "Use the top-k samples of the selection graphic"},
             {"--method", "poi.method", "Selection graphic for --top-k"},
             {"--n-attack", "attack.n_attack", "Attack traces to use (default: all)"},
             {"--seed", "attack.seed", "Attack trace sampling seed"},
             {"--mode", "attack.mode", "plain or mask-marginal"},
             {"--key", "attack.key", "Correct key byte (default: from metadata)"}});
        return f;
    }
    add({{"--attack", "data.attack", "Comma-separated attack SCTF files, one per device"},
         {"--cf", "eval.cf", "Correction factor"},
         {"--aggregation", "eval.aggregation", "Multi-device ge aggregation: product or sum"},
         {"--mode", "eval.mode", "plain or mask-marginal"},
         {"--n-attack", "eval.n_attack", "Attack traces per device (default: all)"},
         {"--population", "eda.population", "Population size R"},
         {"--selected", "eda.selected", "Selected individuals N"},
         {"--iterations", "eda.iterations", "EDA iterations"},
         {"--seed", "eda.seed", "EDA seed"},
         {"--init", "eda.init", "Initialization: uniform or graphic"},
         {"--init-p", "eda.init_p", "Initial bit probability"}});
    if (cmd == "doe")
        add({{"--response", "doe.response", "DoE response: eval or ge"}});
    return f;
}

using Handler = int (*)(Context &);

const std::vector<std::pair<std::string, std::pair<Handler, const char *>>> &
subcommands() {
    static const std::vector<std::pair<std::string, std::pair<Handler, const char *>>> cmds = {
        {"simulate", {cmd_simulate, "Generate synthetic AES power traces"}},
        {"poi-graph", {cmd_poi_graph, "Compute a POI selection graphic"}},
        {"attack", {cmd_attack, "Run a template attack on a POI set"}},
        {"eda", {cmd_eda, "Search POIs with the UMDA"}},
        {"doe", {cmd_doe, "Run the 2^3 design of experiments over CF, iterations and population"}},
    };
    return cmds;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
    CLI::App app{"Side-channel template attacks with UMDA point-of-interest selection",
                 "scaeda"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TOOL_VERSION);

    struct Parsed {
        std::map<std::string, std::string> overrides;
        std::vector<std::string> sets;
        std::string config;
        std::string manifest;
    };
    std::map<std::string, Parsed> parsed;
    std::map<std::string, CLI::App *> apps;
    for (const auto &[name, entry] : subcommands()) {
        auto *sub = app.add_subcommand(name, entry.second);
        auto &p = parsed[name];
        apps[name] = sub;
        sub->add_option("--config", p.config, "Configuration file (key = value, [sections])");
        sub->add_option("--manifest", p.manifest, "Replay the configuration of a run manifest");
        sub->add_option("--set", p.sets, "Override any configuration key: section.key=value");
        sub->add_option_function<std::string>(
            "--out", [&p](const std::string &v) { p.overrides["io.out"] = v; },
            "Output file or directory");
        for (const auto &spec : flags_for(name)) {
            const std::string key = spec.key;
            sub->add_option_function<std::string>(
                spec.flag, [&p, key](const std::string &v) { p.overrides[key] = v; },
                spec.help);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        for (const auto &[name, sub] : apps)
            if (sub->parsed()) {
                out << sub->help();
                return OK;
            }
        out << app.help();
        return OK;
    } catch (const CLI::CallForVersion &) {
        out << TOOL_VERSION << "\n";
        return OK;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return USAGE_ERROR;
    }

    std::string name;
    for (const auto &[n, sub] : apps)
        if (sub->parsed())
            name = n;
    auto &p = parsed[name];
    Handler handler = nullptr;
    for (const auto &[n, entry] : subcommands())
        if (n == name)
            handler = entry.first;

    try {
        report::Config source;
        std::optional<report::RunManifest> manifest;
        if (!p.manifest.empty() && !p.config.empty())
            throw report::ConfigError("--manifest", "--manifest and --config are exclusive");
        if (!p.manifest.empty()) {
            std::ifstream in(p.manifest);
            if (!in)
                throw report::ConfigError("--manifest", "cannot read manifest '" +
                                                            p.manifest + "'");
            std::stringstream text;
            text << in.rdbuf();
            manifest = report::RunManifest::from_json(text.str());
            if (manifest->subcommand != name)
                throw report::ConfigError("--manifest", "manifest records a '" +
                                                            manifest->subcommand +
                                                            "' run, not '" + name + "'");
            source = manifest->config;
        } else if (!p.config.empty()) {
            if (!fs::exists(p.config))
                throw report::ConfigError("--config", "configuration file '" + p.config +
                                                          "' not found");
            source = report::Config::load(p.config);
        }
        for (const auto &kv : p.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw report::ConfigError("--set", "--set expects key=value, got '" + kv + "'");
            source.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        for (const auto &[k, v] : p.overrides)
            source.set(k, v);

        Context ctx{Settings(std::move(source)),
                    Inputs(manifest ? &manifest->input_digests : nullptr), out, name,
                    report::utc_timestamp()};
        ctx.settings.check_known();
        return handler(ctx);
    } catch (const report::ConfigError &e) {
        err << "error [" << e.key() << "]: " << e.what() << "\n";
        return USAGE_ERROR;
    } catch (const InvalidArgument &e) {
        err << "error: " << e.what() << "\n";
        return DATA_ERROR;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return DATA_ERROR;
    }
}

} // namespace cli
} // namespace scaeda
