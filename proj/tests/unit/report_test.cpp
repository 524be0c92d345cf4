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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace scaeda;
using namespace scaeda::report;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string &name) {
    const auto dir = fs::temp_directory_path() /
                     ("scaeda_report_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

Individual scored(std::vector<size_t> poi, double eval, std::vector<unsigned> ge) {
    auto ind = Individual::from_indices(10, poi);
    ind.eval = eval;
    ind.ge = std::move(ge);
    return ind;
}

} // namespace

TEST(Config, ParsesSectionsCommentsAndBareKeys) {
    const auto cfg = Config::parse("# leading comment\n"
                                   "out = results\n"
                                   "\n"
                                   "[eda]\n"
                                   "population = 20   # trailing comment\n"
                                   "  iterations=10  \n"
                                   "[ sim ]\n"
                                   "noise = 1.5\n");
    EXPECT_EQ(cfg.get("out"), "results");
    EXPECT_EQ(cfg.get("eda.population"), "20");
    EXPECT_EQ(cfg.get("eda.iterations"), "10");
    EXPECT_EQ(cfg.get("sim.noise"), "1.5");
    EXPECT_FALSE(cfg.get("population"));
    EXPECT_EQ(cfg.entries().size(), 4u);
}

TEST(Config, ErrorsCarryTheOffendingKeyOrLine) {
    try {
        Config::parse("[eda]\nseed = 1\nseed = 2\n");
        FAIL();
    } catch (const ConfigError &e) {
        EXPECT_EQ(e.key(), "eda.seed");
    }
    try {
        Config::parse("[eda]\njust words\n");
        FAIL();
    } catch (const ConfigError &e) {
        EXPECT_EQ(e.key(), "line 2");
    }
    EXPECT_THROW(Config::parse("[eda\n"), ConfigError);
    EXPECT_THROW(Config::parse("bad key = 1\n"), ConfigError);
    EXPECT_THROW(Config::load("/nonexistent/scaeda.cfg"), ConfigError);
}

TEST(Config, DumpRoundTrips) {
    Config cfg;
    cfg.set("out", "x");
    cfg.set("eda.seed", "4");
    cfg.set("sim.noise", "2");
    cfg.set("eda.population", "20");
    const auto again = Config::parse(cfg.dump());
    EXPECT_EQ(again.entries(), cfg.entries());
}

TEST(Csv, EvalFormatHasSixSignificantDigits) {
    // -0.5078125 is exact in binary; printf rounds the tie to even.
    EXPECT_EQ(format_eval(-0.5078125), "-5.07812E-01");
    EXPECT_EQ(format_eval(-1.583e-11), "-1.58300E-11");
    EXPECT_EQ(format_eval(-4.6875e-4), "-4.68750E-04");
    EXPECT_EQ(format_eval(0.0), "0.00000E+00");
}

TEST(Csv, IterationTableSingleDevice) {
    eda::IterationRecord rec;
    rec.iteration = 2;
    rec.population = {scored({1, 2}, -4.6875e-4, {1}), scored({3}, -0.5078125, {13})};
    std::ostringstream out;
    write_iteration_csv(out, rec, 1);
    EXPECT_EQ(out.str(), "Ind,Eval,n_POI,ge\n"
                         "1,-4.68750E-04,2,1\n"
                         "2,-5.07812E-01,1,13\n");
}

TEST(Csv, IterationTableMultiDeviceAndFiles) {
    eda::IterationRecord a, b;
    a.iteration = 0;
    b.iteration = 1;
    a.population = {scored({1}, -1e-5, {1, 18, 22, 11})};
    b.population = {scored({1}, -1e-5, {1, 18, 22, 11}), scored({2, 3}, -0.2, {113, 82, 88, 135})};
    const auto dir = scratch_dir("iter");
    const auto paths = emit_iteration_csv({a, b}, 4, dir);
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(paths[0].filename(), "iteration_000.csv");
    EXPECT_EQ(paths[1].filename(), "iteration_001.csv");
    const auto rows = lines(slurp(paths[1]));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "Ind,Eval,n_POI,ge_D1,ge_D2,ge_D3,ge_D4");
    EXPECT_EQ(rows[2], "2,-2.00000E-01,2,113,82,88,135");
    fs::remove_all(dir);
}

TEST(Csv, GeCurve) {
    ta::AttackResult r;
    r.ge_curve = {40, 7, 1};
    r.correct_rank = 1;
    const auto dir = scratch_dir("ge");
    emit_ge_curve_csv(r, dir / "ge.csv");
    EXPECT_EQ(slurp(dir / "ge.csv"), "n_traces_used,rank\n1,40\n2,7\n3,1\n");
    fs::remove_all(dir);
}

TEST(Csv, GraphicMarginalsAndDoe) {
    std::ostringstream g;
    write_graphic_csv(g, poi::SelectionGraphic{{0.5, 2.0}});
    EXPECT_EQ(g.str(), "sample_index,value\n0,5.000000000E-01\n1,2.000000000E+00\n");

    std::ostringstream m;
    write_marginals_csv(m, eda::MarginalModel{{0.25, 0.998}});
    EXPECT_EQ(m.str(), "sample_index,probability\n0,0.250000\n1,0.998000\n");

    doe::DoeResult r;
    r.runs.push_back({doe::RunPoint{{1, 5, 10}, {-1, -1, -1}},
                      scored({1, 2, 3}, -4.84e-5, {1}), -4.84e-5});
    std::array<double, 8> resp{};
    resp[0] = -4.84e-5;
    r.effects = doe::compute_effects(resp);
    std::ostringstream runs, effects;
    write_doe_runs_csv(runs, r);
    write_doe_effects_csv(effects, r.effects);
    EXPECT_EQ(runs.str(), "Exp,A,B,C,n_POI,ge,Eval\n1,1,5,10,3,1,-4.84000E-05\n");
    const auto rows = lines(effects.str());
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(rows[0], "effect,value");
    // Only the all-low run is non-zero: A's effect is 0 - (-4.84E-05) / 4.
    EXPECT_EQ(rows[1], "A,1.21000E-05");
    EXPECT_EQ(rows[7].substr(0, 4), "ABC,");
}

TEST(Digest, KnownSha256) {
    const auto dir = scratch_dir("sha");
    {
        std::ofstream(dir / "abc") << "abc";
        std::ofstream(dir / "empty");
    }
    EXPECT_EQ(file_sha256(dir / "abc"),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(file_sha256(dir / "empty"),
              "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_THROW(file_sha256(dir / "missing"), Error);
    fs::remove_all(dir);
}

TEST(Manifest, JsonRoundTrip) {
    RunManifest m;
    m.tool_version = "1.0.0";
    m.subcommand = "eda";
    m.config.set("eda.seed", "7");
    m.config.set("data.profile", "p.sctf");
    m.seeds = {{"eda.seed", 7}, {"eval.seed", 18446744073709551615ull}};
    m.input_digests = {{"data.profile", "abc123"}};
    m.started = "2026-01-01T00:00:00Z";
    m.finished = "2026-01-01T00:00:05Z";
    m.conventions = {{"rank_base", "1"}, {"ge_aggregation", "product"}};
    const auto back = RunManifest::from_json(m.to_json());
    EXPECT_EQ(back.tool_version, m.tool_version);
    EXPECT_EQ(back.subcommand, m.subcommand);
    EXPECT_EQ(back.config.entries(), m.config.entries());
    EXPECT_EQ(back.seeds, m.seeds);
    EXPECT_EQ(back.input_digests, m.input_digests);
    EXPECT_EQ(back.started, m.started);
    EXPECT_EQ(back.finished, m.finished);
    EXPECT_EQ(back.conventions, m.conventions);
    EXPECT_EQ(back.to_json(), m.to_json());
    EXPECT_THROW(RunManifest::from_json("{\"config\": {}}"), ConfigError);
    EXPECT_THROW(RunManifest::from_json("not json"), ConfigError);
}

TEST(Timestamp, IsoUtc) {
    const auto ts = utc_timestamp();
    ASSERT_EQ(ts.size(), 20u);
    EXPECT_EQ(ts[4], '-');
    EXPECT_EQ(ts[10], 'T');
    EXPECT_EQ(ts.back(), 'Z');
}
