// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qtraj/cli.hpp"

namespace qtraj {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string env_value(const char *name) {
    const char *v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

struct Exec {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Workspace : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("qtraj_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Exec run(const std::string &args) {
        std::string bin = env_value("QTRAJ_BIN");
        if (bin.empty()) {
            ADD_FAILURE() << "QTRAJ_BIN is not set";
            return {};
        }
        fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
        std::string cmd = "'" + bin + "' " + args + " > '" + o.string() + "' 2> '" + e.string() + "'";
        int status = std::system(cmd.c_str());
        Exec r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(o);
        r.err = slurp(e);
        fs::remove(o);
        fs::remove(e);
        return r;
    }

    fs::path write_config(const json &j, const std::string &name = "config.json") {
        fs::path p = dir_ / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    std::vector<std::string> files() const {
        std::vector<std::string> out;
        for (const auto &entry : fs::directory_iterator(dir_)) out.push_back(entry.path().filename().string());
        std::sort(out.begin(), out.end());
        return out;
    }

    fs::path dir_;
};

json small_config() {
    return json::parse(R"({
      "system": {"dim": 2, "initial_state": "g", "coupling": "sigma_minus", "gamma": 1.0, "hamiltonian": "sigma_x"},
      "scheme": {"type": "vacuum_photocount"},
      "run": {"dt": 0.001, "steps": 200, "trajectories": 5, "seed": 3, "record_every": 20},
      "observables": [{"name": "sigma_z", "matrix": "sigma_z"}],
      "outputs": {"csv": "out.csv", "json": "out.json", "svg": "out.svg", "master_equation": true}
    })");
}

std::vector<std::string> lines(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(-1.0), "-1");
    for (double x : {1.0 / 3.0, M_PI, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Csv, HeaderIsExact) {
    EXPECT_EQ(CsvWriter::header({"sigma_z", "sigma_y"}),
              "traj,step,t,outcome,innovation,innovation2,sigma_z,sigma_y,loglik\n");
}

TEST(ParseMatrix, NamedRowsAndScaled) {
    EXPECT_TRUE(parse_matrix(json("sigma_minus"), "m", 2).isApprox(sigma_minus()));
    Matrix m = parse_matrix(json::parse(R"([[[1,0],[0,2]],[[0,-2],[3,0]]])"), "m", 2);
    EXPECT_EQ(m(0, 1), Complex(0, 2));
    EXPECT_EQ(m(1, 0), Complex(0, -2));
    Matrix s = parse_matrix(json::parse(R"({"op": "sigma_x", "scale": 0.5})"), "m", 2);
    EXPECT_TRUE(s.isApprox(0.5 * sigma_x()));
    try {
        parse_matrix(json("sigma_q"), "system.coupling", 2);
        FAIL();
    } catch (const ConfigError &e) {
        EXPECT_EQ(e.field(), "system.coupling");
    }
    EXPECT_THROW(parse_matrix(json::parse("[[[1,0]]]"), "m", 2), ConfigError);
}

TEST(ParseConfig, ReadsEveryBlock) {
    auto cfg = parse_run_config(small_config());
    EXPECT_EQ(cfg.ensemble.n_traj, 5u);
    EXPECT_EQ(cfg.ensemble.steps, 200u);
    EXPECT_EQ(cfg.ensemble.record_every, 20u);
    EXPECT_EQ(cfg.ensemble.master_seed, 3u);
    EXPECT_EQ(cfg.ensemble.scheme.kind, SchemeKind::VacuumPhotocount);
    ASSERT_TRUE(cfg.ensemble.sys.h_ext.has_value());
    EXPECT_TRUE(cfg.ensemble.sys.h_ext->isApprox(sigma_x()));
    EXPECT_TRUE(cfg.outputs.master_equation);
    EXPECT_EQ(*cfg.outputs.csv, "out.csv");
}

TEST(ParseConfig, ErrorsNameTheField) {
    auto field_of = [](json j) -> std::string {
        try {
            parse_run_config(j);
        } catch (const ConfigError &e) {
            return e.field();
        }
        return "";
    };
    json j = small_config();
    j["system"]["initial_state"] = json::parse("[[[0.9,0],[0,0]],[[0,0],[0,0]]]");
    EXPECT_EQ(field_of(j), "system.initial_state");
    j = small_config();
    j["scheme"]["type"] = "bogus";
    EXPECT_EQ(field_of(j), "scheme.type");
    j = small_config();
    j["run"]["dt"] = -1;
    EXPECT_EQ(field_of(j), "run.dt");
    j = small_config();
    j["scheme"] = json{{"type", "inefficient_homodyne"}, {"eta", 1.5}};
    EXPECT_EQ(field_of(j).rfind("scheme", 0), 0u);
}

TEST(Svg, DeterministicAndSelfContained) {
    PlotData d;
    d.times = {0, 1, 2};
    d.names = {"sigma_z"};
    d.trajectories = {{{-1, 0, 1}}, {{-1, -0.5, 0}}};
    d.jump_times = {1.5};
    d.mean = {{-1, -0.25, 0.5}};
    d.reference = std::vector<std::vector<double>>{{-1, -0.2, 0.4}};
    std::string a = render_svg(d), b = render_svg(d);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("</svg>"), std::string::npos);
    EXPECT_NE(a.find("sigma_z"), std::string::npos);
    EXPECT_EQ(a.find("http://"), a.find("http://www.w3.org"));
}

TEST_F(Workspace, RunWritesDeclaredOutputs) {
    auto cfg = write_config(small_config());
    auto r = run("run '" + cfg.string() + "' --out-dir '" + dir_.string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    auto names = files();
    EXPECT_EQ(names, (std::vector<std::string>{"config.json", "out.csv", "out.json", "out.svg"}));

    auto rows = lines(slurp(dir_ / "out.csv"));
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows[0], "traj,step,t,outcome,innovation,innovation2,sigma_z,loglik");
    std::size_t samples = 200 / 20 + 1;
    EXPECT_EQ(rows.size(), 1 + 5 * samples + samples);
    EXPECT_EQ(rows[1].rfind("0,0,0,,,,-1,", 0), 0u);
    EXPECT_EQ(rows.back().rfind("-1,200,", 0), 0u);

    auto summary = json::parse(slurp(dir_ / "out.json"));
    EXPECT_EQ(summary["n_traj"], 5);
    EXPECT_EQ(summary["times"].size(), samples);
    EXPECT_EQ(summary["observables"]["sigma_z"]["mean"].size(), samples);
    EXPECT_TRUE(summary["observables"]["sigma_z"].contains("master_equation"));
    EXPECT_TRUE(summary["metadata"].contains("version"));
}

TEST_F(Workspace, CsvIsBitStable) {
    auto cfg = small_config();
    cfg["outputs"] = json{{"csv", "a.csv"}};
    auto p1 = write_config(cfg, "a.json");
    cfg["outputs"] = json{{"csv", "b.csv"}};
    auto p2 = write_config(cfg, "b.json");
    ASSERT_EQ(run("run '" + p1.string() + "' --out-dir '" + dir_.string() + "'").code, 0);
    ASSERT_EQ(run("run '" + p2.string() + "' --out-dir '" + dir_.string() + "'").code, 0);
    EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
}

TEST_F(Workspace, HeterodyneFillsSecondInnovation) {
    auto cfg = small_config();
    cfg["scheme"]["type"] = "vacuum_heterodyne";
    cfg["outputs"] = json{{"csv", "het.csv"}};
    auto p = write_config(cfg);
    ASSERT_EQ(run("run '" + p.string() + "' --out-dir '" + dir_.string() + "'").code, 0);
    auto rows = lines(slurp(dir_ / "het.csv"));
    ASSERT_GT(rows.size(), 2u);
    // traj,step,t,outcome,innovation,innovation2,...
    std::stringstream ss(rows[2]);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_GE(cells.size(), 6u);
    EXPECT_FALSE(cells[5].empty());
}

TEST_F(Workspace, JsonOnlyProducesSingleFile) {
    auto cfg = small_config();
    cfg["outputs"] = json{{"json", "only.json"}};
    auto p = write_config(cfg);
    auto r = run("run '" + p.string() + "' --out-dir '" + dir_.string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(files(), (std::vector<std::string>{"config.json", "only.json"}));
}

TEST_F(Workspace, BadInitialStateExitsTwo) {
    auto cfg = small_config();
    cfg["system"]["initial_state"] = json::parse("[[[0.9,0],[0,0]],[[0,0],[0,0]]]");
    auto p = write_config(cfg);
    auto r = run("run '" + p.string() + "' --out-dir '" + dir_.string() + "'");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("system.initial_state"), std::string::npos) << r.err;
    EXPECT_EQ(files(), (std::vector<std::string>{"config.json"}));
}

TEST_F(Workspace, MissingConfigExitsTwo) {
    auto r = run("run '" + (dir_ / "absent.json").string() + "'");
    EXPECT_EQ(r.code, 2);
}

TEST_F(Workspace, BundledRabiConfig) {
    std::string src = env_value("QTRAJ_SOURCE_DIR");
    ASSERT_FALSE(src.empty());
    auto r = run("run '" + src + "/configs/rabi_photocount.json' --out-dir '" + dir_.string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = lines(slurp(dir_ / "rabi_photocount.csv"));
    std::size_t samples = 10000 / 10 + 1;
    EXPECT_EQ(rows.size(), 1 + 64 * samples + samples);
    auto svg = slurp(dir_ / "rabi_photocount.svg");
    EXPECT_NE(svg.find("sigma_z"), std::string::npos);
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
    auto summary = json::parse(slurp(dir_ / "rabi_photocount_summary.json"));
    EXPECT_EQ(summary["n_traj"], 64);
    std::size_t jumps = 0;
    for (const auto &t : summary["trajectories"]) jumps += t["jumps"].get<std::size_t>();
    EXPECT_GT(jumps, 64u);
}

TEST_F(Workspace, VerifyAppendixBFailsForMixedArakiWoods) {
    auto r = run("verify appendix-b --model araki-woods --n 1 --m-re 1 --m-im 0");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("verdict: FAIL"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("beta0_projection"), std::string::npos);
}

TEST_F(Workspace, VerifyAppendixBPassesForPureArakiWoods) {
    auto r = run("verify appendix-b --model araki-woods --n 1 --m-re 1.4142135623730951 --m-im 0");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("verdict: PASS"), std::string::npos);
}

TEST_F(Workspace, VerifySuitesPass) {
    for (const char *suite : {"appendix-a", "povm", "unconditional", "heterodyne-circuit", "bath-stats"}) {
        auto r = run(std::string("verify ") + suite);
        EXPECT_EQ(r.code, 0) << suite << "\n" << r.out << r.err;
    }
}

TEST_F(Workspace, VerifyPovmCoversEveryConstructor) {
    auto r = run("verify povm");
    for (const char *name : {"vacuum_photocount", "vacuum_homodyne", "vacuum_heterodyne", "coherent_photocount",
                             "thermal_homodyne", "squeezed_thermal_homodyne", "poisson_strong", "inefficient_homodyne"})
        EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST_F(Workspace, UnknownSuiteIsRejected) {
    auto r = run("verify nonsense");
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.code, 1);
}

TEST_F(Workspace, SchemesAndVersion) {
    auto r = run("schemes");
    EXPECT_EQ(r.code, 0);
    for (const auto kind : all_scheme_kinds()) EXPECT_NE(r.out.find(scheme_name(kind)), std::string::npos);
    r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find(package_version()), std::string::npos);
}

}  // namespace
}  // namespace qtraj
