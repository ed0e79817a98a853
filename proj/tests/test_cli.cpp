// Copyright 2026 The pdistill Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "commands.hpp"

namespace pdistill::cli {
namespace {

std::vector<std::vector<double>> parse_csv(const std::string &text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    return rows;
}

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

template <class Fn>
Run run(Fn &&fn) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_guarded([&] { fn(out); }, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

TEST(InputSpec, Parse) {
    const auto a = parse_input_spec("ideal:3 error:2@1");
    EXPECT_EQ(*a.photons, 3U);
    EXPECT_EQ(a.overrides.at(1), 2U);
    const auto b = parse_input_spec("model:explicit=0.01,0.02");
    EXPECT_NEAR(b.source_model().epsilon(), 0.03, 1e-15);
    const auto c = parse_input_spec("model:alldistinct;eps=0.2");
    EXPECT_EQ(c.source_model().describe(), "alldistinct");
    EXPECT_THROW(parse_input_spec("ideal:x"), UsageError);
    EXPECT_THROW(parse_input_spec("error:0@1"), UsageError);
    EXPECT_THROW(parse_input_spec("error:1"), UsageError);
    EXPECT_THROW(parse_input_spec("model:foo"), UsageError);
    EXPECT_THROW(parse_input_spec("bogus"), UsageError);
    EXPECT_THROW(parse_input_spec("eps=0.1"), UsageError);
    EXPECT_THROW(parse_input_spec("model:allsame;eps=0.1;error:1@0"), UsageError);
    EXPECT_THROW(parse_input_spec("ideal:2 error:1@5").ensemble(2), UsageError);
}

TEST(Simulate, Distill3Ideal) {
    SimulateOptions o;
    o.circuit.builtin = "distill3";
    o.input = "ideal:3";
    o.pattern = "1:1,2:1";
    const auto r = run([&](std::ostream &out) { cmd_simulate(o, GlobalOptions{}, out); });
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("|1,1,1>"), std::string::npos);
    EXPECT_NE(r.out.find("|3,0,0>"), std::string::npos);
    EXPECT_EQ(r.out.find("|2,"), std::string::npos);
    EXPECT_NE(r.out.find("probability 0.333333333333"), std::string::npos);
    EXPECT_NE(r.out.find("output fidelity 1"), std::string::npos);
}

TEST(Simulate, HomBunching) {
    SimulateOptions o;
    o.circuit.builtin = "hom2";
    o.input = "ideal:2";
    const auto r = run([&](std::ostream &out) { cmd_simulate(o, GlobalOptions{}, out); });
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("|2,0>"), std::string::npos);
    EXPECT_NE(r.out.find("|0,2>"), std::string::npos);
    EXPECT_EQ(r.out.find("|1,1>"), std::string::npos);
}

TEST(Simulate, ErrorsAndMismatches) {
    SimulateOptions o;
    o.circuit.builtin = "distill3";
    o.input = "ideal:2";
    EXPECT_EQ(run([&](std::ostream &out) { cmd_simulate(o, GlobalOptions{}, out); }).code, kUsage);
    o.input = "ideal:3;error:1@0";
    o.pattern = "1:1,2:1";
    const auto r = run([&](std::ostream &out) { cmd_simulate(o, GlobalOptions{}, out); });
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("probability 0.111111111111"), std::string::npos);
    o.circuit.builtin = "nope";
    EXPECT_EQ(run([&](std::ostream &out) { cmd_simulate(o, GlobalOptions{}, out); }).code, kUsage);
}

TEST(Simulate, BadCircuitFileReportsLine) {
    const auto path = std::filesystem::temp_directory_path() / "pdistill_bad.circ";
    std::ofstream(path) << "rails 3\nbs 0 1 0.5\nbs 0 7 0.5\n";
    SimulateOptions o;
    o.circuit.file = path.string();
    const auto r = run([&](std::ostream &out) { cmd_simulate(o, GlobalOptions{}, out); });
    EXPECT_EQ(r.code, kUsage);
    EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
    std::filesystem::remove(path);
}

TEST(Analyze, ReportsBoundsAndMonteCarlo) {
    AnalyzeOptions o;
    o.input = "model:allsame;eps=0.1";
    o.shots = 2000;
    const auto a = run([&](std::ostream &out) { cmd_analyze(o, GlobalOptions{}, out); });
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("epsilon_out_bounds"), std::string::npos);
    EXPECT_NE(a.out.find("mc_p_success"), std::string::npos);
    const auto b = run([&](std::ostream &out) { cmd_analyze(o, GlobalOptions{}, out); });
    EXPECT_EQ(a.out, b.out);
    o.input = "ideal:3";
    EXPECT_EQ(run([&](std::ostream &out) { cmd_analyze(o, GlobalOptions{}, out); }).code, kUsage);
}

TEST(Sweep, ColumnsAndRows) {
    SweepOptions o;
    o.start = 0.0;
    o.stop = 0.4;
    o.count = 41;
    const auto r = run([&](std::ostream &out) { cmd_sweep(o, GlobalOptions{}, out); });
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
              "epsilon,present3_lower,present3_upper,present3_exact_allsame,"
              "present3_exact_alldistinct,sb2,sb3,psuccess_exact,psuccess_bound");
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 41U);
    EXPECT_NEAR(rows[0][7], 1.0 / 3, 1e-11);
    EXPECT_NEAR(rows[0][8], 1.0 / 3, 1e-11);
    const double cross = crossover_sb(SbVariant::n2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto &row = rows[i];
        for (int c : {3, 4}) {
            EXPECT_GE(row[c], row[1] - 1e-10);
            EXPECT_LE(row[c], row[2] + 1e-10);
        }
        EXPECT_GE(row[7], row[8] - 1e-10);
        if (row[0] > 0.0 && row[0] < cross) {
            EXPECT_LT(row[2], row[5]);
        }
        if (i > 0) {
            for (int c = 1; c <= 6; ++c) {
                EXPECT_GT(row[c], rows[i - 1][c]);
            }
            for (int c = 7; c <= 8; ++c) {
                EXPECT_LT(row[c], rows[i - 1][c]);
            }
        }
    }
}

TEST(Sweep, DeterministicFileOutput) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto read = [](const std::filesystem::path &p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    SweepOptions o;
    o.start = 1e-3;
    o.stop = 0.4;
    o.count = 9;
    o.scale = "log";
    GlobalOptions g;
    std::string contents[2];
    for (int i = 0; i < 2; ++i) {
        g.output = (dir / ("pdistill_sweep_" + std::to_string(i) + ".csv")).string();
        ASSERT_EQ(run([&](std::ostream &out) { cmd_sweep(o, g, out); }).code, 0);
        contents[i] = read(g.output);
        std::filesystem::remove(g.output);
    }
    EXPECT_FALSE(contents[0].empty());
    EXPECT_EQ(contents[0], contents[1]);
}

TEST(Sweep, Validation) {
    SweepOptions o;
    o.count = 1;
    EXPECT_EQ(run([&](std::ostream &out) { cmd_sweep(o, GlobalOptions{}, out); }).code, kUsage);
    o = SweepOptions{};
    o.stop = 0.6;
    EXPECT_EQ(run([&](std::ostream &out) { cmd_sweep(o, GlobalOptions{}, out); }).code, kUsage);
    o = SweepOptions{};
    o.scale = "log";
    EXPECT_EQ(run([&](std::ostream &out) { cmd_sweep(o, GlobalOptions{}, out); }).code, kUsage);
    o = SweepOptions{};
    GlobalOptions g;
    g.output = "/nonexistent-dir/x.csv";
    EXPECT_EQ(run([&](std::ostream &out) { cmd_sweep(o, g, out); }).code, kFailure);
}

TEST(SbTable, Values) {
    const auto r = run([&](std::ostream &out) { cmd_sb(12, GlobalOptions{}, out); });
    ASSERT_EQ(r.code, 0);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 11U);
    const double photons[] = {8, 42.67, 341.33, 4369.07, 93206};
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(rows[i][2] / photons[i], 1.0, 5e-3);
    }
    EXPECT_NE(r.out.find("e-18"), std::string::npos);
    EXPECT_EQ(run([&](std::ostream &out) { cmd_sb(1, GlobalOptions{}, out); }).code, kUsage);
    EXPECT_EQ(run([&](std::ostream &out) { cmd_sb(13, GlobalOptions{}, out); }).code, kUsage);
}

TEST(PlanCommand, Examples) {
    PlanOptions o;
    o.eps0 = 1e-3;
    o.target = 1.5e-4;
    const auto a = run([&](std::ostream &out) { cmd_plan(o, GlobalOptions{}, out); });
    ASSERT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("rounds 2"), std::string::npos);
    EXPECT_NE(a.out.find("total_expected_photons 81."), std::string::npos) << a.out;
    o.eps0 = 0.5;
    const auto b = run([&](std::ostream &out) { cmd_plan(o, GlobalOptions{}, out); });
    EXPECT_EQ(b.code, kFailure);
    EXPECT_NE(b.err.find("break-even error 0.42"), std::string::npos) << b.err;
    o.eps0 = 0.01;
    o.target = 0.01;
    EXPECT_NE(run([&](std::ostream &out) { cmd_plan(o, GlobalOptions{}, out); }).out.find("rounds 0"),
              std::string::npos);
    o.scheme = "present5";
    EXPECT_EQ(run([&](std::ostream &out) { cmd_plan(o, GlobalOptions{}, out); }).code, kUsage);
}

TEST(NoiseScan, Slopes) {
    NoiseScanOptions o;
    const auto r = run([&](std::ostream &out) { cmd_noise_scan(o, GlobalOptions{}, out); });
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "parameter,values,slope,r2");
    std::map<std::string, double> slope;
    while (std::getline(in, line)) {
        const auto name = line.substr(0, line.find(','));
        const auto tail = line.substr(line.rfind('"') + 2);
        slope[name] = std::stod(tail.substr(0, tail.find(',')));
    }
    EXPECT_NEAR(slope["dark"], 2.0, 0.1);
    EXPECT_NEAR(slope["miscount"], 2.0, 0.1);
    EXPECT_NEAR(slope["loss"], 1.0, 0.05);
    o.values.clear();
    EXPECT_EQ(run([&](std::ostream &out) { cmd_noise_scan(o, GlobalOptions{}, out); }).code, kUsage);
    o.values = {1e-3, 2e-3};
    o.parameters = {"heat"};
    EXPECT_EQ(run([&](std::ostream &out) { cmd_noise_scan(o, GlobalOptions{}, out); }).code, kUsage);
}

#ifdef PDISTILL_CLI_PATH
int shell(const std::string &cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Executable, ExitCodes) {
    const std::string exe = PDISTILL_CLI_PATH;
    const auto dir = std::filesystem::temp_directory_path();
    const auto bad = dir / "pdistill_exe_bad.circ";
    const auto err = dir / "pdistill_exe_err.txt";
    std::ofstream(bad) << "rails 2\n# fine\nbs 0 1 nan-ish\n";
    EXPECT_EQ(shell(exe + " simulate --circuit " + bad.string() + " 2> " + err.string()), kUsage);
    std::ifstream in(err);
    const std::string msg(std::istreambuf_iterator<char>(in), {});
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_EQ(shell(exe + " sb --n-max 1 2> /dev/null"), kUsage);
    EXPECT_EQ(shell(exe + " sb --n-max 6 > /dev/null"), kOk);
    EXPECT_EQ(shell(exe + " frobnicate 2> /dev/null"), kUsage);
    EXPECT_EQ(shell(exe + " plan --eps0 0.5 --target 0.01 2> /dev/null"), kFailure);
    std::filesystem::remove(bad);
    std::filesystem::remove(err);
}
#endif

} // namespace
} // namespace pdistill::cli
