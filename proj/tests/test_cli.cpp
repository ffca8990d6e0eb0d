#include "msvr/csv.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int status;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(MSVR_CLI_PATH) + " " + args + " 2>&1";
    Run r{-1, {}};
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) {
        return r;
    }
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), p) != nullptr) {
        r.out += buf.data();
    }
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

const char* kShort =
    "sim.duration_s = 0.3\n"
    "analysis.start_cycle = 5\n"
    "analysis.cycles = 10\n"
    "events[0].kind = sag\n"
    "events[0].start_s = 0.1\n";

}  // namespace

TEST(Cli, LevelsTableOne) {
    const auto r = cli("levels -p 3 --vdc 2");
    ASSERT_EQ(r.status, 0) << r.out;
    const char* rows[] = {"000", "001", "010", "011", "100", "101", "110", "111"};
    const char* volts[] = {"-7", "-5", "-3", "-1", "1", "3", "5", "7"};
    for (int k = 0; k < 8; ++k) {
        const auto pos = r.out.find(rows[k]);
        ASSERT_NE(pos, std::string::npos) << rows[k];
        const auto eol = r.out.find('\n', pos);
        EXPECT_NE(r.out.substr(pos, eol - pos).find(volts[k]), std::string::npos) << rows[k];
    }
}

TEST(Cli, LevelsRowCounts) {
    for (int p : {1, 2}) {
        const auto r = cli("levels -p " + std::to_string(p) + " --vdc 2");
        ASSERT_EQ(r.status, 0);
        EXPECT_EQ(static_cast<int>(std::count(r.out.begin(), r.out.end(), '\n')), 1 + (1 << p));
    }
    EXPECT_EQ(cli("levels -p 0").status, 2);
}

TEST(Cli, SimulateWritesCsvAndSummary) {
    const auto cfg = write_temp("msvr_cli_short.cfg", kShort);
    const auto out = (std::filesystem::temp_directory_path() / "msvr_cli_short.csv").string();
    const auto r = cli("simulate --config " + cfg + " --out " + out);
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_NE(r.out.find("load THD"), std::string::npos);
    EXPECT_NE(r.out.find("recovery"), std::string::npos);
    const auto t = msvr::read_csv(out);
    EXPECT_EQ(t.rows(), 3001U);
    EXPECT_EQ(t.headers.front(), "t_s");

    const auto thd = cli("thd " + out + " v_load_a_V --start-cycle 5 --cycles 10 --config " + cfg);
    EXPECT_EQ(thd.status, 0) << thd.out;
    EXPECT_NE(thd.out.find("THD"), std::string::npos);
}

TEST(Cli, SimulateIsByteDeterministic) {
    const auto cfg = write_temp("msvr_cli_det.cfg", kShort);
    const auto a = (std::filesystem::temp_directory_path() / "msvr_det_a.csv").string();
    const auto b = (std::filesystem::temp_directory_path() / "msvr_det_b.csv").string();
    ASSERT_EQ(cli("--quiet simulate --config " + cfg + " --out " + a).status, 0);
    ASSERT_EQ(cli("simulate --quiet --config " + cfg + " --out " + b).status, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, SignalSelection) {
    const auto cfg = write_temp("msvr_cli_sel.cfg", std::string(kShort) + "sim.signals = v_load_a,p\nsim.csv_stride = 100\n");
    const auto out = (std::filesystem::temp_directory_path() / "msvr_cli_sel.csv").string();
    ASSERT_EQ(cli("simulate --quiet --config " + cfg + " --out " + out).status, 0);
    const auto t = msvr::read_csv(out);
    EXPECT_EQ(t.headers, (std::vector<std::string>{"t_s", "v_load_a_V", "p_W"}));
    EXPECT_EQ(t.rows(), 301U);
}

TEST(Cli, ExitCodes) {
    const auto bad = write_temp("msvr_cli_bad.cfg", "converter.stages = 0\n");
    const auto r = cli("simulate --config " + bad);
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.out.find("converter.stages"), std::string::npos);
    EXPECT_EQ(cli("simulate --config /nonexistent.cfg").status, 2);
    EXPECT_EQ(cli("bogus").status, 2);
    EXPECT_EQ(cli("thd /nonexistent.csv v_load_a_V").status, 3);

    const auto csv = write_temp("msvr_cli_tiny.csv", "t_s,x_V\n0,1\n0.0001,2\n0.0002,3\n");
    EXPECT_EQ(cli("thd " + csv + " x_V").status, 4);
    const auto range = write_temp("msvr_cli_range.cfg", "sim.duration_s = 0.3\nanalysis.start_cycle = 5\n"
                                                        "analysis.cycles = 10\ncontrol.reference_rms_volt = 30000\n");
    EXPECT_EQ(cli("simulate --config " + range).status, 2);
}

TEST(Cli, CompareStages) {
    const auto cfg = write_temp("msvr_cli_cmp.cfg",
                                "sim.duration_s = 0.3\nanalysis.start_cycle = 5\nanalysis.cycles = 10\n"
                                "control.reference = load_warmup\nconverter.v_dc_volt = 3000\n");
    const auto r = cli("compare-stages --sweep --config " + cfg);
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_NE(r.out.find("p=1"), std::string::npos);
    EXPECT_NE(r.out.find("p=2"), std::string::npos);
    EXPECT_NE(r.out.find("p=3"), std::string::npos);
    EXPECT_NE(r.out.find("ratio"), std::string::npos);
}

TEST(Cli, ShippedScenariosParse) {
    for (const auto& e : std::filesystem::directory_iterator(MSVR_SCENARIO_DIR)) {
        const auto r = cli("levels --config " + e.path().string());
        EXPECT_EQ(r.status, 0) << e.path() << r.out;
    }
}
