#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>

#include <sys/wait.h>

#include "sbmoo/sbmoo.hpp"

namespace fs = std::filesystem;
using namespace sbmoo;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

Result cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + SBMOO_CLI + std::string(" ") + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("sbmoo_cli_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const { return (sub.empty() ? path : path / sub).string(); }
};

std::string value_of(const std::string& text, const std::string& key) {
    const auto pos = text.find("\n" + key + ",");
    if (pos == std::string::npos) return {};
    const auto start = pos + key.size() + 2;
    return text.substr(start, text.find('\n', start) - start);
}

}  // namespace

class CliHelp : public ::testing::TestWithParam<const char*> {};

TEST_P(CliHelp, HelpExitsZero) {
    const auto r = cli(std::string(GetParam()) + " --help");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << r.out;
}

TEST_P(CliHelp, UnknownFlagFailsWithUsage) {
    const std::string cmd = std::string(SBMOO_CLI) + " " + GetParam() + " --no-such-flag 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    ASSERT_NE(p, nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int st = pclose(p);
    ASSERT_TRUE(WIFEXITED(st));
    EXPECT_NE(WEXITSTATUS(st), 0);
    EXPECT_NE(out.find("Usage"), std::string::npos) << out;
}

INSTANTIATE_TEST_SUITE_P(Subcommands, CliHelp, ::testing::Values("", "problems", "run", "detect", "report", "audit"));

TEST(Cli, NoSubcommandFails) { EXPECT_NE(cli("").status, 0); }

TEST(CliProblems, PrintsSamples) {
    const auto r = cli("problems f2a -n 5 --seed 3");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.out.rfind("g1,g2\n", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
    EXPECT_EQ(r.out, cli("problems f2a -n 5 --seed 3").out);
    EXPECT_NE(r.out, cli("problems f2a -n 5 --seed 4").out);
}

TEST(CliProblems, UnknownProblemIsUsageError) {
    const auto r = cli("problems f9");
    EXPECT_NE(r.status, 0);
}

TEST(CliProblems, F5Characterisation) {
    const auto r = cli("problems f5 --characterise --reps 5 --sizes 100,1000");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(value_of(r.out, "rho_mean"), "-1");
    EXPECT_NE(r.out.find("\n100,100,0,1\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\n1000,1000,0,1\n"), std::string::npos) << r.out;
}

TEST(CliProblems, F1CountNearTen) {
    const auto r = cli("problems f1 --characterise -n 10000 --reps 20 --sizes 1000,10000");
    ASSERT_EQ(r.status, 0);
    const double c = std::stod(value_of(r.out, "pf_count_mean"));
    EXPECT_GT(c, 7.0);
    EXPECT_LT(c, 13.0);
}

TEST(CliProblems, PlotWritesSvg) {
    TempDir tmp;
    ASSERT_EQ(cli("problems f3b -n 300 --plot --out " + tmp.str()).status, 0);
    const auto svg = read_file(tmp.path / "front_f3b.svg");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(CliRun, SmallSuiteWritesTraces) {
    TempDir tmp;
    ASSERT_EQ(cli("run random -p f1 -d 2 --runs 2 --pop 10 --iters 3 --out " + tmp.str()).status, 0);
    const auto loaded = load_traces(tmp.path);
    ASSERT_TRUE(loaded.failures.empty());
    ASSERT_EQ(loaded.traces.size(), 2u);
    for (const auto& t : loaded.traces) {
        EXPECT_EQ(t.archive.size(), 30u);
        EXPECT_EQ(t.algorithm_id, "random");
        EXPECT_TRUE(t.complete);
    }
    EXPECT_TRUE(fs::exists(tmp.path / "random" / "f1_d2_run1.jsonl"));
}

TEST(CliRun, UnknownAlgorithmFails) {
    TempDir tmp;
    EXPECT_NE(cli("run hillclimb -p f1 --runs 1 --out " + tmp.str()).status, 0);
}

TEST(CliRun, UnwritableOutputFails) {
    TempDir tmp;
    std::ofstream(tmp.path / "blocker") << "x";
    EXPECT_NE(cli("run random -p f1 -d 2 --runs 1 --pop 5 --iters 2 --out " + tmp.str("blocker")).status, 0);
}

TEST(CliRun, OutputDirFromEnvironment) {
    TempDir tmp;
    ASSERT_EQ(cli("run random -p f1 -d 2 --runs 1 --pop 5 --iters 2", "SBMOO_OUT_DIR=" + tmp.str("env")).status, 0);
    EXPECT_TRUE(fs::exists(tmp.path / "env" / "random" / "f1_d2_run0.jsonl"));
}

TEST(CliRun, ConfigFileWithFlagOverride) {
    TempDir tmp;
    std::ofstream(tmp.path / "cfg.toml") << "[run]\npop = 7\niters = 4\nruns = 3\nproblems = \"f5\"\ndims = 3\n";
    const auto cfg = tmp.str("cfg.toml");
    ASSERT_EQ(cli("--config " + cfg + " run random --runs 1 --out " + tmp.str("out")).status, 0);
    const auto loaded = load_traces(tmp.path / "out");
    ASSERT_TRUE(loaded.failures.empty());
    ASSERT_EQ(loaded.traces.size(), 1u);
    EXPECT_EQ(loaded.traces[0].problem_id, "f5");
    EXPECT_EQ(loaded.traces[0].d, 3u);
    EXPECT_EQ(loaded.traces[0].archive.size(), 28u);
}

TEST(CliDetect, WritesReportsAndPlots) {
    TempDir tmp;
    ASSERT_EQ(cli("run toy-centre -p f2a -d 2 --runs 50 --pop 20 --iters 10 --out " + tmp.str("traces")).status, 0);
    ASSERT_EQ(cli("detect " + tmp.str("traces") + " --cei analytic --out " + tmp.str("rep")).status, 0);
    for (const char* f : {"report.csv", "report.md", "report.html", "regions.svg", "toy-centre/hist_f2a_d2.svg"})
        EXPECT_TRUE(fs::exists(tmp.path / "rep" / f)) << f;
    std::ifstream in(tmp.path / "rep" / "report.csv");
    const auto rows = parse_report_csv(in);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].region, Region::A_Centre);
}

TEST(CliDetect, MissingRunsFail) {
    TempDir tmp;
    ASSERT_EQ(cli("run random -p f1 -d 2 --runs 3 --pop 10 --iters 3 --out " + tmp.str("t")).status, 0);
    fs::remove(tmp.path / "t" / "random" / "f1_d2_run1.jsonl");
    EXPECT_NE(cli("detect " + tmp.str("t") + " --out " + tmp.str("r")).status, 0);
}

TEST(CliDetect, CorruptTraceFails) {
    TempDir tmp;
    ASSERT_EQ(cli("run random -p f1 -d 2 --runs 1 --pop 10 --iters 3 --out " + tmp.str("t")).status, 0);
    std::ofstream(tmp.path / "t" / "random" / "f1_d2_run0.jsonl", std::ios::app) << "{broken\n";
    EXPECT_NE(cli("detect " + tmp.str("t") + " --out " + tmp.str("r")).status, 0);
}

TEST(CliReport, RendersCsvInEveryFormat) {
    TempDir tmp;
    ASSERT_EQ(cli("run random -p f1,f5 -d 2 --runs 50 --pop 10 --iters 5 --out " + tmp.str("t")).status, 0);
    ASSERT_EQ(cli("detect " + tmp.str("t") + " --cei analytic --out " + tmp.str("r")).status, 0);
    const auto csv = tmp.str("r/report.csv");
    const auto md = cli("report " + csv);
    ASSERT_EQ(md.status, 0);
    EXPECT_EQ(md.out, read_file(tmp.path / "r" / "report.md"));
    EXPECT_EQ(cli("report " + csv + " --format csv").out, read_file(csv));
    EXPECT_EQ(cli("report " + csv + " --format html").out, read_file(tmp.path / "r" / "report.html"));
    ASSERT_EQ(cli("report " + csv + " --regions " + tmp.str("again.svg")).status, 0);
    EXPECT_EQ(read_file(tmp.path / "again.svg"), read_file(tmp.path / "r" / "regions.svg"));
}

TEST(CliAudit, RandomChildProducesValidTrace) {
    TempDir tmp;
    const std::string child = std::string("'") + FAKE_OPTIMISER + " random 5'";
    ASSERT_EQ(cli("audit " + child + " -p f2b -d 3 --budget 200 --pop 10 --runs 2 --name fake --out " + tmp.str()).status, 0);
    const auto loaded = load_traces(tmp.path);
    ASSERT_TRUE(loaded.failures.empty());
    ASSERT_EQ(loaded.traces.size(), 2u);
    for (const auto& t : loaded.traces) {
        EXPECT_TRUE(t.complete);
        EXPECT_EQ(t.archive.size(), 200u);
        EXPECT_EQ(t.algorithm_id, "fake");
    }
}

TEST(CliAudit, ViolationExitsNonZero) {
    TempDir tmp;
    const std::string child = std::string("'") + FAKE_OPTIMISER + " oob 1'";
    EXPECT_NE(cli("audit " + child + " --budget 50 --pop 5 --out " + tmp.str()).status, 0);
}

TEST(CliAudit, CrashLeavesIncompleteTrace) {
    TempDir tmp;
    const std::string child = std::string("'") + FAKE_OPTIMISER + " crash 20'";
    EXPECT_NE(cli("audit " + child + " --budget 50 --pop 5 --out " + tmp.str()).status, 0);
    const auto t = read_trace(tmp.path / "external" / "f1_d2_run0.jsonl");
    EXPECT_FALSE(t.complete);
}

TEST(CliDeterminism, RunAndDetectAreByteStable) {
    TempDir a, b;
    for (auto* t : {&a, &b}) {
        ASSERT_EQ(cli("run nsga2 -p f1,f4g -d 2 --runs 50 --pop 10 --iters 4 --seed 11 --threads 2 --out " + t->str("t")).status, 0);
        ASSERT_EQ(cli("detect " + t->str("t") + " --seed 11 --cei-reps 50 --out " + t->str("r")).status, 0);
    }
    const auto sa = snapshot(a.path), sb = snapshot(b.path);
    EXPECT_GT(sa.size(), 100u);
    EXPECT_TRUE(sa == sb);
}
