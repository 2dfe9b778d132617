#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sbmoo/harness.hpp"

using namespace sbmoo;

namespace {

OptimiserConfig small(std::size_t pop = 10, std::size_t iters = 3) {
    OptimiserConfig cfg;
    cfg.population_size = pop;
    cfg.iterations = iters;
    return cfg;
}

// always picks index 0
struct FirstRng {
    double uniform() { return 0.0; }
    double normal() { return 0.0; }
    std::uint64_t below(std::uint64_t) { return 0; }
};

RunTrace trace_with_xp(std::size_t run, std::vector<std::vector<double>> xp) {
    RunTrace t;
    t.d = xp.front().size();
    t.run_index = run;
    t.xp = PointSet(t.d);
    for (const auto& x : xp) t.xp.push_back(x);
    t.xl = t.xp;
    return t;
}

}  // namespace

TEST(RunSingle, BookkeepingForTinyRandomRun) {
    const auto t = run_single("f1", "random", 2, 0, 0, small());
    EXPECT_EQ(t.archive.size(), 30u);
    EXPECT_EQ(t.xl.size(), 10u);
    EXPECT_EQ(t.budget, 30u);
    EXPECT_EQ(t.pop, 10u);
    EXPECT_TRUE(t.complete);
    EXPECT_FALSE(t.xp.empty());
    EXPECT_EQ(t.xp.size(), t.xp_indices.size());
    for (std::size_t k = 0; k < t.xp_indices.size(); ++k) {
        const auto a = t.archive.x(t.xp_indices[k]);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), t.xp[k].begin()));
    }
}

TEST(RunSingle, FinalPopulationComesFromArchive) {
    for (const char* algo : {"random", "nsga2", "moead", "toy-bound", "toy-centre"}) {
        const auto t = run_single("f3a", algo, 3, 1, 7, small(8, 5));
        std::set<std::vector<double>> archive;
        for (std::size_t i = 0; i < t.archive.size(); ++i) archive.insert({t.archive.x(i).begin(), t.archive.x(i).end()});
        for (std::size_t i = 0; i < t.xl.size(); ++i)
            EXPECT_TRUE(archive.count({t.xl[i].begin(), t.xl[i].end()})) << algo;
    }
}

TEST(RunSingle, DeterministicAndSeedSensitive) {
    EXPECT_EQ(run_single("f2b", "nsga2", 2, 3, 5, small(10, 6)), run_single("f2b", "nsga2", 2, 3, 5, small(10, 6)));
    EXPECT_FALSE(run_single("f2b", "nsga2", 2, 3, 5, small(10, 6)) == run_single("f2b", "nsga2", 2, 3, 6, small(10, 6)));
    EXPECT_FALSE(run_single("f2b", "nsga2", 2, 3, 5, small(10, 6)) == run_single("f2b", "nsga2", 2, 4, 5, small(10, 6)));
}

TEST(RunSingle, F5WholeArchiveNondominated) {
    const auto t = run_single("f5", "random", 2, 0, 0, small(20, 10));
    EXPECT_EQ(t.xp.size(), t.archive.size());
}

TEST(RunSingle, F1RandomSearchHarmonicCount) {
    // mean maxima count of 30,000 i.i.d. planar points ~ ln(30000) + 0.577 = 10.9
    double sum = 0;
    for (std::size_t r = 0; r < 100; ++r) sum += run_single("f1", "random", 2, r, 0, OptimiserConfig{}).xp.size();
    EXPECT_GE(sum / 100, 8.0);
    EXPECT_LE(sum / 100, 14.0);
}

TEST(BudgetedEvaluator, ThrowsPastBudget) {
    BudgetedEvaluator e(ProblemSpec::from_id("f1", 1), 2, RngStream(0, 0));
    const std::vector<double> x{0.5};
    e(x);
    e(x);
    EXPECT_EQ(e.remaining(), 0u);
    EXPECT_THROW(e(x), BudgetExhausted);
    EXPECT_EQ(e.archive().size(), 2u);
}

TEST(RunSuite, TaskOrderAndFailureRecording) {
    SuiteConfig cfg;
    cfg.problems = {"f1", "f5"};
    cfg.dims = {2, 3};
    cfg.n_r = 2;
    cfg.optimiser = small();
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> seen;
    const auto res = run_suite(cfg, "random", [&](RunTrace&& t) { seen.emplace_back(t.problem_id, t.d, t.run_index); });
    ASSERT_EQ(seen.size(), 8u);
    EXPECT_EQ(seen[0], std::make_tuple(std::string("f1"), std::size_t{2}, std::size_t{0}));
    EXPECT_EQ(seen[3], std::make_tuple(std::string("f1"), std::size_t{3}, std::size_t{1}));
    EXPECT_EQ(seen[7], std::make_tuple(std::string("f5"), std::size_t{3}, std::size_t{1}));
    EXPECT_TRUE(res.failures.empty());
    EXPECT_EQ(res.completed.size(), 8u);
}

TEST(RunSuite, ThreadedMatchesSerial) {
    SuiteConfig cfg;
    cfg.problems = {"f2a", "f4g"};
    cfg.dims = {2};
    cfg.n_r = 6;
    cfg.optimiser = small(10, 4);
    std::vector<RunTrace> serial, threaded;
    run_suite(cfg, "nsga2", [&](RunTrace&& t) { serial.push_back(std::move(t)); });
    cfg.threads = 3;
    run_suite(cfg, "nsga2", [&](RunTrace&& t) { threaded.push_back(std::move(t)); });
    EXPECT_EQ(serial, threaded);
}

TEST(RunSuite, ValidatesConfig) {
    SuiteConfig cfg;
    cfg.n_r = 0;
    EXPECT_THROW(run_suite(cfg, "random", [](RunTrace&&) {}), ConfigError);
    cfg.n_r = 1;
    cfg.problems = {"nope"};
    EXPECT_THROW(run_suite(cfg, "random", [](RunTrace&&) {}), InputError);
    cfg.problems = {"f1"};
    EXPECT_THROW(run_suite(cfg, "nope", [](RunTrace&&) {}), ConfigError);
}

TEST(SampleOnePerRun, SingletonsReturnedInRunOrder) {
    std::vector<RunTrace> traces{trace_with_xp(2, {{0.3, 0.3}}), trace_with_xp(0, {{0.1, 0.1}}),
                                 trace_with_xp(1, {{0.2, 0.2}})};
    RngStream rng(0, 0);
    const auto s = sample_one_per_run(traces, PointSource::XP, rng);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0][0], 0.1);
    EXPECT_EQ(s[1][0], 0.2);
    EXPECT_EQ(s[2][0], 0.3);
}

TEST(SampleOnePerRun, StubRngPicksFirstElement) {
    std::vector<RunTrace> traces{trace_with_xp(0, {{0.1}, {0.9}}), trace_with_xp(1, {{0.4}, {0.5}, {0.6}})};
    FirstRng rng;
    const auto s = sample_one_per_run(traces, PointSource::XL, rng);
    EXPECT_EQ(s[0][0], 0.1);
    EXPECT_EQ(s[1][0], 0.4);
}

TEST(SampleOnePerRun, RepetitionsDiffer) {
    std::vector<RunTrace> traces;
    for (std::size_t r = 0; r < 20; ++r) {
        std::vector<std::vector<double>> xp;
        for (int k = 0; k < 10; ++k) xp.push_back({k / 10.0});
        traces.push_back(trace_with_xp(r, xp));
    }
    std::set<std::vector<double>> samples;
    for (std::size_t rep = 0; rep < 10; ++rep) {
        auto rng = sampling_stream(0, "random", "f1", 1, rep);
        const auto s = sample_one_per_run(traces, PointSource::XP, rng);
        samples.insert({s.coordinates().begin(), s.coordinates().end()});
    }
    EXPECT_EQ(samples.size(), 10u);
}

TEST(SampleOnePerRun, EmptySetIsAnError) {
    RunTrace t;
    t.d = 2;
    t.xp = PointSet(2);
    std::vector<RunTrace> traces{t};
    RngStream rng(0, 0);
    EXPECT_THROW(sample_one_per_run(traces, PointSource::XP, rng), InputError);
}

TEST(PointSource, Parse) {
    EXPECT_EQ(parse_point_source("xp"), PointSource::XP);
    EXPECT_EQ(parse_point_source("X_L"), PointSource::XL);
    EXPECT_THROW(parse_point_source("both"), ConfigError);
}
