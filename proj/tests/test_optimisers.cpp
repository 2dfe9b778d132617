#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <vector>

#include "sbmoo/harness.hpp"
#include "sbmoo/optimisers.hpp"

using namespace sbmoo;

namespace {

// Replays a fixed list of uniforms; normals and integers derive from them.
struct ScriptedRng {
    std::deque<double> u;
    double uniform() {
        if (u.empty()) throw std::runtime_error("script exhausted");
        const double v = u.front();
        u.pop_front();
        return v;
    }
    double normal() { return uniform(); }
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * n); }
};
static_assert(RandomSource<ScriptedRng>);

struct CountingEval {
    ProblemSpec spec = ProblemSpec::from_id("f1", 2);
    RngStream rng{0, 0};
    std::size_t budget;
    std::size_t used = 0;
    ObjectivePair operator()(std::span<const double> x) {
        if (used >= budget) throw BudgetExhausted("over");
        ++used;
        for (double v : x) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
        return evaluate(spec, x, rng);
    }
    std::size_t remaining() const { return budget - used; }
};

}  // namespace

TEST(BoundHandling, OnlyViolatingCoordinatesChange) {
    RngStream rng(0, 0);
    for (auto mode : {BoundHandler::Saturate, BoundHandler::Toroidal, BoundHandler::Mirror, BoundHandler::Resample}) {
        std::vector<double> x{0.3, 1.2, -0.25, 1.0, 0.0};
        bound_handle(std::span<double>(x), mode, rng);
        EXPECT_EQ(x[0], 0.3);
        EXPECT_EQ(x[3], 1.0);
        EXPECT_EQ(x[4], 0.0);
        for (double v : x) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
    }
}

TEST(BoundHandling, ModeSpecificValues) {
    RngStream rng(0, 0);
    std::vector<double> s{1.2, -0.25, 3.7};
    bound_handle(std::span<double>(s), BoundHandler::Saturate, rng);
    EXPECT_EQ(s, (std::vector<double>{1.0, 0.0, 1.0}));
    std::vector<double> t{1.25, -0.25, 3.5};
    bound_handle(std::span<double>(t), BoundHandler::Toroidal, rng);
    EXPECT_EQ(t, (std::vector<double>{0.25, 0.75, 0.5}));
    std::vector<double> m{1.25, -0.25, 2.5, -1.75};
    bound_handle(std::span<double>(m), BoundHandler::Mirror, rng);
    EXPECT_EQ(m, (std::vector<double>{0.75, 0.25, 0.5, 0.25}));
    ScriptedRng scripted{{0.42}};
    std::vector<double> r{0.5, 7.0};
    bound_handle(std::span<double>(r), BoundHandler::Resample, scripted);
    EXPECT_EQ(r, (std::vector<double>{0.5, 0.42}));
    EXPECT_THROW(parse_bound_handler("clip"), ConfigError);
    EXPECT_EQ(parse_bound_handler(to_string(BoundHandler::Mirror)), BoundHandler::Mirror);
}

TEST(Sbx, SpreadFactor) {
    EXPECT_DOUBLE_EQ(sbx_spread(0.5, 20), 1.0);
    EXPECT_DOUBLE_EQ(sbx_spread(0.25, 1), std::sqrt(0.5));
    EXPECT_DOUBLE_EQ(sbx_spread(0.75, 1), 1.0 / std::sqrt(0.5));
    EXPECT_LT(sbx_spread(0.1, 20), 1.0);
    EXPECT_GT(sbx_spread(0.9, 20), 1.0);
}

TEST(Sbx, ChildrenPreserveMean) {
    const auto [a, b] = sbx_children(0.2, 0.6, 1.5);
    EXPECT_DOUBLE_EQ(a + b, 0.8);
    EXPECT_DOUBLE_EQ(a, 0.4 - 0.3);
    EXPECT_DOUBLE_EQ(b, 0.4 + 0.3);
    const auto [c, d] = sbx_children(0.2, 0.6, 1.0);
    EXPECT_DOUBLE_EQ(c, 0.2);
    EXPECT_DOUBLE_EQ(d, 0.6);
}

TEST(Sbx, DrawOrderPerVariable) {
    // variable 0: u = 0.5 (beta 1), sign draw 0.9 keeps it, disable draw 0.9 keeps crossing
    // variable 1: u = 0.25, sign draw 0.1 flips, disable draw 0.1 copies the parents
    ScriptedRng rng{{0.5, 0.9, 0.9, 0.25, 0.1, 0.1}};
    const std::vector<double> p1{0.2, 0.3}, p2{0.6, 0.9};
    const auto [c1, c2] = sbx_crossover(std::span<const double>(p1), std::span<const double>(p2), 1.0, 1.0, rng);
    EXPECT_NEAR(c1[0], 0.2, 1e-15);
    EXPECT_NEAR(c2[0], 0.6, 1e-15);
    EXPECT_EQ(c1[1], 0.3);
    EXPECT_EQ(c2[1], 0.9);
    EXPECT_TRUE(rng.u.empty());

    ScriptedRng flip{{0.25, 0.1, 0.9}};
    const std::vector<double> q1{0.2}, q2{0.6};
    const auto [d1, d2] = sbx_crossover(std::span<const double>(q1), std::span<const double>(q2), 1.0, 1.0, flip);
    const double beta = -std::sqrt(0.5);
    EXPECT_DOUBLE_EQ(d1[0], 0.4 + beta * -0.2);
    EXPECT_DOUBLE_EQ(d2[0], 0.4 - beta * -0.2);
}

TEST(Sbx, CrossoverProbabilityDrawnFirst) {
    ScriptedRng rng{{0.95}};
    const std::vector<double> p1{0.1}, p2{0.9};
    const auto [c1, c2] = sbx_crossover(std::span<const double>(p1), std::span<const double>(p2), 20, 0.9, rng);
    EXPECT_EQ(c1, p1);
    EXPECT_EQ(c2, p2);
    EXPECT_TRUE(rng.u.empty());
}

TEST(PolynomialMutation, StaysInBoundsAndIsMonotoneInU) {
    for (double x : {0.0, 0.01, 0.5, 0.99, 1.0}) {
        double prev = -1.0;
        for (int k = 0; k <= 100; ++k) {
            const double u = k / 100.0;
            const double y = polynomial_mutation(x, u, 20.0);
            ASSERT_GE(y, -1e-12);
            ASSERT_LE(y, 1.0 + 1e-12);
            ASSERT_GE(y, prev - 1e-12);
            prev = y;
        }
        EXPECT_NEAR(polynomial_mutation(x, 0.5, 20.0), x, 1e-12);
        EXPECT_NEAR(polynomial_mutation(x, 0.0, 20.0), 0.0, 1e-12);
        EXPECT_NEAR(polynomial_mutation(x, 1.0, 20.0), 1.0, 1e-12);
    }
}

TEST(Mutate, GateDrawThenValueDraw) {
    ScriptedRng rng{{0.9, 0.1, 0.5}};
    std::vector<double> x{0.3, 0.7};
    mutate(std::span<double>(x), 20.0, 0.5, rng);
    EXPECT_EQ(x[0], 0.3);
    EXPECT_NEAR(x[1], 0.7, 1e-12);
    EXPECT_TRUE(rng.u.empty());
}

TEST(Moead, WeightsAndNeighbourhoods) {
    const auto w = simplex_weights(5);
    ASSERT_EQ(w.size(), 5u);
    EXPECT_EQ(w.front(), (ObjectivePair{0.0, 1.0}));
    EXPECT_EQ(w.back(), (ObjectivePair{1.0, 0.0}));
    const auto h = weight_neighbourhoods(w, 3);
    EXPECT_EQ(h[0], (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(h[2], (std::vector<std::size_t>{2, 1, 3}));
    EXPECT_EQ(weight_neighbourhoods(w, 20)[4].size(), 5u);
    EXPECT_DOUBLE_EQ(tchebycheff({0.5, 0.2}, {0.0, 0.0}, {0.5, 0.5}), 0.25);
    EXPECT_EQ(update_ideal({0.3, 0.3}, {0.1, 0.5}), (ObjectivePair{0.1, 0.3}));
}

TEST(Nsga2, EnvironmentalSelectionKeepsFirstFront) {
    Population merged;
    for (int i = 0; i < 4; ++i) merged.push_back({{0.1 * i}, {i / 3.0, 1.0 - i / 3.0}});
    for (int i = 0; i < 4; ++i) merged.push_back({{0.5 + 0.1 * i}, {1.0 + i, 2.0 + i}});
    const auto sel = Nsga2<>::environmental_selection(merged, 4);
    ASSERT_EQ(sel.size(), 4u);
    for (const auto& m : sel) EXPECT_LT(m.x[0], 0.45);
    const auto partial = Nsga2<>::environmental_selection(merged, 2);
    ASSERT_EQ(partial.size(), 2u);
    // the two boundary points of the first front have infinite crowding
    EXPECT_EQ(partial[0].x[0], 0.0);
    EXPECT_NEAR(partial[1].x[0], 0.3, 1e-15);
}

class EveryAlgorithm : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryAlgorithm, UsesExactlyTheBudgetAndStaysInBounds) {
    OptimiserConfig cfg;
    cfg.population_size = 12;
    cfg.iterations = 7;
    for (std::size_t d : {1u, 3u}) {
        CountingEval eval{ProblemSpec::from_id("f1", d), RngStream(1, 0), cfg.budget()};
        RngStream rng(2, 1);
        auto opt = make_optimiser(GetParam(), cfg, d);
        std::visit(
            [&](auto& o) {
                run_optimiser(o, eval, rng, cfg.iterations);
                EXPECT_EQ(o.population().size(), cfg.population_size);
                for (const auto& m : o.population()) EXPECT_EQ(m.x.size(), d);
            },
            opt);
        EXPECT_EQ(eval.used, cfg.budget());
        EXPECT_EQ(eval.remaining(), 0u);
    }
}

TEST_P(EveryAlgorithm, RefusesToOverrunBudget) {
    OptimiserConfig cfg;
    cfg.population_size = 10;
    cfg.iterations = 3;
    CountingEval eval{ProblemSpec::from_id("f1", 2), RngStream(1, 0), 25};
    RngStream rng(2, 1);
    auto opt = make_optimiser(GetParam(), cfg, 2);
    EXPECT_THROW(std::visit([&](auto& o) { run_optimiser(o, eval, rng, cfg.iterations); }, opt), BudgetExhausted);
    EXPECT_LE(eval.used, 25u);
}

INSTANTIATE_TEST_SUITE_P(Optimisers, EveryAlgorithm,
                         ::testing::Values("random", "nsga2", "moead", "toy-bound", "toy-centre"),
                         [](const auto& info) {
                             std::string s = info.param;
                             for (char& c : s)
                                 if (c == '-') c = '_';
                             return s;
                         });

TEST(MakeOptimiser, RejectsUnknownAndZeroSizes) {
    OptimiserConfig cfg;
    EXPECT_THROW(make_optimiser("cmaes", cfg, 2), ConfigError);
    cfg.population_size = 0;
    EXPECT_THROW(make_optimiser("random", cfg, 2), ConfigError);
}

TEST(ToyControls, PileAtBoundsAndCentre) {
    auto aggregate = [](const std::string& algo) {
        OptimiserConfig cfg;
        cfg.population_size = 50;
        cfg.iterations = 40;
        std::vector<double> xl;
        for (std::size_t r = 0; r < 5; ++r) {
            const auto t = run_single("f1", algo, 2, r, 0, cfg);
            const auto c = t.xl.coordinates();
            xl.insert(xl.end(), c.begin(), c.end());
        }
        return xl;
    };
    const auto bound = aggregate("toy-bound");
    std::size_t at_bounds = 0;
    for (double v : bound) at_bounds += v == 0.0 || v == 1.0;
    EXPECT_GT(static_cast<double>(at_bounds) / bound.size(), 0.3);
    const auto centre = aggregate("toy-centre");
    for (double v : centre) EXPECT_NEAR(v, 0.5, 0.05);
}
