#pragma once

// Reference optimisers driven against an evaluator. Every optimiser starts
// from a uniform population over [0,1]^d and emits only in-bound vectors.
//
// An evaluator is anything callable as `ObjectivePair(std::span<const double>)`
// that also reports `remaining()` evaluations.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sbmoo/errors.hpp"
#include "sbmoo/pareto.hpp"
#include "sbmoo/points.hpp"
#include "sbmoo/rng.hpp"

namespace sbmoo {

template <class E>
concept Evaluator = requires(E& e, std::span<const double> x) {
    { e(x) } -> std::convertible_to<ObjectivePair>;
    { e.remaining() } -> std::convertible_to<std::size_t>;
};

enum class BoundHandler { Saturate, Toroidal, Mirror, Resample };

inline BoundHandler parse_bound_handler(std::string_view s) {
    if (s == "saturate") return BoundHandler::Saturate;
    if (s == "toroidal") return BoundHandler::Toroidal;
    if (s == "mirror") return BoundHandler::Mirror;
    if (s == "resample") return BoundHandler::Resample;
    throw ConfigError("unknown bound handler '" + std::string(s) + "'");
}

inline std::string_view to_string(BoundHandler b) {
    switch (b) {
        case BoundHandler::Saturate: return "saturate";
        case BoundHandler::Toroidal: return "toroidal";
        case BoundHandler::Mirror: return "mirror";
        case BoundHandler::Resample: return "resample";
    }
    return "?";
}

/// Maps x into [0,1]^d in place. Only out-of-bound coordinates are touched;
/// Resample draws one uniform per violating coordinate.
template <RandomSource Rng>
void bound_handle(std::span<double> x, BoundHandler mode, Rng& rng) {
    for (double& v : x) {
        if (!std::isfinite(v)) throw InputError("bound_handle: non-finite coordinate");
        if (v >= 0.0 && v <= 1.0) continue;
        switch (mode) {
            case BoundHandler::Saturate: v = std::clamp(v, 0.0, 1.0); break;
            case BoundHandler::Toroidal: v -= std::floor(v); break;
            case BoundHandler::Mirror: {
                // repeated reflection about the violated bound has period 2
                double t = std::fmod(std::fabs(v), 2.0);
                v = t > 1.0 ? 2.0 - t : t;
                break;
            }
            case BoundHandler::Resample: v = rng.uniform(); break;
        }
    }
}

struct OptimiserConfig {
    std::size_t population_size = 100;
    std::size_t iterations = 300;  // generations, initial population included
    BoundHandler bound_handler = BoundHandler::Saturate;
    double eta_c = 20.0;
    double eta_m = 20.0;
    double p_c = 1.0;
    double p_m = 0.0;  // 0 selects 1/d
    std::size_t neighbourhood = 20;
    double toy_bound_sigma = 0.5;
    double toy_centre_contraction = 0.5;
    double toy_centre_noise = 0.005;

    std::size_t budget() const noexcept { return population_size * iterations; }
    double mutation_rate(std::size_t d) const noexcept { return p_m > 0.0 ? p_m : 1.0 / static_cast<double>(d); }
};

struct Member {
    std::vector<double> x;
    ObjectivePair f;
};
using Population = std::vector<Member>;

inline PointSet decision_vectors(const Population& pop) {
    PointSet ps;
    for (const auto& m : pop) ps.push_back(m.x);
    return ps;
}

// ---------------------------------------------------------------------------
// Variation operators

/// SBX spread factor for a uniform draw u in [0,1).
inline double sbx_spread(double u, double eta) {
    if (u <= 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0));
    return std::pow(2.0 - 2.0 * u, -1.0 / (eta + 1.0));
}

/// Children (m + beta*h, m - beta*h) with m the parents' mean and h half
/// their difference; beta = 1 reproduces the parents.
inline std::pair<double, double> sbx_children(double p1, double p2, double beta) {
    const double mid = 0.5 * (p1 + p2);
    const double half = 0.5 * (p1 - p2);
    return {mid + beta * half, mid - beta * half};
}

/// Bounded polynomial mutation of x in [0,1] for uniform draw u.
inline double polynomial_mutation(double x, double u, double eta) {
    const double e1 = eta + 1.0;
    if (u <= 0.5) {
        const double xy = 1.0 - x;
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, e1);
        return x + (std::pow(val, 1.0 / e1) - 1.0);
    }
    const double xy = x;  // 1 - (upper - x)
    const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, e1);
    return x + (1.0 - std::pow(val, 1.0 / e1));
}

/// Per variable, in this draw order: u for the spread factor, one draw for
/// the sign of beta (< 0.5 flips it, i.e. swaps the children), one draw that
/// disables crossover of the variable when < 0.5. With probability 1 - p_c
/// (one draw per pair, taken first) the pair is copied unchanged.
template <RandomSource Rng>
std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> p1,
                                                                  std::span<const double> p2, double eta,
                                                                  double p_c, Rng& rng) {
    std::vector<double> c1(p1.begin(), p1.end()), c2(p2.begin(), p2.end());
    const bool cross = p_c >= 1.0 || rng.uniform() < p_c;
    if (!cross) return {c1, c2};
    for (std::size_t i = 0; i < p1.size(); ++i) {
        double beta = sbx_spread(rng.uniform(), eta);
        if (rng.uniform() < 0.5) beta = -beta;
        if (rng.uniform() < 0.5) continue;  // parents copied unchanged
        std::tie(c1[i], c2[i]) = sbx_children(p1[i], p2[i], beta);
    }
    return {c1, c2};
}

/// Per variable: one draw decides mutation (< p_m), a second draw drives it.
template <RandomSource Rng>
void mutate(std::span<double> x, double eta, double p_m, Rng& rng) {
    for (double& v : x) {
        if (rng.uniform() < p_m) v = std::clamp(polynomial_mutation(v, rng.uniform(), eta), 0.0, 1.0);
    }
}

/// SBX, bound handling, polynomial mutation, bound handling. Mutation works
/// on in-bound parents, matching saturation-before-mutation frameworks.
template <RandomSource Rng>
std::pair<std::vector<double>, std::vector<double>> make_offspring(std::span<const double> p1,
                                                                   std::span<const double> p2,
                                                                   const OptimiserConfig& cfg, Rng& rng) {
    auto [c1, c2] = sbx_crossover(p1, p2, cfg.eta_c, cfg.p_c, rng);
    for (auto* c : {&c1, &c2}) {
        bound_handle(std::span<double>(*c), cfg.bound_handler, rng);
        mutate(std::span<double>(*c), cfg.eta_m, cfg.mutation_rate(c->size()), rng);
        bound_handle(std::span<double>(*c), cfg.bound_handler, rng);
    }
    return {std::move(c1), std::move(c2)};
}

// ---------------------------------------------------------------------------

namespace detail {

template <RandomSource Rng>
std::vector<double> uniform_point(std::size_t d, Rng& rng) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform();
    return x;
}

template <Evaluator Eval>
void require_budget(const Eval& eval, std::size_t need) {
    if (eval.remaining() < need)
        throw BudgetExhausted("step needs " + std::to_string(need) + " evaluations, " +
                              std::to_string(eval.remaining()) + " remain");
}

template <Evaluator Eval, RandomSource Rng>
Population uniform_population(std::size_t d, std::size_t n, Eval& eval, Rng& rng) {
    require_budget(eval, n);
    Population pop;
    pop.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = uniform_point(d, rng);
        const auto f = eval(std::span<const double>(x));
        pop.push_back({std::move(x), f});
    }
    return pop;
}

inline std::vector<ObjectivePair> objectives(const Population& pop) {
    std::vector<ObjectivePair> out;
    out.reserve(pop.size());
    for (const auto& m : pop) out.push_back(m.f);
    return out;
}

}  // namespace detail

/// Uniform random search: every generation is a fresh uniform sample.
template <RandomSource Rng = RngStream>
class RandomSearch {
public:
    RandomSearch(OptimiserConfig cfg, std::size_t d) : cfg_(cfg), d_(d) {}

    template <Evaluator Eval>
    void initialise(Eval& eval, Rng& rng) { pop_ = detail::uniform_population(d_, cfg_.population_size, eval, rng); }

    template <Evaluator Eval>
    void step(Eval& eval, Rng& rng) { pop_ = detail::uniform_population(d_, cfg_.population_size, eval, rng); }

    const Population& population() const noexcept { return pop_; }

private:
    OptimiserConfig cfg_;
    std::size_t d_;
    Population pop_;
};

/// NSGA-II with binary tournaments on (rank, crowding), SBX and polynomial
/// mutation, and elitist (mu + lambda) environmental selection.
template <RandomSource Rng = RngStream>
class Nsga2 {
public:
    Nsga2(OptimiserConfig cfg, std::size_t d) : cfg_(cfg), d_(d) {}

    template <Evaluator Eval>
    void initialise(Eval& eval, Rng& rng) {
        pop_ = detail::uniform_population(d_, cfg_.population_size, eval, rng);
        assign_rank_and_crowding();
    }

    template <Evaluator Eval>
    void step(Eval& eval, Rng& rng) {
        const std::size_t n = cfg_.population_size;
        detail::require_budget(eval, n);
        Population offspring;
        offspring.reserve(n);
        while (offspring.size() < n) {
            const std::size_t a = tournament(rng);
            const std::size_t b = tournament(rng);
            auto [c1, c2] = make_offspring(pop_[a].x, pop_[b].x, cfg_, rng);
            for (auto* c : {&c1, &c2}) {
                if (offspring.size() == n) break;
                const auto f = eval(std::span<const double>(*c));
                offspring.push_back({std::move(*c), f});
            }
        }
        Population merged = std::move(pop_);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                      std::make_move_iterator(offspring.end()));
        pop_ = environmental_selection(std::move(merged), n);
        assign_rank_and_crowding();
    }

    const Population& population() const noexcept { return pop_; }
    const std::vector<std::size_t>& ranks() const noexcept { return rank_; }
    const std::vector<double>& crowding() const noexcept { return crowd_; }

    /// Keeps whole fronts while they fit, then the most crowded-apart members
    /// of the first front that does not (ties by position).
    static Population environmental_selection(Population merged, std::size_t n) {
        const auto objs = detail::objectives(merged);
        const auto fronts = fast_nondominated_sort(objs);
        Population next;
        next.reserve(n);
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= n) {
                for (std::size_t i : front) next.push_back(std::move(merged[i]));
                if (next.size() == n) break;
                continue;
            }
            std::vector<ObjectivePair> fobj;
            for (std::size_t i : front) fobj.push_back(objs[i]);
            const auto cd = crowding_distance(fobj);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
            for (std::size_t k = 0; next.size() < n; ++k) next.push_back(std::move(merged[front[order[k]]]));
            break;
        }
        return next;
    }

private:
    void assign_rank_and_crowding() {
        const auto objs = detail::objectives(pop_);
        const auto fronts = fast_nondominated_sort(objs);
        rank_.assign(pop_.size(), 0);
        crowd_.assign(pop_.size(), 0.0);
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            std::vector<ObjectivePair> fobj;
            for (std::size_t i : fronts[r]) fobj.push_back(objs[i]);
            const auto cd = crowding_distance(fobj);
            for (std::size_t k = 0; k < fronts[r].size(); ++k) {
                rank_[fronts[r][k]] = r;
                crowd_[fronts[r][k]] = cd[k];
            }
        }
    }

    std::size_t tournament(Rng& rng) const {
        const std::size_t i = rng.below(pop_.size());
        const std::size_t j = rng.below(pop_.size());
        if (rank_[i] != rank_[j]) return rank_[i] < rank_[j] ? i : j;
        if (crowd_[i] != crowd_[j]) return crowd_[i] > crowd_[j] ? i : j;
        return i;
    }

    OptimiserConfig cfg_;
    std::size_t d_;
    Population pop_;
    std::vector<std::size_t> rank_;
    std::vector<double> crowd_;
};

/// max_i w_i |f_i - z_i|
inline double tchebycheff(const ObjectivePair& f, const ObjectivePair& ideal, const ObjectivePair& w) {
    return std::max(w.g1 * std::fabs(f.g1 - ideal.g1), w.g2 * std::fabs(f.g2 - ideal.g2));
}

inline ObjectivePair update_ideal(const ObjectivePair& ideal, const ObjectivePair& f) {
    return {std::min(ideal.g1, f.g1), std::min(ideal.g2, f.g2)};
}

/// Weights (i/(n-1), 1 - i/(n-1)) spread evenly on the 2-simplex.
inline std::vector<ObjectivePair> simplex_weights(std::size_t n) {
    if (n == 0) throw InputError("simplex_weights: n must be positive");
    if (n == 1) return {{0.5, 0.5}};
    std::vector<ObjectivePair> w;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(i) / static_cast<double>(n - 1);
        w.push_back({a, 1.0 - a});
    }
    return w;
}

/// Indices of the t closest weight vectors to each weight (itself included).
inline std::vector<std::vector<std::size_t>> weight_neighbourhoods(const std::vector<ObjectivePair>& w,
                                                                    std::size_t t) {
    t = std::min(t, w.size());
    std::vector<std::vector<std::size_t>> hood(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<std::size_t> order(w.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto dist = [&](std::size_t j) {
            const double a = w[i].g1 - w[j].g1, b = w[i].g2 - w[j].g2;
            return a * a + b * b;
        };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
        hood[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(t));
    }
    return hood;
}

/// MOEA/D with Tchebycheff aggregation. Each generation visits every
/// subproblem once: two parents from its neighbourhood, one SBX child,
/// replacement of any neighbour whose aggregated value strictly improves.
template <RandomSource Rng = RngStream>
class Moead {
public:
    Moead(OptimiserConfig cfg, std::size_t d)
        : cfg_(cfg), d_(d), weights_(simplex_weights(cfg.population_size)),
          hood_(weight_neighbourhoods(weights_, cfg.neighbourhood)) {}

    template <Evaluator Eval>
    void initialise(Eval& eval, Rng& rng) {
        pop_ = detail::uniform_population(d_, cfg_.population_size, eval, rng);
        ideal_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        for (const auto& m : pop_) ideal_ = update_ideal(ideal_, m.f);
    }

    template <Evaluator Eval>
    void step(Eval& eval, Rng& rng) {
        detail::require_budget(eval, pop_.size());
        for (std::size_t i = 0; i < pop_.size(); ++i) {
            const auto& hood = hood_[i];
            const std::size_t a = hood[rng.below(hood.size())];
            const std::size_t b = hood[rng.below(hood.size())];
            auto child = make_offspring(pop_[a].x, pop_[b].x, cfg_, rng).first;
            const auto f = eval(std::span<const double>(child));
            ideal_ = update_ideal(ideal_, f);
            for (std::size_t j : hood) {
                if (tchebycheff(f, ideal_, weights_[j]) < tchebycheff(pop_[j].f, ideal_, weights_[j]))
                    pop_[j] = {child, f};
            }
        }
    }

    const Population& population() const noexcept { return pop_; }
    const ObjectivePair& ideal() const noexcept { return ideal_; }

private:
    OptimiserConfig cfg_;
    std::size_t d_;
    std::vector<ObjectivePair> weights_;
    std::vector<std::vector<std::size_t>> hood_;
    Population pop_;
    ObjectivePair ideal_{};
};

/// Positive control: large Gaussian jumps plus bound handling pile mass at
/// the bounds.
template <RandomSource Rng = RngStream>
class ToyBoundBiased {
public:
    ToyBoundBiased(OptimiserConfig cfg, std::size_t d) : cfg_(cfg), d_(d) {}

    template <Evaluator Eval>
    void initialise(Eval& eval, Rng& rng) { pop_ = detail::uniform_population(d_, cfg_.population_size, eval, rng); }

    template <Evaluator Eval>
    void step(Eval& eval, Rng& rng) {
        detail::require_budget(eval, pop_.size());
        for (auto& m : pop_) {
            for (double& v : m.x) v += cfg_.toy_bound_sigma * rng.normal();
            bound_handle(std::span<double>(m.x), cfg_.bound_handler, rng);
            m.f = eval(std::span<const double>(m.x));
        }
    }

    const Population& population() const noexcept { return pop_; }

private:
    OptimiserConfig cfg_;
    std::size_t d_;
    Population pop_;
};

/// Positive control: contracts toward the centre each generation.
template <RandomSource Rng = RngStream>
class ToyCentreBiased {
public:
    ToyCentreBiased(OptimiserConfig cfg, std::size_t d) : cfg_(cfg), d_(d) {}

    template <Evaluator Eval>
    void initialise(Eval& eval, Rng& rng) { pop_ = detail::uniform_population(d_, cfg_.population_size, eval, rng); }

    template <Evaluator Eval>
    void step(Eval& eval, Rng& rng) {
        detail::require_budget(eval, pop_.size());
        const double keep = 1.0 - cfg_.toy_centre_contraction;
        for (auto& m : pop_) {
            for (double& v : m.x) v = 0.5 + keep * (v - 0.5) + cfg_.toy_centre_noise * rng.normal();
            bound_handle(std::span<double>(m.x), cfg_.bound_handler, rng);
            m.f = eval(std::span<const double>(m.x));
        }
    }

    const Population& population() const noexcept { return pop_; }

private:
    OptimiserConfig cfg_;
    std::size_t d_;
    Population pop_;
};

using AnyOptimiser = std::variant<RandomSearch<>, Nsga2<>, Moead<>, ToyBoundBiased<>, ToyCentreBiased<>>;

inline const std::vector<std::string_view>& algorithm_ids() {
    static const std::vector<std::string_view> ids{"random", "nsga2", "moead", "toy-bound", "toy-centre"};
    return ids;
}

inline AnyOptimiser make_optimiser(std::string_view id, const OptimiserConfig& cfg, std::size_t d) {
    if (cfg.population_size == 0 || cfg.iterations == 0) throw ConfigError("population and iterations must be >= 1");
    if (id == "random") return RandomSearch<>(cfg, d);
    if (id == "nsga2") return Nsga2<>(cfg, d);
    if (id == "moead") return Moead<>(cfg, d);
    if (id == "toy-bound") return ToyBoundBiased<>(cfg, d);
    if (id == "toy-centre") return ToyCentreBiased<>(cfg, d);
    throw ConfigError("unknown algorithm '" + std::string(id) + "'");
}

/// Initial population plus iterations - 1 generations: exactly
/// population_size * iterations evaluations.
template <class Opt, Evaluator Eval, RandomSource Rng>
void run_optimiser(Opt& opt, Eval& eval, Rng& rng, std::size_t iterations) {
    opt.initialise(eval, rng);
    for (std::size_t g = 1; g < iterations; ++g) opt.step(eval, rng);
}

}  // namespace sbmoo
