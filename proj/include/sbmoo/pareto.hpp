#pragma once

// Bi-objective Pareto dominance under minimisation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "sbmoo/errors.hpp"

namespace sbmoo {

struct ObjectivePair {
    double g1 = 0.0;
    double g2 = 0.0;
    friend bool operator==(const ObjectivePair&, const ObjectivePair&) = default;
};

enum class Dominance { FirstDominates, SecondDominates, Incomparable, Equal };

namespace detail {
inline void require_finite(const ObjectivePair& p) {
    if (!std::isfinite(p.g1) || !std::isfinite(p.g2)) throw InputError("objective values must be finite");
}
inline void require_finite(std::span<const ObjectivePair> ps) {
    for (const auto& p : ps) require_finite(p);
}
}  // namespace detail

inline Dominance dominates(const ObjectivePair& a, const ObjectivePair& b) {
    detail::require_finite(a);
    detail::require_finite(b);
    if (a == b) return Dominance::Equal;
    if (a.g1 <= b.g1 && a.g2 <= b.g2) return Dominance::FirstDominates;
    if (b.g1 <= a.g1 && b.g2 <= a.g2) return Dominance::SecondDominates;
    return Dominance::Incomparable;
}

/// Indices of all points not strictly dominated by another point, ascending.
/// Exact duplicates never dominate each other, so all copies survive.
///
/// Sort by (g1, g2) and sweep: a point survives iff its g2 is strictly below
/// the running minimum, or equals the minimum and also shares the g1 of the
/// point that set it (an exact duplicate of a survivor).
inline std::vector<std::size_t> nondominated_filter(std::span<const ObjectivePair> points) {
    if (points.empty()) throw InputError("nondominated_filter: empty input");
    detail::require_finite(points);

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = points[a];
        const auto& pb = points[b];
        if (pa.g1 != pb.g1) return pa.g1 < pb.g1;
        if (pa.g2 != pb.g2) return pa.g2 < pb.g2;
        return a < b;
    });

    std::vector<std::size_t> kept;
    double best_g2 = std::numeric_limits<double>::infinity();
    double g1_at_best = 0.0;
    for (std::size_t i : order) {
        const auto& p = points[i];
        if (p.g2 < best_g2) {
            best_g2 = p.g2;
            g1_at_best = p.g1;
            kept.push_back(i);
        } else if (p.g2 == best_g2 && p.g1 == g1_at_best) {
            kept.push_back(i);
        }
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

/// Rank partition (Deb et al.'s fast non-dominated sort). Each front lists
/// indices in ascending order; front 0 equals nondominated_filter().
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectivePair> points) {
    if (points.empty()) throw InputError("fast_nondominated_sort: empty input");
    detail::require_finite(points);

    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);

    auto strictly = [&](std::size_t a, std::size_t b) {
        const auto& pa = points[a];
        const auto& pb = points[b];
        return pa.g1 <= pb.g1 && pa.g2 <= pb.g2 && (pa.g1 < pb.g1 || pa.g2 < pb.g2);
    };
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (strictly(p, q)) {
                dominated_by[p].push_back(q);
                ++domination_count[q];
            } else if (strictly(q, p)) {
                dominated_by[q].push_back(p);
                ++domination_count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p)
        if (domination_count[p] == 0) fronts[0].push_back(p);

    while (true) {
        std::vector<std::size_t> next;
        for (std::size_t p : fronts.back())
            for (std::size_t q : dominated_by[p])
                if (--domination_count[q] == 0) next.push_back(q);
        if (next.empty()) break;
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    return fronts;
}

/// NSGA-II crowding distance of a mutually non-dominated front. Boundary
/// points of each objective get +inf; an objective with zero range adds 0.
inline std::vector<double> crowding_distance(std::span<const ObjectivePair> front) {
    const std::size_t n = front.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), kInf);
        return distance;
    }
    std::vector<std::size_t> order(n);
    for (int m = 0; m < 2; ++m) {
        auto value = [&](std::size_t i) { return m == 0 ? front[i].g1 : front[i].g2; };
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        distance[order.front()] = kInf;
        distance[order.back()] = kInf;
        const double range = value(order.back()) - value(order.front());
        if (range <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < n; ++k)
            distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
    }
    return distance;
}

}  // namespace sbmoo
