#pragma once

// Uninformative bi-objective test problems. Objective values are drawn from
// the supplied random source and never depend on the decision vector, so any
// spatial preference an optimiser shows is structural.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbmoo/errors.hpp"
#include "sbmoo/pareto.hpp"
#include "sbmoo/rng.hpp"
#include "sbmoo/stats.hpp"

namespace sbmoo {

enum class Family { F1, F2, F3, F4, F5 };
enum class Variant { None, Alpha, Beta, Gamma };

/// Noise scale r of the (family, variant) pair; 0 for F1 and F5.
constexpr double noise_scale(Family f, Variant v) {
    constexpr double kTable[3][3] = {
        {2.0, 0.08, 0.0015},  // F2
        {20.0, 0.9, 0.02},    // F3
        {60.0, 2.0, 0.06},    // F4
    };
    if (f == Family::F1 || f == Family::F5 || v == Variant::None) return 0.0;
    return kTable[static_cast<int>(f) - 1][static_cast<int>(v) - 1];
}

class ProblemSpec {
public:
    ProblemSpec(Family family, Variant variant, std::size_t d) : family_(family), variant_(variant), d_(d) {
        if (d == 0) throw InputError("decision dimension must be >= 1");
        const bool noisy = family == Family::F2 || family == Family::F3 || family == Family::F4;
        if (noisy == (variant == Variant::None))
            throw InputError("F2-F4 need an alpha/beta/gamma variant; F1/F5 take none");
    }

    /// Parses a canonical id: f1, f2a, f2b, f2g, ..., f5.
    static ProblemSpec from_id(std::string_view id, std::size_t d) {
        if (id == "f1") return {Family::F1, Variant::None, d};
        if (id == "f5") return {Family::F5, Variant::None, d};
        if (id.size() == 3 && id[0] == 'f' && id[1] >= '2' && id[1] <= '4') {
            const auto fam = static_cast<Family>(id[1] - '1');
            switch (id[2]) {
                case 'a': return {fam, Variant::Alpha, d};
                case 'b': return {fam, Variant::Beta, d};
                case 'g': return {fam, Variant::Gamma, d};
                default: break;
            }
        }
        throw InputError("unknown problem id '" + std::string(id) + "'");
    }

    Family family() const noexcept { return family_; }
    Variant variant() const noexcept { return variant_; }
    std::size_t d() const noexcept { return d_; }
    double r() const noexcept { return noise_scale(family_, variant_); }

    std::string id() const {
        std::string s = "f";
        s += static_cast<char>('1' + static_cast<int>(family_));
        switch (variant_) {
            case Variant::Alpha: s += 'a'; break;
            case Variant::Beta: s += 'b'; break;
            case Variant::Gamma: s += 'g'; break;
            case Variant::None: break;
        }
        return s;
    }

    friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;

private:
    Family family_;
    Variant variant_;
    std::size_t d_;
};

inline const std::array<std::string_view, 11>& all_problem_ids() {
    static const std::array<std::string_view, 11> ids{"f1",  "f2a", "f2b", "f2g", "f3a", "f3b",
                                                      "f3g", "f4a", "f4b", "f4g", "f5"};
    return ids;
}

/// Noise-free g2 as a function of the uniform draw a. F1 has no curve.
inline double base_curve(Family family, double a) {
    switch (family) {
        case Family::F2:
            // sqrt(a)/2, not sqrt(a/2): only this reading reproduces the
            // reference correlations (-0.03, -0.36, -0.43) and front sizes.
            return 1.0 - std::sin(12.0 * std::numbers::pi * std::pow(a, 1.5)) / 4.0 - std::sqrt(a) / 2.0;
        case Family::F3: {
            // b counts stair thresholds p_i = i/10 strictly below a; s_{b+1} = 1 - b/10.
            int b = 0;
            for (int i = 1; i <= 9; ++i)
                if (a > i / 10.0) ++b;
            const double s = 1.1 - (b + 1) / 10.0;
            return 0.1 / std::pow(10.0 * (a - b / 10.0) + 1.0, 10) + s;
        }
        case Family::F4:
            return a < 0.5 ? -2.0 * a * a : -2.0 * (a - 0.5) * (a - 0.5) - 0.5;
        case Family::F5:
            return -a;
        case Family::F1:
            break;
    }
    throw InputError("F1 has no deterministic front curve");
}

/// Draws one objective pair. Order of draws: F1 takes two uniforms; F5 one
/// uniform; F2-F4 one uniform then one normal.
template <RandomSource Rng>
ObjectivePair evaluate(const ProblemSpec& spec, std::span<const double> x, Rng& rng) {
    if (x.size() != spec.d())
        throw InputError("decision vector has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(spec.d()));
    for (double v : x)
        if (!std::isfinite(v)) throw InputError("decision vector has a non-finite coordinate");

    if (spec.family() == Family::F1) {
        const double g1 = rng.uniform();
        const double g2 = rng.uniform();
        return {g1, g2};
    }
    const double a = rng.uniform();
    if (spec.family() == Family::F5) return {a, -a};
    const double z = rng.normal();
    return {a, base_curve(spec.family(), a) + spec.r() * (z * z)};
}

/// Samples of the noise-free lower envelope on a uniform grid over [0,1].
/// F1's exact Pareto set is the single point (0,0).
inline std::vector<ObjectivePair> reference_front(const ProblemSpec& spec, std::size_t n_points) {
    if (n_points < 2) throw InputError("reference_front needs n_points >= 2");
    if (spec.family() == Family::F1) return {{0.0, 0.0}};
    std::vector<ObjectivePair> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double a = (i + 1 == n_points) ? 1.0 : static_cast<double>(i) / static_cast<double>(n_points - 1);
        out.push_back({a, base_curve(spec.family(), a)});
    }
    return out;
}

template <RandomSource Rng>
std::vector<ObjectivePair> sample_objectives(const ProblemSpec& spec, std::size_t n, Rng& rng) {
    const std::vector<double> x(spec.d(), 0.5);
    std::vector<ObjectivePair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(evaluate(spec, x, rng));
    return out;
}

template <RandomSource Rng>
std::size_t estimate_pf_count(const ProblemSpec& spec, std::size_t n, Rng& rng) {
    if (n == 0) throw InputError("estimate_pf_count needs n >= 1");
    const auto pts = sample_objectives(spec, n, rng);
    return nondominated_filter(pts).size();
}

template <RandomSource Rng>
double pearson_rho(const ProblemSpec& spec, std::size_t n, Rng& rng) {
    if (n < 2) throw InputError("pearson_rho needs n >= 2");
    const auto pts = sample_objectives(spec, n, rng);
    std::vector<double> g1(n), g2(n);
    for (std::size_t i = 0; i < n; ++i) {
        g1[i] = pts[i].g1;
        g2[i] = pts[i].g2;
    }
    return stats::pearson(g1, g2);
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

/// |PF| over `reps` independent samples of size n; repetition k uses stream k.
inline MeanSd pf_count_stats(const ProblemSpec& spec, std::size_t n, std::size_t reps, std::uint64_t seed) {
    std::vector<double> counts;
    for (std::size_t k = 0; k < reps; ++k) {
        RngStream rng(SeedHasher(seed).add("pf_count").add(spec.id()).add(n).value(), k);
        counts.push_back(static_cast<double>(estimate_pf_count(spec, n, rng)));
    }
    return {stats::mean(counts), stats::sample_sd(counts)};
}

inline MeanSd rho_stats(const ProblemSpec& spec, std::size_t n, std::size_t reps, std::uint64_t seed) {
    std::vector<double> rhos;
    for (std::size_t k = 0; k < reps; ++k) {
        RngStream rng(SeedHasher(seed).add("rho").add(spec.id()).add(n).value(), k);
        rhos.push_back(pearson_rho(spec, n, rng));
    }
    return {stats::mean(rhos), stats::sample_sd(rhos)};
}

struct ScalingRow {
    std::size_t n = 0;
    MeanSd count;
    double proportion = 0.0;  // mean count / n
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    double loglog_slope = 0.0;  // d log(proportion) / d log(n)
};

/// Non-dominated proportion versus sample size.
inline ScalingTable proportion_scaling(const ProblemSpec& spec, std::span<const std::size_t> sizes, std::size_t reps,
                                       std::uint64_t seed) {
    ScalingTable t;
    std::vector<double> lx, ly;
    for (std::size_t n : sizes) {
        ScalingRow row;
        row.n = n;
        row.count = pf_count_stats(spec, n, reps, seed);
        row.proportion = row.count.mean / static_cast<double>(n);
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(row.proportion));
        t.rows.push_back(row);
    }
    if (lx.size() >= 2) t.loglog_slope = stats::ols_slope(lx, ly);
    return t;
}

}  // namespace sbmoo
