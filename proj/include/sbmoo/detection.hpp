#pragma once

// Structural-bias detectors over decision-space samples: a uniformity test
// battery, the aggregated chi-squared test with e-scaled geometric p-value
// merging, binsize inspection, the Clark-Evans index, and region labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sbmoo/errors.hpp"
#include "sbmoo/harness.hpp"
#include "sbmoo/points.hpp"
#include "sbmoo/rng.hpp"
#include "sbmoo/stats.hpp"

namespace sbmoo {

// ---------------------------------------------------------------------------
// Histograms and binsizes

/// K equal bins [(k-1)/K, k/K) over [0,1], the last bin closed at 1.
struct BinHistogram {
    std::size_t K = 0;
    std::vector<std::size_t> counts;
    std::size_t N = 0;

    /// n_k / (N / K); all zero for an empty histogram.
    std::vector<double> binsizes() const {
        std::vector<double> out(K, 0.0);
        if (N == 0) return out;
        for (std::size_t k = 0; k < K; ++k)
            out[k] = static_cast<double>(counts[k]) * static_cast<double>(K) / static_cast<double>(N);
        return out;
    }
    double binsize(std::size_t k) const {
        return N == 0 ? 0.0 : static_cast<double>(counts.at(k)) * static_cast<double>(K) / static_cast<double>(N);
    }
};

inline BinHistogram make_histogram(std::span<const double> values, std::size_t K) {
    if (K < 1) throw ConfigError("bin count must be >= 1");
    BinHistogram h;
    h.K = K;
    h.counts = stats::unit_histogram(values, K);
    h.N = values.size();
    return h;
}

/// The two boundary and two central bins.
struct BinsizeQuad {
    double bound_left = 0.0;    // binsize_1
    double centre_left = 0.0;   // binsize_{K/2}
    double centre_right = 0.0;  // binsize_{K/2+1}
    double bound_right = 0.0;   // binsize_K

    double boundary_sum() const noexcept { return bound_left + bound_right; }
    double centre_sum() const noexcept { return centre_left + centre_right; }
    friend bool operator==(const BinsizeQuad&, const BinsizeQuad&) = default;
};

inline BinsizeQuad quad_of(const BinHistogram& h) {
    if (h.K < 2 || h.K % 2 != 0) throw ConfigError("central bins need an even bin count, got K = " + std::to_string(h.K));
    return {h.binsize(0), h.binsize(h.K / 2 - 1), h.binsize(h.K / 2), h.binsize(h.K - 1)};
}

struct BinsizeInspection {
    BinHistogram histogram;
    BinsizeQuad quad;
};

/// Flattens every coordinate of every point into one histogram.
inline BinsizeInspection binsize_inspection(std::span<const double> coordinates, std::size_t K = 20) {
    if (K % 2 != 0) throw ConfigError("central bins need an even bin count, got K = " + std::to_string(K));
    if (coordinates.empty()) throw InputError("binsize_inspection: no points");
    auto h = make_histogram(coordinates, K);
    const auto q = quad_of(h);
    return {std::move(h), q};
}

inline std::vector<double> aggregate_coordinates(std::span<const RunTrace> traces, PointSource src) {
    std::vector<double> all;
    for (const auto& t : traces) {
        const auto c = points_of(t, src).coordinates();
        all.insert(all.end(), c.begin(), c.end());
    }
    return all;
}

// ---------------------------------------------------------------------------
// Chi-squared on the flattened sample, p-value merging

/// Flattens the n_r x d sample and tests the K-bin histogram against
/// uniformity with K - 1 degrees of freedom.
inline stats::Chi2Result chi2_uniformity(const PointSet& points, std::size_t K = 20) {
    const auto values = points.coordinates();
    if (K < 2) throw ConfigError("chi-squared needs K >= 2");
    if (static_cast<double>(values.size()) < 5.0 * static_cast<double>(K))
        throw InputError("chi-squared expected count below 5 per bin (" + std::to_string(values.size()) + " values, " +
                         std::to_string(K) + " bins): use a larger sample or fewer bins");
    return stats::chi2_uniform(values, K);
}

/// min(1, e * geometric_mean(ps)).
inline double merge_pvalues(std::span<const double> ps) {
    if (ps.empty()) throw InputError("merge_pvalues: no p-values");
    double log_sum = 0.0;
    for (double p : ps) {
        if (!(p > 0.0) || p > 1.0) throw InputError("merge_pvalues: p-values must lie in (0,1]");
        log_sum += std::log(p);
    }
    return std::min(1.0, std::exp(1.0 + log_sum / static_cast<double>(ps.size())));
}

/// The same merge rule on natural-log p-values; returns the log of the
/// merged value so deep tails survive.
inline double merge_log_pvalues(std::span<const double> log_ps) {
    if (log_ps.empty()) throw InputError("merge_log_pvalues: no p-values");
    double s = 0.0;
    for (double lp : log_ps) {
        if (!(lp <= 0.0)) throw InputError("merge_log_pvalues: log p must be <= 0");
        s += lp;
    }
    return std::min(0.0, 1.0 + s / static_cast<double>(log_ps.size()));
}

// ---------------------------------------------------------------------------
// Uniformity battery

enum class BatteryTest { KolmogorovSmirnov, AndersonDarling, CramerVonMises, ChiSquared10 };
inline constexpr std::size_t kBatteryTests = 4;

struct BatteryOutcome {
    std::size_t rejections = 0;
    std::size_t tests = 0;
    /// per dimension, per test: rejected?
    std::vector<std::array<bool, kBatteryTests>> rejected;
    double rate() const noexcept { return tests == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(tests); }
};

/// KS, Anderson-Darling, Cramer-von Mises and 10-bin chi-squared on every
/// coordinate of one n_r x d sample.
inline BatteryOutcome battery_rejections(const PointSet& sample, double alpha) {
    if (sample.size() < 20) throw InputError("uniformity battery needs n_r >= 20, got " + std::to_string(sample.size()));
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    BatteryOutcome out;
    for (std::size_t j = 0; j < sample.dim(); ++j) {
        const auto col = sample.column(j);
        for (double v : col)
            if (!(v >= 0.0 && v <= 1.0)) throw InputError("uniformity battery: coordinate outside [0,1]");
        const std::array<double, kBatteryTests> p{stats::ks_uniform(col).p, stats::ad_uniform(col).p,
                                                  stats::cvm_uniform(col).p, stats::chi2_uniform(col, 10).p};
        std::array<bool, kBatteryTests> rej{};
        for (std::size_t k = 0; k < kBatteryTests; ++k) {
            rej[k] = p[k] < alpha;
            out.rejections += rej[k];
            ++out.tests;
        }
        out.rejected.push_back(rej);
    }
    return out;
}

struct BatteryResult {
    double bias_rej = 0.0;
    std::vector<BatteryOutcome> repetitions;
};

/// Rejection fraction averaged over the sampling repetitions.
inline BatteryResult uniformity_battery(std::span<const PointSet> samples, double alpha = 0.01) {
    if (samples.empty()) throw InputError("uniformity battery: no samples");
    BatteryResult r;
    double sum = 0.0;
    for (const auto& s : samples) {
        r.repetitions.push_back(battery_rejections(s, alpha));
        sum += r.repetitions.back().rate();
    }
    r.bias_rej = sum / static_cast<double>(samples.size());
    return r;
}

// ---------------------------------------------------------------------------
// Clark-Evans index

/// Mean Euclidean distance from each point to its nearest other point.
inline double mean_nn_distance(const PointSet& pts) {
    const std::size_t m = pts.size(), d = pts.dim();
    if (m < 2) throw InputError("nearest-neighbour distance needs at least two points");
    std::vector<double> best(m, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < m; ++i) {
        const auto a = pts[i];
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto b = pts[j];
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = a[k] - b[k];
                s += diff * diff;
            }
            best[i] = std::min(best[i], s);
            best[j] = std::min(best[j], s);
        }
    }
    double sum = 0.0;
    for (double s : best) sum += std::sqrt(s);
    return sum / static_cast<double>(m);
}

enum class CeiMethod { MonteCarlo, Analytic };

struct CeiCalibration {
    CeiMethod method = CeiMethod::MonteCarlo;
    std::size_t replicates = 1000;
    std::uint64_t seed = 0x5EED;
    friend bool operator==(const CeiCalibration&, const CeiCalibration&) = default;
};

/// Poisson expectation Gamma(1 + 1/d) (m V_d)^(-1/d), V_d the unit-ball
/// volume. Ignores edge effects.
inline double analytic_expected_nn(std::size_t m, std::size_t d) {
    const double dd = static_cast<double>(d);
    const double vd = std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
    return std::tgamma(1.0 + 1.0 / dd) * std::pow(static_cast<double>(m) * vd, -1.0 / dd);
}

/// Mean NN distance of m i.i.d. uniform points in [0,1]^d averaged over R
/// seeded replicates. Memoised per (m, d, R, seed).
inline double mc_expected_nn(std::size_t m, std::size_t d, std::size_t replicates, std::uint64_t seed) {
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::uint64_t>, double> cache;
    const auto key = std::make_tuple(m, d, replicates, seed);
    {
        std::lock_guard lk(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    if (replicates == 0) throw ConfigError("Monte-Carlo calibration needs at least one replicate");
    double sum = 0.0;
    std::vector<double> buf(m * d);
    for (std::size_t r = 0; r < replicates; ++r) {
        RngStream rng(SeedHasher(seed).add("cei").add(m).add(d).value(), r);
        for (double& v : buf) v = rng.uniform();
        sum += mean_nn_distance(PointSet(d, buf));
    }
    const double value = sum / static_cast<double>(replicates);
    std::lock_guard lk(mu);
    cache.emplace(key, value);
    return value;
}

inline double expected_nn(std::size_t m, std::size_t d, const CeiCalibration& cal) {
    return cal.method == CeiMethod::Analytic ? analytic_expected_nn(m, d)
                                             : mc_expected_nn(m, d, cal.replicates, cal.seed);
}

/// Observed over expected mean NN distance: < 1 clustered, ~1 uniform,
/// > 1 grid-like. All-duplicate input gives 0.
inline double clark_evans(const PointSet& pts, const CeiCalibration& cal = {}) {
    if (pts.size() < 2) throw InputError("Clark-Evans index needs m >= 2 points");
    return mean_nn_distance(pts) / expected_nn(pts.size(), pts.dim(), cal);
}

struct CeiResult {
    std::vector<double> per_run;
    double mean = 0.0;
    CeiCalibration calibration;
};

// ---------------------------------------------------------------------------
// Regions

enum class Region { Unbiased, A_Centre, B_Mixed, C_Mixed, D_Mixed, E_Bound, Irregular };

inline std::string_view to_string(Region r) {
    switch (r) {
        case Region::Unbiased: return "unbiased";
        case Region::A_Centre: return "A-centre";
        case Region::B_Mixed: return "B-mixed";
        case Region::C_Mixed: return "C-mixed";
        case Region::D_Mixed: return "D-mixed";
        case Region::E_Bound: return "E-bound";
        case Region::Irregular: return "irregular";
    }
    return "?";
}

inline Region parse_region(std::string_view s) {
    for (Region r : {Region::Unbiased, Region::A_Centre, Region::B_Mixed, Region::C_Mixed, Region::D_Mixed,
                     Region::E_Bound, Region::Irregular})
        if (to_string(r) == s) return r;
    throw InputError("unknown region label '" + std::string(s) + "'");
}

/// x = boundary binsize sum, y = centre binsize sum; (2, 2) is uniform.
/// When both exceed 2 + tau the split is by the angle of (x, y): above 60
/// degrees B (centre-leaning), below 30 degrees D (bound-leaning), else C.
inline Region classify_region(const BinsizeQuad& q, double tau = 0.5) {
    const double x = q.boundary_sum(), y = q.centre_sum();
    const double hi = 2.0 + tau;
    if (std::fabs(x - 2.0) <= tau && std::fabs(y - 2.0) <= tau) return Region::Unbiased;
    if (x > hi && y > hi) {
        const double ratio = y / x;
        if (ratio >= std::sqrt(3.0)) return Region::B_Mixed;
        if (ratio <= 1.0 / std::sqrt(3.0)) return Region::D_Mixed;
        return Region::C_Mixed;
    }
    if (x > hi) return Region::E_Bound;
    if (y > hi) return Region::A_Centre;
    return Region::Irregular;
}

// ---------------------------------------------------------------------------
// Full pipeline for one (algorithm, problem, dim) cell

struct DetectionConfig {
    PointSource source = PointSource::XP;
    std::size_t bins = 20;
    double alpha = 0.01;
    std::size_t repetitions = 10;
    double tau = 0.5;
    CeiCalibration cei;
    std::uint64_t master_seed = 0;
    std::size_t expected_runs = 0;  // 0: infer from the highest run index
    bool allow_incomplete = false;  // true: drop incomplete runs with a warning instead of failing
};

struct DetectionReport {
    std::string algorithm;
    std::string problem;
    std::size_t d = 0;
    std::size_t runs = 0;
    double bias_rej = 0.0;
    double chi2_p_merged = 1.0;
    double chi2_log10_p_merged = 0.0;  // exact even when chi2_p_merged is clamped
    std::vector<double> chi2_p_repetitions;
    BinHistogram histogram;
    BinsizeQuad quad;
    CeiResult cei;
    Region region = Region::Unbiased;
    std::vector<std::string> warnings;
};

/// BIAS_rej and chi-squared on one-point-per-run samples (merged over the
/// repetitions), binsizes on all aggregated points of the chosen source,
/// CEI on each run's X_L, region from the quad.
inline DetectionReport detect(std::span<const RunTrace> traces, const DetectionConfig& cfg = {}) {
    if (traces.empty()) throw InputError("detect: no traces");
    if (cfg.repetitions == 0) throw ConfigError("detect: repetitions must be >= 1");
    DetectionReport rep;
    rep.algorithm = traces.front().algorithm_id;
    rep.problem = traces.front().problem_id;
    rep.d = traces.front().d;

    std::set<std::size_t> present;
    std::vector<RunTrace const*> usable;
    std::string incomplete;
    std::size_t max_index = 0;
    for (const auto& t : traces) {
        if (t.algorithm_id != rep.algorithm || t.problem_id != rep.problem || t.d != rep.d)
            throw InputError("detect: traces from more than one (algorithm, problem, d) cell");
        if (!present.insert(t.run_index).second)
            throw InputError("detect: duplicate run index " + std::to_string(t.run_index));
        max_index = std::max(max_index, t.run_index);
        if (t.complete) {
            usable.push_back(&t);
        } else {
            incomplete += (incomplete.empty() ? "" : ",") + std::to_string(t.run_index);
            rep.warnings.push_back("run " + std::to_string(t.run_index) + " is incomplete and was excluded");
        }
    }
    const std::string cell = rep.algorithm + "/" + rep.problem + "/d" + std::to_string(rep.d);
    const std::size_t expected = cfg.expected_runs ? cfg.expected_runs : max_index + 1;
    std::string missing;
    for (std::size_t r = 0; r < expected; ++r)
        if (!present.count(r)) missing += (missing.empty() ? "" : ",") + std::to_string(r);
    if (!missing.empty()) throw InputError("detect: missing runs for " + cell + ": " + missing);
    if (!incomplete.empty() && !cfg.allow_incomplete)
        throw InputError("detect: incomplete runs for " + cell + ": " + incomplete);
    if (usable.empty()) throw InputError("detect: no complete runs");

    std::vector<RunTrace> complete_copy;  // spans need contiguous storage
    std::span<const RunTrace> runs = traces;
    if (usable.size() != traces.size()) {
        for (const auto* t : usable) complete_copy.push_back(*t);
        runs = complete_copy;
    }
    rep.runs = runs.size();

    std::vector<PointSet> samples;
    std::vector<double> log_ps;
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        auto rng = sampling_stream(cfg.master_seed, rep.algorithm, rep.problem, rep.d, r);
        samples.push_back(sample_one_per_run(runs, cfg.source, rng));
        const auto chi = chi2_uniformity(samples.back(), cfg.bins);
        log_ps.push_back(chi.log_p);
        rep.chi2_p_repetitions.push_back(chi.p);
    }
    rep.bias_rej = uniformity_battery(samples, cfg.alpha).bias_rej;
    const double log_merged = merge_log_pvalues(log_ps);
    rep.chi2_log10_p_merged = log_merged / std::numbers::ln10;
    rep.chi2_p_merged = std::max(std::exp(log_merged), std::numeric_limits<double>::denorm_min());

    auto insp = binsize_inspection(aggregate_coordinates(runs, cfg.source), cfg.bins);
    rep.histogram = std::move(insp.histogram);
    rep.quad = insp.quad;

    rep.cei.calibration = cfg.cei;
    for (const auto& t : runs) rep.cei.per_run.push_back(clark_evans(t.xl, cfg.cei));
    rep.cei.mean = stats::mean(rep.cei.per_run);

    rep.region = classify_region(rep.quad, cfg.tau);
    return rep;
}

}  // namespace sbmoo
