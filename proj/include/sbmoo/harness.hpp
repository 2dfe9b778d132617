#pragma once

// Experiment orchestration: one seeded run per (problem, dim, run index),
// whole-run evaluation archive, X_P / X_L extraction.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "sbmoo/errors.hpp"
#include "sbmoo/optimisers.hpp"
#include "sbmoo/pareto.hpp"
#include "sbmoo/points.hpp"
#include "sbmoo/problems.hpp"
#include "sbmoo/rng.hpp"

namespace sbmoo {

/// Every evaluation of a run, in order.
class Archive {
public:
    Archive() = default;
    explicit Archive(std::size_t d) : d_(d) {}

    void reserve(std::size_t n) {
        xs_.reserve(n * d_);
        fs_.reserve(n);
    }
    void push_back(std::span<const double> x, ObjectivePair f) {
        if (x.size() != d_) throw InputError("archive: dimension mismatch");
        xs_.insert(xs_.end(), x.begin(), x.end());
        fs_.push_back(f);
    }

    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return fs_.size(); }
    bool empty() const noexcept { return fs_.empty(); }
    std::span<const double> x(std::size_t i) const { return {xs_.data() + i * d_, d_}; }
    const ObjectivePair& f(std::size_t i) const { return fs_[i]; }
    std::span<const ObjectivePair> objectives() const noexcept { return fs_; }

    void clear() noexcept {
        xs_.clear();
        xs_.shrink_to_fit();
        fs_.clear();
        fs_.shrink_to_fit();
    }

    friend bool operator==(const Archive&, const Archive&) = default;

private:
    std::size_t d_ = 0;
    std::vector<double> xs_;
    std::vector<ObjectivePair> fs_;
};

/// Evaluates a problem under a hard budget and records everything.
class BudgetedEvaluator {
public:
    BudgetedEvaluator(ProblemSpec spec, std::size_t budget, RngStream rng)
        : spec_(spec), budget_(budget), rng_(rng), archive_(spec.d()) {
        archive_.reserve(budget);
    }

    ObjectivePair operator()(std::span<const double> x) {
        if (archive_.size() >= budget_) throw BudgetExhausted("evaluation budget of " + std::to_string(budget_) + " exhausted");
        const auto f = evaluate(spec_, x, rng_);
        archive_.push_back(x, f);
        return f;
    }

    std::size_t used() const noexcept { return archive_.size(); }
    std::size_t remaining() const noexcept { return budget_ - archive_.size(); }
    std::size_t budget() const noexcept { return budget_; }
    const ProblemSpec& spec() const noexcept { return spec_; }
    const Archive& archive() const noexcept { return archive_; }
    Archive take_archive() noexcept { return std::move(archive_); }

private:
    ProblemSpec spec_;
    std::size_t budget_;
    RngStream rng_;
    Archive archive_;
};

struct RunTrace {
    std::string problem_id;
    std::string algorithm_id;
    std::size_t d = 0;
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::size_t pop = 0;
    bool complete = true;
    Archive archive;
    std::vector<std::size_t> xp_indices;  // archive positions of X_P, ascending
    PointSet xp;
    PointSet xl;

    /// Frees the archive once X_P / X_L are extracted (detection needs only those).
    void release_archive() noexcept { archive.clear(); }

    friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// X_P from the archive's non-dominated subset.
inline void derive_xp(RunTrace& t) {
    t.xp = PointSet(t.d);
    t.xp_indices.clear();
    if (t.archive.empty()) return;
    t.xp_indices = nondominated_filter(t.archive.objectives());
    t.xp.reserve(t.xp_indices.size());
    for (std::size_t i : t.xp_indices) t.xp.push_back(t.archive.x(i));
}

/// One complete seeded run.
inline RunTrace run_single(std::string_view problem_id, std::string_view algorithm_id, std::size_t d,
                           std::size_t run_index, std::uint64_t master_seed, const OptimiserConfig& cfg) {
    const auto spec = ProblemSpec::from_id(problem_id, d);
    RunTrace t;
    t.problem_id = std::string(problem_id);
    t.algorithm_id = std::string(algorithm_id);
    t.d = d;
    t.run_index = run_index;
    t.seed = run_seed(master_seed, problem_id, d, run_index);
    t.budget = cfg.budget();
    t.pop = cfg.population_size;

    BudgetedEvaluator eval(spec, t.budget, RngStream(t.seed, streams::kObjectives));
    RngStream rng(t.seed, streams::kOptimiser);
    auto opt = make_optimiser(algorithm_id, cfg, d);
    std::visit(
        [&](auto& o) {
            run_optimiser(o, eval, rng, cfg.iterations);
            t.xl = decision_vectors(o.population());
        },
        opt);
    t.archive = eval.take_archive();
    derive_xp(t);
    return t;
}

struct SuiteConfig {
    std::vector<std::string> problems{all_problem_ids().begin(), all_problem_ids().end()};
    std::vector<std::size_t> dims{2, 10};
    std::size_t n_r = 100;
    OptimiserConfig optimiser;
    std::uint64_t master_seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (n_r < 1) throw ConfigError("n_r must be >= 1");
        if (problems.empty()) throw ConfigError("suite needs at least one problem");
        if (dims.empty()) throw ConfigError("suite needs at least one dimension");
        for (const auto& p : problems) (void)ProblemSpec::from_id(p, 1);
        for (auto d : dims)
            if (d == 0) throw ConfigError("dimension must be >= 1");
    }
};

struct RunKey {
    std::string problem;
    std::size_t d;
    std::size_t run;
};

struct RunFailure {
    RunKey key;
    std::string message;
};

struct SuiteResult {
    std::vector<RunKey> completed;
    std::vector<RunFailure> failures;
};

/// Runs every (problem, dim, run) cell and hands each trace to `sink` in
/// task order (problem-major, then dim, then run index). Runs may execute on
/// several threads; the sequence handed to `sink` never depends on that.
/// Budget overruns abort only the offending run and are recorded.
inline SuiteResult run_suite(const SuiteConfig& cfg, std::string_view algorithm,
                             const std::function<void(RunTrace&&)>& sink) {
    cfg.validate();
    (void)make_optimiser(algorithm, cfg.optimiser, 1);

    std::vector<RunKey> tasks;
    for (const auto& p : cfg.problems)
        for (auto d : cfg.dims)
            for (std::size_t r = 0; r < cfg.n_r; ++r) tasks.push_back({p, d, r});

    SuiteResult result;
    auto execute = [&](const RunKey& k, std::string& err) -> std::optional<RunTrace> {
        try {
            return run_single(k.problem, algorithm, k.d, k.run, cfg.master_seed, cfg.optimiser);
        } catch (const BudgetExhausted& e) {
            err = e.what();
            return std::nullopt;
        }
    };
    auto deliver = [&](const RunKey& k, std::optional<RunTrace>& t, const std::string& err) {
        if (!t) {
            result.failures.push_back({k, err});
            return;
        }
        sink(std::move(*t));
        result.completed.push_back(k);
    };

    const unsigned threads = std::max(1u, cfg.threads);
    if (threads == 1) {
        for (const auto& k : tasks) {
            std::string err;
            auto t = execute(k, err);
            deliver(k, t, err);
        }
        return result;
    }

    // Bounded reorder window: workers fill slots, the caller drains in order.
    std::vector<std::optional<RunTrace>> slots(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::vector<char> ready(tasks.size(), 0);
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    std::size_t drained = 0;
    const std::size_t window = threads * 4;
    std::exception_ptr worker_error;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            {
                std::unique_lock lk(mu);
                cv.wait(lk, [&] { return i < drained + window || worker_error; });
                if (worker_error) return;
            }
            try {
                std::string err;
                auto t = execute(tasks[i], err);
                std::lock_guard lk(mu);
                slots[i] = std::move(t);
                errors[i] = std::move(err);
                ready[i] = 1;
            } catch (...) {
                std::lock_guard lk(mu);
                if (!worker_error) worker_error = std::current_exception();
            }
            cv.notify_all();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    try {
        while (drained < tasks.size()) {
            std::optional<RunTrace> t;
            std::string err;
            {
                std::unique_lock lk(mu);
                cv.wait(lk, [&] { return ready[drained] || worker_error; });
                if (worker_error) break;
                t = std::move(slots[drained]);
                err = std::move(errors[drained]);
            }
            deliver(tasks[drained], t, err);
            {
                std::lock_guard lk(mu);
                ++drained;
            }
            cv.notify_all();
        }
    } catch (...) {
        {
            std::lock_guard lk(mu);
            if (!worker_error) worker_error = std::current_exception();
        }
        cv.notify_all();
    }
    for (auto& th : pool) th.join();
    if (worker_error) std::rethrow_exception(worker_error);
    return result;
}

enum class PointSource { XP, XL };

inline PointSource parse_point_source(std::string_view s) {
    if (s == "xp" || s == "X_P") return PointSource::XP;
    if (s == "xl" || s == "X_L") return PointSource::XL;
    throw ConfigError("unknown point source '" + std::string(s) + "' (expected xp or xl)");
}

inline const PointSet& points_of(const RunTrace& t, PointSource src) { return src == PointSource::XP ? t.xp : t.xl; }

/// One uniformly chosen member of each run's X_P (or X_L), in run order.
template <RandomSource Rng>
PointSet sample_one_per_run(std::span<const RunTrace> traces, PointSource src, Rng& rng) {
    std::vector<const RunTrace*> order;
    for (const auto& t : traces) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(),
                     [](const RunTrace* a, const RunTrace* b) { return a->run_index < b->run_index; });
    PointSet out;
    for (const RunTrace* t : order) {
        const auto& set = points_of(*t, src);
        if (set.empty())
            throw InputError("run " + std::to_string(t->run_index) + " has an empty " +
                             (src == PointSource::XP ? "X_P" : "X_L"));
        out.push_back(set[rng.below(set.size())]);
    }
    return out;
}

/// Stream for sampling repetition `rep` of one detection cell.
inline RngStream sampling_stream(std::uint64_t master_seed, std::string_view algorithm, std::string_view problem,
                                 std::size_t d, std::size_t rep) {
    return RngStream(SeedHasher(master_seed).add("sampling").add(algorithm).add(problem).add(d).value(), rep);
}

struct CellKey {
    std::string algorithm;
    std::string problem;
    std::size_t d = 0;
    auto operator<=>(const CellKey&) const = default;
};

inline std::map<CellKey, std::vector<RunTrace>> group_by_cell(std::vector<RunTrace> traces) {
    std::map<CellKey, std::vector<RunTrace>> cells;
    for (auto& t : traces) {
        CellKey k{t.algorithm_id, t.problem_id, t.d};
        cells[k].push_back(std::move(t));
    }
    for (auto& [k, v] : cells)
        std::stable_sort(v.begin(), v.end(), [](const RunTrace& a, const RunTrace& b) { return a.run_index < b.run_index; });
    return cells;
}

}  // namespace sbmoo
