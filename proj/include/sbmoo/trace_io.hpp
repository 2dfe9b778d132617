#pragma once

// Line-delimited JSON trace files:
//   {"type":"header","problem":..,"algorithm":..,"d":..,"run":..,"seed":..,"budget":..,"pop":..}
//   {"type":"eval","i":0,"x":[...],"f":[g1,g2]}          x B
//   {"type":"final_population","X":[[...],...]}
//   {"type":"xp","X":[[...],...]}
// Doubles are written as the shortest decimal that round-trips. Incomplete
// runs carry "complete":false in the header and skip the size invariants.

#include <algorithm>
#include <charconv>
#include <cstring>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sbmoo/errors.hpp"
#include "sbmoo/harness.hpp"

namespace sbmoo {

namespace detail {

inline void append_double(std::string& out, double v) {
    if (v == 0.0) {
        out += '0';  // no signed zero on disk
        return;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline void append_vector(std::string& out, std::span<const double> v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        append_double(out, v[i]);
    }
    out += ']';
}

inline void append_pointset(std::string& out, const PointSet& ps) {
    out += '[';
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) out += ',';
        append_vector(out, ps[i]);
    }
    out += ']';
}

}  // namespace detail

inline std::string trace_header_line(const RunTrace& t) {
    nlohmann::ordered_json h;
    h["type"] = "header";
    h["problem"] = t.problem_id;
    h["algorithm"] = t.algorithm_id;
    h["d"] = t.d;
    h["run"] = t.run_index;
    h["seed"] = t.seed;
    h["budget"] = t.budget;
    h["pop"] = t.pop;
    if (!t.complete) h["complete"] = false;
    return h.dump();
}

inline std::string serialise_trace(const RunTrace& t) {
    std::string out = trace_header_line(t);
    out += '\n';
    out.reserve(t.archive.size() * (40 + 22 * t.d));
    for (std::size_t i = 0; i < t.archive.size(); ++i) {
        out += R"({"type":"eval","i":)";
        out += std::to_string(i);
        out += R"(,"x":)";
        detail::append_vector(out, t.archive.x(i));
        out += R"(,"f":[)";
        detail::append_double(out, t.archive.f(i).g1);
        out += ',';
        detail::append_double(out, t.archive.f(i).g2);
        out += "]}\n";
    }
    if (t.complete || !t.xl.empty()) {
        out += R"({"type":"final_population","X":)";
        detail::append_pointset(out, t.xl);
        out += "}\n";
    }
    out += R"({"type":"xp","X":)";
    detail::append_pointset(out, t.xp);
    out += "}\n";
    return out;
}

inline std::filesystem::path trace_path(const std::filesystem::path& root, const RunTrace& t) {
    return root / t.algorithm_id / (t.problem_id + "_d" + std::to_string(t.d) + "_run" + std::to_string(t.run_index) + ".jsonl");
}

/// Writes the trace under root/<algo>/<problem>_d<dim>_run<k>.jsonl.
inline std::filesystem::path write_trace(const std::filesystem::path& root, const RunTrace& t) {
    const auto path = trace_path(root, t);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const auto text = serialise_trace(t);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f) throw std::runtime_error("write failed for " + path.string());
    return path;
}

/// Thrown when a suite stops on an I/O failure; lists the runs already on disk.
struct SuiteIoError : std::runtime_error {
    SuiteIoError(const std::string& what, std::vector<RunKey> done)
        : std::runtime_error(what), completed(std::move(done)) {}
    std::vector<RunKey> completed;
};

/// run_suite writing one trace file per run.
inline SuiteResult run_suite_to_dir(const SuiteConfig& cfg, std::string_view algorithm,
                                    const std::filesystem::path& out_dir) {
    std::vector<RunKey> done;
    try {
        return run_suite(cfg, algorithm, [&](RunTrace&& t) {
            write_trace(out_dir, t);
            done.push_back({t.problem_id, t.d, t.run_index});
        });
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e)) throw;
        throw SuiteIoError(std::string("suite aborted after ") + std::to_string(done.size()) + " runs: " + e.what(),
                           std::move(done));
    }
}

namespace detail {

struct VecHash {
    std::size_t operator()(std::span<const double> v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (double x : v) {
            const double y = x == 0.0 ? 0.0 : x;
            std::uint64_t bits;
            std::memcpy(&bits, &y, sizeof bits);
            h = (h ^ bits) * 1099511628211ull;
        }
        return h;
    }
};

inline PointSet parse_pointset(const nlohmann::json& arr, std::size_t d, const std::string& file, std::size_t line) {
    if (!arr.is_array()) throw ParseError(file, line, "\"X\" must be an array");
    PointSet ps(d);
    std::vector<double> row;
    for (const auto& v : arr) {
        if (!v.is_array()) throw ParseError(file, line, "point must be an array");
        row.clear();
        for (const auto& c : v) {
            if (!c.is_number()) throw ParseError(file, line, "coordinate must be a number");
            row.push_back(c.get<double>());
        }
        if (row.size() != d) throw IntegrityError("dimension", "point of length " + std::to_string(row.size()) + " in " + file);
        ps.push_back(row);
    }
    return ps;
}

inline void require_unit_box(std::span<const double> x, const std::string& what) {
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0)) throw IntegrityError("bounds", what + " has a coordinate outside [0,1]");
}

}  // namespace detail

/// Re-checks every RunTrace invariant. Throws IntegrityError naming the first
/// violated one.
inline void validate_trace(const RunTrace& t) {
    if (t.d == 0) throw IntegrityError("dimension", "d must be >= 1");
    if (t.archive.dim() != t.d) throw IntegrityError("dimension", "archive dimension differs from header");
    for (std::size_t i = 0; i < t.archive.size(); ++i) detail::require_unit_box(t.archive.x(i), "eval " + std::to_string(i));
    if (!t.complete) return;

    if (t.archive.size() != t.budget)
        throw IntegrityError("budget", "|archive| = " + std::to_string(t.archive.size()) + " but budget = " +
                                           std::to_string(t.budget));
    if (t.xl.size() != t.pop)
        throw IntegrityError("population", "|X_L| = " + std::to_string(t.xl.size()) + " but pop = " + std::to_string(t.pop));

    const auto idx = nondominated_filter(t.archive.objectives());
    PointSet expect(t.d);
    for (std::size_t i : idx) expect.push_back(t.archive.x(i));
    if (t.xp.empty()) throw IntegrityError("xp_nonempty", "X_P is empty");
    if (!(expect == t.xp)) throw IntegrityError("xp_refilter", "stored X_P differs from the archive's non-dominated set");

    std::unordered_set<std::vector<double>, detail::VecHash> seen;
    // Only X_L membership needs a lookup; X_P matched the archive above.
    for (std::size_t i = 0; i < t.archive.size(); ++i) {
        auto x = t.archive.x(i);
        std::vector<double> v(x.begin(), x.end());
        for (double& c : v)
            if (c == 0.0) c = 0.0;
        seen.insert(std::move(v));
    }
    for (std::size_t i = 0; i < t.xl.size(); ++i) {
        auto x = t.xl[i];
        std::vector<double> v(x.begin(), x.end());
        for (double& c : v)
            if (c == 0.0) c = 0.0;
        if (!seen.count(v)) throw IntegrityError("xl_in_archive", "final population member " + std::to_string(i) + " was never evaluated");
    }
}

/// Parses one trace file and validates it.
inline RunTrace read_trace(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file);

    RunTrace t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false, have_final = false, have_xp = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(file, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
            throw ParseError(file, lineno, "record without a string \"type\"");
        const auto type = j["type"].get<std::string>();
        try {
            if (!have_header) {
                if (type != "header") throw ParseError(file, lineno, "first record must be the header");
                t.problem_id = j.at("problem").get<std::string>();
                t.algorithm_id = j.at("algorithm").get<std::string>();
                t.d = j.at("d").get<std::size_t>();
                t.run_index = j.at("run").get<std::size_t>();
                t.seed = j.at("seed").get<std::uint64_t>();
                t.budget = j.at("budget").get<std::size_t>();
                t.pop = j.at("pop").get<std::size_t>();
                t.complete = j.value("complete", true);
                if (t.d == 0) throw IntegrityError("dimension", "d must be >= 1");
                t.archive = Archive(t.d);
                t.archive.reserve(t.budget);
                have_header = true;
            } else if (type == "eval") {
                if (have_final) throw ParseError(file, lineno, "eval after final_population");
                const auto i = j.at("i").get<std::size_t>();
                if (i != t.archive.size())
                    throw IntegrityError("eval_index", "expected i = " + std::to_string(t.archive.size()) + " at line " +
                                                           std::to_string(lineno));
                const auto& xs = j.at("x");
                const auto& fs = j.at("f");
                if (!xs.is_array() || !fs.is_array() || fs.size() != 2) throw ParseError(file, lineno, "bad eval record");
                std::vector<double> x;
                x.reserve(xs.size());
                for (const auto& c : xs) x.push_back(c.get<double>());
                if (x.size() != t.d) throw IntegrityError("dimension", "eval at line " + std::to_string(lineno) + " has wrong length");
                t.archive.push_back(x, {fs[0].get<double>(), fs[1].get<double>()});
            } else if (type == "final_population") {
                t.xl = detail::parse_pointset(j.at("X"), t.d, file, lineno);
                have_final = true;
            } else if (type == "xp") {
                t.xp = detail::parse_pointset(j.at("X"), t.d, file, lineno);
                have_xp = true;
            } else {
                throw ParseError(file, lineno, "unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(file, lineno, std::string("bad field: ") + e.what());
        }
    }
    if (!have_header) throw ParseError(file, lineno, "missing header");
    if (t.complete && !have_final) throw IntegrityError("population", "complete trace lacks final_population");
    if (t.xl.dim() == 0) t.xl = PointSet(t.d);
    // X_P is derived data; recompute the indices (and the set itself if absent).
    {
        RunTrace probe;
        probe.d = t.d;
        probe.archive = t.archive;
        derive_xp(probe);
        t.xp_indices = probe.xp_indices;
        if (!have_xp) t.xp = probe.xp;
    }
    validate_trace(t);
    return t;
}

struct LoadFailure {
    std::filesystem::path path;
    std::string message;
};

struct LoadResult {
    std::vector<RunTrace> traces;
    std::vector<LoadFailure> failures;
};

/// Loads a single trace file or every *.jsonl below a directory (sorted by
/// path). Failures are collected per file instead of aborting the load.
/// With keep_archives = false each archive is dropped once validated.
inline LoadResult load_traces(const std::filesystem::path& path, bool keep_archives = true) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_regular_file(path)) {
        files.push_back(path);
    } else if (std::filesystem::is_directory(path)) {
        for (const auto& e : std::filesystem::recursive_directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        throw std::runtime_error("no trace file or directory at " + path.string());
    }
    LoadResult r;
    for (const auto& f : files) {
        try {
            r.traces.push_back(read_trace(f));
            if (!keep_archives) {
                r.traces.back().release_archive();
                r.traces.back().xp_indices.clear();
            }
        } catch (const std::exception& e) {
            r.failures.push_back({f, e.what()});
        }
    }
    return r;
}

}  // namespace sbmoo
