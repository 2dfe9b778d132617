// sbmoo: problems / run / detect / report / audit

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbmoo/sbmoo.hpp"

namespace fs = std::filesystem;
using namespace sbmoo;

namespace {

void log(const std::string& msg) { std::cerr << "sbmoo: " << msg << '\n'; }

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

const CLI::Validator kProblemId(
    [](std::string& s) -> std::string {
        try {
            (void)ProblemSpec::from_id(s, 1);
            return {};
        } catch (const std::exception& e) {
            return e.what();
        }
    },
    "PROBLEM", "problem id");

const CLI::Validator kAlgorithmId(
    [](std::string& s) -> std::string {
        for (auto id : algorithm_ids())
            if (id == s) return {};
        std::string known;
        for (auto id : algorithm_ids()) known += (known.empty() ? "" : ", ") + std::string(id);
        return "unknown algorithm '" + s + "' (known: " + known + ")";
    },
    "ALGORITHM", "algorithm id");

struct ProblemsOpts {
    std::string problem;
    std::size_t d = 2;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    bool characterise = false;
    std::size_t reps = 50;
    std::vector<std::size_t> sizes{1000, 10000, 100000};
    bool plot = false;
    std::size_t plot_points = 2000;
    std::string out = ".";
};

int cmd_problems(const ProblemsOpts& o) {
    const auto spec = ProblemSpec::from_id(o.problem, o.d);
    if (o.n < 2) throw ConfigError("-n must be >= 2");
    std::ostringstream s;
    if (o.characterise) {
        const auto count = pf_count_stats(spec, o.n, o.reps, o.seed);
        const auto rho = rho_stats(spec, o.n, o.reps, o.seed);
        s << "problem," << o.problem << "\nn," << o.n << "\nreps," << o.reps << "\npf_count_mean," << g17(count.mean)
          << "\npf_count_sd," << g17(count.sd) << "\nrho_mean," << g17(rho.mean) << "\nrho_sd," << g17(rho.sd)
          << "\n\nn,pf_count_mean,pf_count_sd,proportion\n";
        const auto table = proportion_scaling(spec, o.sizes, o.reps, o.seed);
        for (const auto& r : table.rows)
            s << r.n << ',' << g17(r.count.mean) << ',' << g17(r.count.sd) << ',' << g17(r.proportion) << '\n';
        s << "loglog_slope," << g17(table.loglog_slope) << '\n';
    }
    RngStream rng(SeedHasher(o.seed).add("problems").add(o.problem).add(o.n).value(), 0);
    const auto samples = sample_objectives(spec, o.n, rng);
    if (!o.characterise) {
        s << "g1,g2\n";
        for (const auto& p : samples) s << g17(p.g1) << ',' << g17(p.g2) << '\n';
    }
    std::cout << s.str();
    if (o.plot) {
        const std::size_t m = std::min(o.plot_points, samples.size());
        const std::span<const ObjectivePair> shown(samples.data(), m);
        const auto path = fs::path(o.out) / ("front_" + o.problem + ".svg");
        write_file(path, render_front_scatter(shown, reference_front(spec, 200), o.problem));
        log("wrote " + path.string());
    }
    return 0;
}

struct RunOpts {
    std::string algorithm;
    std::vector<std::string> problems{all_problem_ids().begin(), all_problem_ids().end()};
    std::vector<std::size_t> dims{2, 10};
    std::size_t runs = 100;
    OptimiserConfig opt;
    std::string bound = "saturate";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out = "sbmoo_out";
};

int cmd_run(RunOpts o) {
    SuiteConfig cfg;
    cfg.problems = o.problems;
    cfg.dims = o.dims;
    cfg.n_r = o.runs;
    cfg.optimiser = o.opt;
    cfg.optimiser.bound_handler = parse_bound_handler(o.bound);
    cfg.master_seed = o.seed;
    cfg.threads = o.threads;
    log("running " + o.algorithm + ": " + std::to_string(cfg.problems.size() * cfg.dims.size() * cfg.n_r) +
        " runs of " + std::to_string(cfg.optimiser.budget()) + " evaluations into " + o.out);
    const auto res = run_suite_to_dir(cfg, o.algorithm, o.out);
    for (const auto& f : res.failures)
        log("run " + f.key.problem + "/d" + std::to_string(f.key.d) + "/run" + std::to_string(f.key.run) +
            " failed: " + f.message);
    log("wrote " + std::to_string(res.completed.size()) + " traces");
    return res.failures.empty() ? 0 : 1;
}

struct DetectOpts {
    std::string traces;
    std::string out = "sbmoo_out";
    std::string source = "xp";
    DetectionConfig cfg;
    std::string cei = "mc";
};

int cmd_detect(DetectOpts o) {
    o.cfg.source = parse_point_source(o.source);
    if (o.cei == "mc") o.cfg.cei.method = CeiMethod::MonteCarlo;
    else if (o.cei == "analytic") o.cfg.cei.method = CeiMethod::Analytic;
    else throw ConfigError("--cei must be mc or analytic");

    auto loaded = load_traces(o.traces, false);
    for (const auto& f : loaded.failures) log("cannot load " + f.path.string() + ": " + f.message);
    if (!loaded.failures.empty()) {
        log(std::to_string(loaded.failures.size()) + " trace files failed to load");
        return 1;
    }
    if (loaded.traces.empty()) throw InputError("no traces found under " + o.traces);

    std::vector<DetectionReport> reports;
    for (auto& [key, traces] : group_by_cell(std::move(loaded.traces))) {
        auto r = detect(traces, o.cfg);
        for (const auto& w : r.warnings) log(key.algorithm + "/" + key.problem + "/d" + std::to_string(key.d) + ": " + w);
        reports.push_back(std::move(r));
    }

    const fs::path out(o.out);
    write_file(out / "report.csv", render_table(reports, TableFormat::Csv));
    write_file(out / "report.md", render_table(reports, TableFormat::Markdown));
    write_file(out / "report.html", render_table(reports, TableFormat::Html));
    std::vector<ReportRow> rows;
    for (const auto& r : reports) {
        rows.push_back(row_of(r));
        const auto title = r.algorithm + " " + r.problem + " d=" + std::to_string(r.d);
        write_file(out / r.algorithm / ("hist_" + r.problem + "_d" + std::to_string(r.d) + ".svg"),
                   render_histogram(r.histogram, r.quad, title));
    }
    write_file(out / "regions.svg", render_region_scatter(rows, o.cfg.tau));
    log("wrote " + std::to_string(reports.size()) + " rows to " + (out / "report.csv").string());
    return 0;
}

struct ReportOpts {
    std::string csv;
    std::string format = "md";
    std::string out;
    std::string regions;
    double tau = 0.5;
};

int cmd_report(const ReportOpts& o) {
    const auto fmt = parse_table_format(o.format);
    std::ifstream in(o.csv, std::ios::binary);
    if (!in) throw InputError("cannot open " + o.csv);
    const auto rows = parse_report_csv(in);
    const auto text = render_table(rows, fmt);
    if (o.out.empty()) std::cout << text;
    else write_file(o.out, text);
    if (!o.regions.empty()) write_file(o.regions, render_region_scatter(rows, o.tau));
    return 0;
}

struct AuditOpts {
    std::string command;
    AuditConfig cfg;
    std::size_t runs = 1;
    std::string out = "sbmoo_out";
};

int cmd_audit(AuditOpts o) {
    int status = 0;
    const std::size_t first = o.cfg.run_index;
    for (std::size_t r = first; r < first + o.runs; ++r) {
        auto cfg = o.cfg;
        cfg.run_index = r;
        auto res = run_audit(o.command, cfg);
        const auto path = write_trace(o.out, res.trace);
        const std::string tag = "run " + std::to_string(r) + ": ";
        if (!res.protocol_ok) {
            log(tag + res.diagnostic);
            status = 1;
        } else if (!res.trace.complete) {
            log(tag + "incomplete trace after " + std::to_string(res.trace.archive.size()) + " evaluations" +
                (res.diagnostic.empty() ? "" : " (" + res.diagnostic + ")"));
            status = 1;
        } else if (!res.diagnostic.empty()) {
            log(tag + res.diagnostic);
        }
        log(tag + "wrote " + path.string());
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural-bias detection on uninformative bi-objective problems"};
    app.name("sbmoo");
    app.set_config("--config", "", "key = value file holding flag values; command-line flags win");
    app.require_subcommand(1, 1);
    app.failure_message(CLI::FailureMessage::help);
    const std::string out_help = "output directory (default $SBMOO_OUT_DIR, else sbmoo_out)";

    ProblemsOpts po;
    auto* problems = app.add_subcommand("problems", "sample a test problem or characterise its front");
    problems->add_option("problem", po.problem, "problem id (f1, f2a..f4g, f5)")->required()->check(kProblemId);
    problems->add_option("-d,--dim", po.d, "decision dimension")->capture_default_str();
    problems->add_option("-n", po.n, "evaluations per sample")->capture_default_str();
    problems->add_option("--seed", po.seed, "master seed")->capture_default_str();
    problems->add_flag("--characterise", po.characterise, "print |PF| count, Pearson rho and the scaling table");
    problems->add_option("--reps", po.reps, "repetitions for --characterise")->capture_default_str()->check(CLI::PositiveNumber);
    problems->add_option("--sizes", po.sizes, "sample sizes of the scaling table")->delimiter(',')->capture_default_str();
    problems->add_flag("--plot", po.plot, "write front_<problem>.svg");
    problems->add_option("--plot-points", po.plot_points, "samples drawn in the plot")->capture_default_str();
    problems->add_option("--out", po.out, "directory for --plot")->capture_default_str();

    RunOpts ro;
    auto* run = app.add_subcommand("run", "run an optimiser over the problem suite and write traces");
    run->add_option("algorithm", ro.algorithm, "random, nsga2, moead, toy-bound or toy-centre")->required()->check(kAlgorithmId);
    run->add_option("-p,--problems", ro.problems, "problem ids")->delimiter(',')->check(kProblemId)->capture_default_str();
    run->add_option("-d,--dims", ro.dims, "decision dimensions")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--runs", ro.runs, "runs per (problem, dim)")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--pop", ro.opt.population_size, "population size")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--iters", ro.opt.iterations, "generations, initial population included")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--bound", ro.bound, "bound handler")->check(CLI::IsMember({"saturate", "toroidal", "mirror", "resample"}))->capture_default_str();
    run->add_option("--eta-c", ro.opt.eta_c, "SBX distribution index")->capture_default_str();
    run->add_option("--eta-m", ro.opt.eta_m, "mutation distribution index")->capture_default_str();
    run->add_option("--pc", ro.opt.p_c, "crossover probability")->capture_default_str();
    run->add_option("--pm", ro.opt.p_m, "per-coordinate mutation probability (0 selects 1/d)")->capture_default_str();
    run->add_option("--neighbourhood", ro.opt.neighbourhood, "MOEA/D neighbourhood size")->capture_default_str();
    run->add_option("--seed", ro.seed, "master seed")->capture_default_str();
    run->add_option("--threads", ro.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--out", ro.out, out_help)->envname("SBMOO_OUT_DIR");

    DetectOpts dopt;
    auto* det = app.add_subcommand("detect", "analyse traces and write reports and plots");
    det->add_option("traces", dopt.traces, "trace file or directory")->required()->check(CLI::ExistingPath);
    det->add_option("--out", dopt.out, out_help)->envname("SBMOO_OUT_DIR");
    det->add_option("--source", dopt.source, "point set analysed")->check(CLI::IsMember({"xp", "xl"}))->capture_default_str();
    det->add_option("--bins", dopt.cfg.bins, "histogram bins (even)")->capture_default_str();
    det->add_option("--alpha", dopt.cfg.alpha, "battery significance level")->capture_default_str();
    det->add_option("--reps", dopt.cfg.repetitions, "sampling repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    det->add_option("--tau", dopt.cfg.tau, "region tolerance")->capture_default_str();
    det->add_option("--cei", dopt.cei, "CEI calibration")->check(CLI::IsMember({"mc", "analytic"}))->capture_default_str();
    det->add_option("--cei-reps", dopt.cfg.cei.replicates, "Monte Carlo replicates for CEI")->check(CLI::PositiveNumber)->capture_default_str();
    det->add_option("--seed", dopt.cfg.master_seed, "master seed for sampling")->capture_default_str();
    det->add_option("--runs", dopt.cfg.expected_runs, "expected runs per cell (0 infers)")->capture_default_str();
    det->add_flag("--allow-incomplete", dopt.cfg.allow_incomplete, "drop incomplete runs with a warning");

    ReportOpts rep;
    auto* report = app.add_subcommand("report", "re-render a report.csv");
    report->add_option("csv", rep.csv, "report.csv written by detect")->required()->check(CLI::ExistingFile);
    report->add_option("--format", rep.format, "output table format")->check(CLI::IsMember({"csv", "md", "html"}))->capture_default_str();
    report->add_option("--out", rep.out, "output file (default stdout)");
    report->add_option("--regions", rep.regions, "also write the region scatter SVG here");
    report->add_option("--tau", rep.tau, "region tolerance for --regions")->capture_default_str();

    AuditOpts ao;
    auto* audit = app.add_subcommand("audit", "evaluate an external optimiser over the wire protocol");
    audit->add_option("command", ao.command, "shell command launching the optimiser")->required();
    audit->add_option("-p,--problem", ao.cfg.problem, "problem id")->check(kProblemId)->capture_default_str();
    audit->add_option("-d,--dim", ao.cfg.d, "decision dimension")->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_option("--budget", ao.cfg.budget, "evaluation budget")->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_option("--pop", ao.cfg.pop, "final population size")->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_option("--runs", ao.runs, "independent sessions")->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_option("--first-run", ao.cfg.run_index, "run index of the first session")->capture_default_str();
    audit->add_option("--seed", ao.cfg.master_seed, "master seed")->capture_default_str();
    audit->add_option("--name", ao.cfg.algorithm, "algorithm id recorded in the traces")->capture_default_str();
    audit->add_option("--max-refusals", ao.cfg.max_refusals, "eval requests tolerated after budget_exhausted")->capture_default_str();
    audit->add_option("--out", ao.out, out_help)->envname("SBMOO_OUT_DIR");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*problems) return cmd_problems(po);
        if (*run) return cmd_run(ro);
        if (*det) return cmd_detect(dopt);
        if (*report) return cmd_report(rep);
        if (*audit) return cmd_audit(ao);
    } catch (const ConfigError& e) {
        log(std::string("usage error: ") + e.what());
        return 2;
    } catch (const std::exception& e) {
        log(std::string("error: ") + e.what());
        return 1;
    }
    return 2;
}
