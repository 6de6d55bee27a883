#include "gridsim/cli.hpp"

#include "gridsim/engine.hpp"
#include "gridsim/errors.hpp"
#include "gridsim/ingest.hpp"
#include "gridsim/metrics.hpp"
#include "text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace gridsim {

namespace {

struct Options {
    std::string sites, links, catalog, trace, histogram, params;
    std::string scenario = "all";
    double cpu_hit_factor = 1.0;
    double speed_factor = 1.0;
    bool sweep = false;
    std::uint64_t seed = 1;
    double slice_seconds = 100.0;
    std::string tier1 = "FNAL";
    std::string out = "gridsim-out";
    std::string duplicate = "on";
};

struct Cell {
    Scenario scenario;
    SweepConfig sweep;
    std::filesystem::path dir;
    SummaryReport summary;
    std::string error;
};

std::string factor_label(double f)
{
    return format_fraction(f);
}

std::string cell_dir_name(Scenario s, const SweepConfig& c)
{
    return std::string(to_string(s)) + "_cpu" + factor_label(c.cpu_hit_factor) + "_speed" +
           factor_label(c.max_speed_factor);
}

unsigned worker_count(std::size_t cells)
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRIDSIM_THREADS")) {
        if (auto v = text::to_int(env); v && *v > 0)
            n = static_cast<unsigned>(*v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, cells));
}

void print_grid(std::ostream& out, const std::vector<Cell>& cells, const std::vector<Scenario>& scenarios)
{
    char buf[128];
    out << "total wall clock (s)\n";
    std::snprintf(buf, sizeof buf, "%-10s %-6s", "scenario", "speed");
    out << buf;
    for (double c : kSweepFactors) {
        std::snprintf(buf, sizeof buf, " %14s", ("cpu " + factor_label(c)).c_str());
        out << buf;
    }
    out << '\n';
    for (Scenario s : scenarios) {
        for (double speed : kSweepFactors) {
            std::snprintf(buf, sizeof buf, "%-10s %-6s", std::string(to_string(s)).c_str(), factor_label(speed).c_str());
            out << buf;
            for (double cpu : kSweepFactors) {
                auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
                    return c.scenario == s && c.sweep.cpu_hit_factor == cpu && c.sweep.max_speed_factor == speed;
                });
                std::snprintf(buf, sizeof buf, " %14.6g", it->summary.total_wall);
                out << buf;
            }
            out << '\n';
        }
    }
}

void write_sweep_summary(const std::filesystem::path& path, const std::vector<Cell>& cells)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "scenario,cpu_hit_factor,speed_factor,seed,total_wall_s,mean_eff,failed_jobs\n";
    for (const auto& c : cells)
        out << to_string(c.scenario) << ',' << format_fraction(c.sweep.cpu_hit_factor) << ','
            << format_fraction(c.sweep.max_speed_factor) << ',' << c.sweep.rng_seed << ','
            << format_quantity(c.summary.total_wall) << ',' << format_fraction(c.summary.mean_efficiency) << ','
            << c.summary.failed_jobs << '\n';
}

int execute(const Options& opt, std::ostream& out, std::ostream& err)
{
    FixtureData fixtures = load_fixtures({opt.sites, opt.links, opt.catalog, opt.trace});
    EfficiencyHistogram hist = opt.histogram.empty() ? default_histogram() : load_histogram(text::read_file(opt.histogram));
    ParamTables tables;
    if (!opt.params.empty())
        tables = apply_overrides(tables, text::read_file(opt.params));

    std::vector<Scenario> scenarios;
    if (opt.scenario == "all")
        scenarios = {Scenario::Preplaced, Scenario::Copy, Scenario::Remote};
    else
        scenarios = {*parse_scenario(opt.scenario)};

    const bool duplicate = opt.duplicate == "on";
    const SiteId tier1{opt.tier1};
    // Validate once up front so every violation is reported before any run.
    for (Scenario s : scenarios)
        assemble_state(fixtures, {s, tier1, duplicate});

    const std::filesystem::path root(opt.out);
    std::vector<Cell> cells;
    for (Scenario s : scenarios) {
        if (opt.sweep) {
            for (double speed : kSweepFactors)
                for (double cpu : kSweepFactors)
                    cells.push_back({s, {cpu, speed, opt.seed}, {}, {}, {}});
        } else {
            cells.push_back({s, {opt.cpu_hit_factor, opt.speed_factor, opt.seed}, {}, {}, {}});
        }
    }
    const bool nested = cells.size() > 1;
    for (auto& c : cells)
        c.dir = nested ? root / (opt.sweep ? cell_dir_name(c.scenario, c.sweep) : std::string(to_string(c.scenario)))
                       : root;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cells.size();) {
            Cell& c = cells[i];
            try {
                EngineConfig cfg;
                cfg.slice_seconds = opt.slice_seconds;
                cfg.sweep = c.sweep;
                cfg.tier1 = tier1;
                const MetricsLog log = run_scenario(fixtures, c.scenario, tables, hist, cfg, duplicate);
                write_outputs(log, c.dir);
                c.summary = summarize(log);
            } catch (const std::exception& e) {
                c.error = e.what();
            }
        }
    };
    const unsigned threads = worker_count(cells.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    int status = 0;
    for (const auto& c : cells) {
        if (!c.error.empty()) {
            err << "error: " << to_string(c.scenario) << " (cpu " << factor_label(c.sweep.cpu_hit_factor) << ", speed "
                << factor_label(c.sweep.max_speed_factor) << "): " << c.error << '\n';
            status = 1;
        }
    }
    if (status != 0)
        return status;

    if (opt.sweep) {
        write_sweep_summary(root / "sweep_summary.csv", cells);
        print_grid(out, cells, scenarios);
    } else {
        for (const auto& c : cells)
            out << to_string(c.scenario) << ": total wall " << format_quantity(c.summary.total_wall) << " s, mean eff "
                << format_fraction(c.summary.mean_efficiency) << ", failed " << c.summary.failed_jobs << '\n';
    }
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options opt;
    CLI::App app{"Time-sliced grid simulator comparing data placement scenarios", "gridsim"};
    app.add_option("--sites", opt.sites, "sites.csv")->required();
    app.add_option("--links", opt.links, "links.csv")->required();
    app.add_option("--catalog", opt.catalog, "catalog.csv")->required();
    app.add_option("--trace", opt.trace, "trace.csv")->required();
    app.add_option("--histogram", opt.histogram, "efficiency histogram (built-in default if omitted)");
    app.add_option("--params", opt.params, "key=value overrides for the penalty and speed tables");
    app.add_option("--scenario", opt.scenario, "preplaced, copy, remote or all")
        ->check(CLI::IsMember({"preplaced", "copy", "remote", "all"}))
        ->capture_default_str();
    app.add_option("--cpu-hit-factor", opt.cpu_hit_factor, "penalty table multiplier")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--speed-factor", opt.speed_factor, "max transfer speed multiplier")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--sweep", opt.sweep, "run the 3x3 factor grid");
    app.add_option("--seed", opt.seed, "random seed")->capture_default_str();
    app.add_option("--slice-seconds", opt.slice_seconds, "time slice length")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--tier1", opt.tier1, "tier-1 site name")->capture_default_str();
    app.add_option("--out", opt.out, "output directory")->capture_default_str();
    app.add_option("--duplicate-trace", opt.duplicate, "double the trace onto other sites")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        return execute(opt, out, err);
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations())
            err << "invalid: " << v << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace gridsim
