#pragma once

#include "gridsim/model.hpp"
#include "gridsim/params.hpp"
#include "gridsim/scenarios.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gridsim {

enum class JobStatus { Done, Failed };

struct JobRecord {
    JobId job_id = 0;
    SiteId site;
    Scenario scenario = Scenario::Preplaced;
    double cpu_seconds = 0;
    double base_efficiency = 0;
    double realized_efficiency = 0;   // cpu_seconds / wall_clock
    double wall_clock = 0;
    double stage_in_wait = 0;
    JobStatus status = JobStatus::Done;
    std::string diagnostic;
};

struct QueueSample {
    double clock = 0;
    SiteId site;
    std::int64_t queued = 0;
    std::int64_t running = 0;
    std::int64_t done = 0;
};

struct LinkSample {
    double clock = 0;
    SiteId src;
    SiteId dst;
    double bytes = 0;
};

struct MetricsLog {
    Scenario scenario = Scenario::Preplaced;
    SweepConfig sweep;
    double slice_seconds = 100;
    std::int64_t total_jobs = 0;
    // Slices simulated; queue samples exist for clock 0 and after each slice.
    std::size_t slices = 0;

    std::vector<QueueSample> queues;
    std::vector<LinkSample> links;
    std::vector<JobRecord> jobs;

    // Engine-side byte ledger per link: every finished attempt contributes
    // the full file size, a cancelled attempt its partial bytes.
    std::map<LinkKey, double> attempted_bytes;
};

// Appends one QueueSample per site (in `counts` order) and one LinkSample
// per link with nonzero traffic.
void record_slice(MetricsLog& log, double clock, const std::vector<QueueSample>& counts,
                  const std::map<LinkKey, double>& link_bytes);

struct SummaryReport {
    Scenario scenario = Scenario::Preplaced;
    SweepConfig sweep;
    double total_wall = 0;          // seconds, done jobs only
    double mean_efficiency = 0;     // over done jobs
    std::int64_t done_jobs = 0;
    std::int64_t failed_jobs = 0;
    std::map<SiteId, double> per_site_wall;
    // Realized efficiency in 0.01-wide bins over [0, 1].
    std::array<std::int64_t, 100> efficiency_histogram{};

    double total_wall_billions() const { return total_wall / 1e9; }
};

// Sums in job-id order so the totals do not depend on completion order.
SummaryReport summarize(const std::vector<JobRecord>& records, Scenario scenario = Scenario::Preplaced,
                        const SweepConfig& sweep = {});
SummaryReport summarize(const MetricsLog& log);

// Per-link byte totals from links.csv-style samples.
std::map<LinkKey, double> link_totals(const MetricsLog& log);

// jobs.csv, queues.csv, links.csv, summary.csv
void write_outputs(const MetricsLog& log, const std::filesystem::path& directory);

// Formatting shared by every CSV writer: integral values bare, other
// quantities in shortest round-trip form, fractions to 6 significant digits.
std::string format_quantity(double v);
std::string format_fraction(double v);

} // namespace gridsim
