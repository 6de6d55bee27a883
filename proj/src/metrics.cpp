#include "gridsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace gridsim {

std::string format_quantity(double v)
{
    if (v == std::floor(v) && std::abs(v) < 9e15) {
        char buf[32];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
        return std::string(buf, p);
    }
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string format_fraction(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void record_slice(MetricsLog& log, double clock, const std::vector<QueueSample>& counts,
                  const std::map<LinkKey, double>& link_bytes)
{
    for (auto sample : counts) {
        sample.clock = clock;
        log.queues.push_back(std::move(sample));
    }
    for (const auto& [key, bytes] : link_bytes)
        if (bytes > 0)
            log.links.push_back({clock, key.first, key.second, bytes});
}

SummaryReport summarize(const std::vector<JobRecord>& records, Scenario scenario, const SweepConfig& sweep)
{
    SummaryReport r;
    r.scenario = scenario;
    r.sweep = sweep;

    std::vector<const JobRecord*> order;
    order.reserve(records.size());
    for (const auto& rec : records)
        order.push_back(&rec);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->job_id < b->job_id; });

    double eff_sum = 0;
    for (const JobRecord* rec : order) {
        if (rec->status == JobStatus::Failed) {
            ++r.failed_jobs;
            continue;
        }
        ++r.done_jobs;
        r.total_wall += rec->wall_clock;
        r.per_site_wall[rec->site] += rec->wall_clock;
        eff_sum += rec->realized_efficiency;
        auto bin = static_cast<std::size_t>(std::clamp(rec->realized_efficiency * 100.0, 0.0, 99.0));
        ++r.efficiency_histogram[bin];
    }
    if (r.done_jobs > 0)
        r.mean_efficiency = eff_sum / static_cast<double>(r.done_jobs);
    return r;
}

SummaryReport summarize(const MetricsLog& log)
{
    return summarize(log.jobs, log.scenario, log.sweep);
}

std::map<LinkKey, double> link_totals(const MetricsLog& log)
{
    std::map<LinkKey, double> out;
    for (const auto& s : log.links)
        out[{s.src, s.dst}] += s.bytes;
    return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

void write_outputs(const MetricsLog& log, const std::filesystem::path& directory)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
        throw std::runtime_error("cannot create " + directory.string() + ": " + ec.message());

    const std::string scenario(to_string(log.scenario));

    {
        auto out = open_csv(directory / "jobs.csv");
        out << "job_id,site,scenario,cpu_s,base_eff,realized_eff,wall_s,stagein_s,status\n";
        std::vector<const JobRecord*> order;
        for (const auto& rec : log.jobs)
            order.push_back(&rec);
        std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->job_id < b->job_id; });
        for (const JobRecord* rec : order)
            out << rec->job_id << ',' << rec->site.str() << ',' << scenario << ',' << format_quantity(rec->cpu_seconds)
                << ',' << format_fraction(rec->base_efficiency) << ',' << format_fraction(rec->realized_efficiency) << ','
                << format_quantity(rec->wall_clock) << ',' << format_quantity(rec->stage_in_wait) << ','
                << (rec->status == JobStatus::Done ? "done" : "failed") << '\n';
    }
    {
        auto out = open_csv(directory / "queues.csv");
        out << "clock_s,site,queued,running,done\n";
        for (const auto& q : log.queues)
            out << format_quantity(q.clock) << ',' << q.site.str() << ',' << q.queued << ',' << q.running << ','
                << q.done << '\n';
    }
    {
        auto out = open_csv(directory / "links.csv");
        out << "clock_s,src,dst,bytes\n";
        for (const auto& l : log.links)
            out << format_quantity(l.clock) << ',' << l.src.str() << ',' << l.dst.str() << ',' << format_quantity(l.bytes)
                << '\n';
    }
    {
        const auto summary = summarize(log);
        auto out = open_csv(directory / "summary.csv");
        out << "scenario,cpu_hit_factor,speed_factor,seed,total_wall_s,mean_eff,failed_jobs\n";
        out << scenario << ',' << format_fraction(log.sweep.cpu_hit_factor) << ','
            << format_fraction(log.sweep.max_speed_factor) << ',' << log.sweep.rng_seed << ','
            << format_quantity(summary.total_wall) << ',' << format_fraction(summary.mean_efficiency) << ','
            << summary.failed_jobs << '\n';
    }
}

} // namespace gridsim
