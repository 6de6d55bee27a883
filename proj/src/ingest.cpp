#include "gridsim/ingest.hpp"

#include "gridsim/errors.hpp"
#include "text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gridsim {

namespace {

std::vector<text::Line> body(std::string_view text, std::string_view header)
{
    auto rows = text::lines(text);
    if (rows.empty())
        throw ParseError(1, "missing header '" + std::string(header) + "'");
    const auto got = text::split(rows.front().content, ',');
    const auto want = text::split(header, ',');
    if (got != want)
        throw ParseError(rows.front().number, "expected header '" + std::string(header) + "'");
    rows.erase(rows.begin());
    return rows;
}

std::vector<std::string_view> fields(const text::Line& line, std::size_t n)
{
    auto f = text::split(line.content, ',');
    if (f.size() != n)
        throw ParseError(line.number, "expected " + std::to_string(n) + " fields, got " + std::to_string(f.size()));
    return f;
}

double number(const text::Line& line, std::string_view field, const char* what)
{
    auto v = text::to_double(field);
    if (!v)
        throw ParseError(line.number, std::string("bad ") + what + " '" + std::string(field) + "'");
    return *v;
}

std::vector<std::string_view> list_field(std::string_view field)
{
    std::vector<std::string_view> out;
    if (text::trim(field).empty())
        return out;
    for (auto item : text::split(field, ';'))
        if (!item.empty())
            out.push_back(item);
    return out;
}

// Shortest text that parses back to the same double.
std::string num(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace

double clamp_bandwidth(double raw)
{
    if (!(raw > 0))
        throw std::invalid_argument("link bandwidth must be > 0");
    return std::clamp(raw, kMinLinkBandwidth, kMaxLinkBandwidth);
}

std::vector<Site> parse_sites(std::string_view text)
{
    std::vector<Site> out;
    std::set<SiteId> seen;
    for (const auto& line : body(text, "site,cores,disk_tb,internal_gbps")) {
        const auto f = fields(line, 4);
        Site s;
        s.id = SiteId(std::string(f[0]));
        if (s.id.empty())
            throw ParseError(line.number, "empty site name");
        auto cores = text::to_int(f[1]);
        if (!cores)
            throw ParseError(line.number, "bad cores '" + std::string(f[1]) + "'");
        if (*cores < 1)
            throw ParseError(line.number, "site " + s.id.str() + ": cores must be >= 1");
        s.cores = *cores;
        const double disk_tb = number(line, f[2], "disk_tb");
        if (disk_tb < 0)
            throw ParseError(line.number, "site " + s.id.str() + ": disk must be >= 0");
        s.disk_capacity = static_cast<Bytes>(std::llround(disk_tb * 1e12));
        const double gbps = number(line, f[3], "internal_gbps");
        if (gbps < 0)
            throw ParseError(line.number, "site " + s.id.str() + ": internal bandwidth must be >= 0");
        s.internal_bandwidth = gbps * 1e9 / 8.0;
        if (!seen.insert(s.id).second)
            throw ValidationError({"duplicate site " + s.id.str() + " (line " + std::to_string(line.number) + ")"});
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Link> parse_links(std::string_view text)
{
    std::vector<Link> out;
    for (const auto& line : body(text, "src,dst,bandwidth_gbps,latency_ms,quality")) {
        const auto f = fields(line, 5);
        Link l;
        l.src = SiteId(std::string(f[0]));
        l.dst = SiteId(std::string(f[1]));
        if (l.src.empty() || l.dst.empty())
            throw ParseError(line.number, "empty site name");
        if (l.src == l.dst)
            throw ParseError(line.number, "self-link " + l.src.str() + "->" + l.dst.str());
        const double gbps = number(line, f[2], "bandwidth_gbps");
        if (!(gbps > 0))
            throw ParseError(line.number, "bandwidth must be > 0");
        // gigabytes per second, decimal
        l.bandwidth = clamp_bandwidth(gbps * 1e9);
        l.latency_ms = number(line, f[3], "latency_ms");
        if (l.latency_ms < 0)
            throw ParseError(line.number, "latency must be >= 0");
        l.quality = number(line, f[4], "quality");
        if (!(l.quality > 0 && l.quality <= 1))
            throw ParseError(line.number, "quality must be in (0, 1]");
        out.push_back(std::move(l));
    }
    return out;
}

FileCatalog parse_catalog(std::string_view text)
{
    FileCatalog catalog;
    for (const auto& line : body(text, "lfn,size_bytes,sites")) {
        const auto f = fields(line, 3);
        FileRecord rec;
        rec.lfn = std::string(f[0]);
        if (rec.lfn.empty())
            throw ParseError(line.number, "empty lfn");
        auto size = text::to_uint(f[1]);
        if (!size)
            throw ParseError(line.number, "bad size_bytes '" + std::string(f[1]) + "'");
        if (*size == 0)
            throw ParseError(line.number, "file " + rec.lfn + ": size must be > 0");
        rec.size = *size;
        for (auto s : list_field(f[2]))
            rec.locations.insert(SiteId(std::string(s)));
        if (rec.locations.empty())
            throw ParseError(line.number, "file " + rec.lfn + ": listed at no site");
        if (catalog.contains(rec.lfn))
            throw ParseError(line.number, "duplicate lfn " + rec.lfn);
        catalog.insert(std::move(rec));
    }
    return catalog;
}

Trace parse_trace(std::string_view text)
{
    Trace trace;
    for (const auto& line : body(text, "job_id,site,cpu_seconds,walltime_seconds,lfns")) {
        const auto f = fields(line, 5);
        Job job;
        auto id = text::to_int(f[0]);
        if (!id)
            throw ParseError(line.number, "bad job_id '" + std::string(f[0]) + "'");
        job.id = *id;
        job.site = SiteId(std::string(f[1]));
        if (job.site.empty())
            throw ParseError(line.number, "empty site name");
        job.cpu_seconds = number(line, f[2], "cpu_seconds");
        if (!(job.cpu_seconds > 0))
            throw ParseError(line.number, "job " + std::to_string(job.id) + ": cpu_seconds must be > 0");
        job.original_walltime = number(line, f[3], "walltime_seconds");
        for (auto item : list_field(f[4])) {
            auto at = item.find('@');
            auto lfn = std::string(item.substr(0, at));
            if (at != std::string_view::npos) {
                auto size = text::to_uint(item.substr(at + 1));
                if (!size || *size == 0)
                    throw ParseError(line.number, "bad size hint in '" + std::string(item) + "'");
                trace.size_hints[lfn] = *size;
            }
            job.inputs.push_back(std::move(lfn));
        }
        trace.jobs.push_back(std::move(job));
    }
    return trace;
}

std::string format_sites(const std::vector<Site>& sites)
{
    std::ostringstream out;
    out << "site,cores,disk_tb,internal_gbps\n";
    for (const auto& s : sites)
        out << s.id.str() << ',' << s.cores << ',' << num(static_cast<double>(s.disk_capacity) / 1e12) << ','
            << num(s.internal_bandwidth * 8.0 / 1e9) << '\n';
    return out.str();
}

std::string format_links(const std::vector<Link>& links)
{
    std::ostringstream out;
    out << "src,dst,bandwidth_gbps,latency_ms,quality\n";
    for (const auto& l : links)
        out << l.src.str() << ',' << l.dst.str() << ',' << num(l.bandwidth / 1e9) << ',' << num(l.latency_ms) << ','
            << num(l.quality) << '\n';
    return out.str();
}

std::string format_catalog(const FileCatalog& catalog)
{
    std::ostringstream out;
    out << "lfn,size_bytes,sites\n";
    for (const auto& [lfn, rec] : catalog.records()) {
        out << lfn << ',' << rec.size << ',';
        bool first = true;
        for (const auto& s : rec.locations) {
            out << (first ? "" : ";") << s.str();
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

std::string format_trace(const Trace& trace)
{
    std::ostringstream out;
    out << "job_id,site,cpu_seconds,walltime_seconds,lfns\n";
    std::set<Lfn> hinted;
    for (const auto& j : trace.jobs) {
        out << j.id << ',' << j.site.str() << ',' << num(j.cpu_seconds) << ',' << num(j.original_walltime) << ',';
        for (std::size_t i = 0; i < j.inputs.size(); ++i) {
            out << (i ? ";" : "") << j.inputs[i];
            auto hint = trace.size_hints.find(j.inputs[i]);
            if (hint != trace.size_hints.end() && hinted.insert(j.inputs[i]).second)
                out << '@' << hint->second;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<Job> duplicate_trace(const std::vector<Job>& jobs, const Topology& topology, const SiteId& tier1)
{
    std::vector<SiteId> tier2;
    for (const auto& [id, site] : topology.sites())
        if (id != tier1)
            tier2.push_back(id);
    if (tier2.size() < 2)
        throw std::invalid_argument("trace duplication needs at least two Tier-2 sites");

    const auto n = static_cast<JobId>(jobs.size());
    std::vector<Job> out = jobs;
    out.reserve(jobs.size() * 2);
    for (const auto& job : jobs) {
        Job dup = job;
        dup.id = job.id + n;
        if (job.site != tier1) {
            auto it = std::lower_bound(tier2.begin(), tier2.end(), job.site);
            if (it == tier2.end() || *it != job.site)
                throw std::invalid_argument("job " + std::to_string(job.id) + " at unknown site " + job.site.str());
            ++it;
            dup.site = it == tier2.end() ? tier2.front() : *it;
        }
        out.push_back(std::move(dup));
    }
    return out;
}

FileCatalog place_missing_at_tier1(FileCatalog catalog, const std::vector<Job>& jobs, const SiteId& tier1,
                                   const std::map<Lfn, Bytes>& size_hints)
{
    std::vector<std::string> problems;
    for (const auto& job : jobs) {
        for (const auto& lfn : job.inputs) {
            if (catalog.contains(lfn))
                continue;
            auto hint = size_hints.find(lfn);
            if (hint == size_hints.end()) {
                problems.push_back("job " + std::to_string(job.id) + ": unknown lfn " + lfn + " with no size");
                continue;
            }
            catalog.insert(FileRecord{lfn, hint->second, {tier1}});
        }
    }
    if (!problems.empty())
        throw ValidationError(std::move(problems));
    return catalog;
}

FixtureData load_fixtures(const FixtureSet& files)
{
    auto wrap = [](const std::string& path, auto&& parse) {
        try {
            return parse(text::read_file(path));
        } catch (const ParseError& e) {
            throw ParseError(path, e.line(), e.detail());
        }
    };
    FixtureData data;
    data.sites = wrap(files.sites_path, [](const std::string& t) { return parse_sites(t); });
    data.links = wrap(files.links_path, [](const std::string& t) { return parse_links(t); });
    data.catalog = wrap(files.catalog_path, [](const std::string& t) { return parse_catalog(t); });
    data.trace = wrap(files.trace_path, [](const std::string& t) { return parse_trace(t); });
    return data;
}

Assembly assemble_state(const FixtureData& fixtures, const AssemblyConfig& config)
{
    Assembly out;
    out.topology = Topology(fixtures.sites, fixtures.links);
    const Topology& topo = out.topology;

    std::vector<std::string> problems = validate_topology(topo);
    if (!topo.has_site(config.tier1))
        problems.push_back("tier1 site " + config.tier1.str() + " is not defined");

    for (const auto& [lfn, rec] : fixtures.catalog.records())
        for (const auto& s : rec.locations)
            if (!topo.has_site(s))
                problems.push_back("file " + lfn + ": unknown site " + s.str());

    std::set<JobId> ids;
    for (const auto& job : fixtures.trace.jobs) {
        if (!topo.has_site(job.site))
            problems.push_back("job " + std::to_string(job.id) + ": unknown site " + job.site.str());
        if (!ids.insert(job.id).second)
            problems.push_back("duplicate job id " + std::to_string(job.id));
    }
    if (!problems.empty())
        throw ValidationError(std::move(problems));

    out.catalog = place_missing_at_tier1(fixtures.catalog, fixtures.trace.jobs, config.tier1, fixtures.trace.size_hints);
    out.trace_length = fixtures.trace.jobs.size();
    if (config.duplicate) {
        try {
            out.jobs = duplicate_trace(fixtures.trace.jobs, topo, config.tier1);
        } catch (const std::invalid_argument& e) {
            throw ValidationError({e.what()});
        }
        for (std::size_t i = out.trace_length; i < out.jobs.size(); ++i)
            if (ids.contains(out.jobs[i].id))
                problems.push_back("duplicate job id " + std::to_string(out.jobs[i].id) + " collides with the trace");
    } else {
        out.jobs = fixtures.trace.jobs;
    }
    if (!problems.empty())
        throw ValidationError(std::move(problems));

    prepare_catalog(config.scenario, out.catalog, out.jobs, config.duplicate ? out.trace_length : out.jobs.size(),
                    config.tier1);

    for (const auto& [id, site] : topo.sites()) {
        const Bytes used = out.catalog.used_bytes(id);
        if (used > site.disk_capacity)
            problems.push_back("site " + id.str() + ": replicas need " + std::to_string(used) + " bytes but disk holds " +
                               std::to_string(site.disk_capacity));
    }
    if (!problems.empty())
        throw ValidationError(std::move(problems));
    return out;
}

} // namespace gridsim
