#include "gridsim/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace gridsim {

namespace {

constexpr std::array<const char*, 9> kNames{"Purdue",  "UCSD",    "Nebraska", "Wisconsin", "Vanderbilt",
                                            "Caltech", "Florida", "MIT",      "FNAL"};

// ms, row = source, column = destination
constexpr std::array<std::array<int, 9>, 9> kLatency{{
    {0, 100, 100, 60, 40, 100, 40, 40, 70},
    {100, 0, 70, 100, 100, 20, 100, 100, 100},
    {70, 60, 0, 40, 70, 40, 70, 70, 40},
    {40, 70, 40, 0, 60, 100, 70, 40, 20},
    {40, 100, 70, 70, 0, 100, 40, 20, 60},
    {100, 20, 60, 100, 100, 0, 100, 100, 100},
    {40, 100, 70, 60, 40, 100, 0, 60, 70},
    {40, 100, 100, 70, 40, 100, 40, 0, 70},
    {40, 100, 40, 20, 70, 100, 70, 60, 0},
}};

constexpr std::size_t kTier1 = 8;

double clamp_draw(double v, double lo, double hi)
{
    return std::clamp(v, lo, hi);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

SynthFixture make_synthetic(const SynthConfig& c)
{
    if (c.jobs == 0 || c.files == 0)
        throw std::invalid_argument("synthetic fixture needs jobs and files");
    std::mt19937_64 rng(c.seed);

    std::array<double, 9> share{};
    double t2_total = 0;
    for (std::size_t i = 0; i < kTier1; ++i) {
        auto it = c.job_share.find(kNames[i]);
        share[i] = it == c.job_share.end() ? 0.0 : it->second;
        t2_total += share[i];
    }
    if (t2_total > 1.0)
        throw std::invalid_argument("job shares exceed 1");
    share[kTier1] = 1.0 - t2_total;
    std::discrete_distribution<std::size_t> pick_site(share.begin(), share.end());

    // files, each homed at one site
    std::lognormal_distribution<double> file_size(std::log(c.file_median_bytes), c.file_sigma);
    std::array<std::vector<std::size_t>, 9> pool;
    std::vector<FileRecord> files;
    for (std::size_t i = 0; i < c.files; ++i) {
        const std::size_t home = pick_site(rng);
        char name[96];
        std::snprintf(name, sizeof name, "/store/synth/%s/f%05zu.root", lower(kNames[home]).c_str(), i);
        const auto size = static_cast<Bytes>(std::llround(clamp_draw(file_size(rng), c.file_min_bytes, c.file_max_bytes)));
        FileRecord rec{name, size, {SiteId{kNames[home]}, SiteId{kNames[kTier1]}}};
        pool[home].push_back(files.size());
        files.push_back(std::move(rec));
    }
    std::array<std::discrete_distribution<std::size_t>, 9> pick_file;
    for (std::size_t s = 0; s < 9; ++s) {
        if (pool[s].empty())
            continue;
        std::vector<double> w;
        for (std::size_t r = 0; r < pool[s].size(); ++r)
            w.push_back(1.0 / std::pow(double(r + 1), c.popularity));
        pick_file[s] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }

    std::lognormal_distribution<double> cpu_time(std::log(c.cpu_median_s), c.cpu_sigma);
    std::bernoulli_distribution extra(c.extra_input_p);
    std::uniform_int_distribution<std::size_t> any_file(0, files.size() - 1);

    Trace trace;
    for (std::size_t i = 0; i < c.jobs; ++i) {
        std::size_t s = pick_site(rng);
        Job job;
        job.id = static_cast<JobId>(i + 1);
        job.site = SiteId{kNames[s]};
        std::size_t n_inputs = 1;
        while (n_inputs < 3 && extra(rng))
            ++n_inputs;
        double bytes = 0;
        for (std::size_t k = 0; k < n_inputs; ++k) {
            const std::size_t f = pool[s].empty() ? any_file(rng) : pool[s][pick_file[s](rng)];
            if (std::find(job.inputs.begin(), job.inputs.end(), files[f].lfn) != job.inputs.end())
                continue;
            job.inputs.push_back(files[f].lfn);
            bytes += double(files[f].size);
        }
        const double cpu = std::max(clamp_draw(cpu_time(rng), c.cpu_min_s, c.cpu_max_s), bytes / c.max_read_rate);
        job.cpu_seconds = std::ceil(cpu);
        job.original_walltime = std::ceil(job.cpu_seconds / 0.8);
        trace.jobs.push_back(std::move(job));
    }

    std::vector<Link> links;
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) {
            if (i == j)
                continue;
            const bool tier1 = i == kTier1 || j == kTier1;
            links.push_back({SiteId{kNames[i]}, SiteId{kNames[j]}, c.link_bandwidth, double(kLatency[i][j]),
                             tier1 ? c.tier1_link_quality : c.t2_link_quality});
        }

    // Cores follow the CPU demand once the trace is doubled; disks hold the
    // home replicas plus everything the site's jobs may cache.
    std::vector<Site> sites;
    for (std::size_t i = 0; i < 9; ++i)
        sites.push_back({SiteId{kNames[i]}, 1, 0, i == kTier1 ? 1.25e10 : 5e9});
    const Topology shape(sites, links);
    const auto doubled = duplicate_trace(trace.jobs, shape, SiteId{kNames[kTier1]});

    std::map<SiteId, double> demand;
    std::map<SiteId, std::set<Lfn>> referenced;
    double total_demand = 0;
    for (const auto& j : doubled) {
        demand[j.site] += j.cpu_seconds;
        total_demand += j.cpu_seconds;
        referenced[j.site].insert(j.inputs.begin(), j.inputs.end());
    }
    std::map<Lfn, Bytes> size_of;
    std::map<SiteId, double> home_bytes;
    for (const auto& f : files) {
        size_of[f.lfn] = f.size;
        for (const auto& s : f.locations)
            home_bytes[s] += double(f.size);
    }
    for (auto& site : sites) {
        site.cores = std::max<std::int64_t>(1, std::llround(double(c.total_cores) * demand[site.id] / total_demand));
        double need = home_bytes[site.id];
        for (const auto& lfn : referenced[site.id])
            need += double(size_of[lfn]);
        site.disk_capacity = static_cast<Bytes>(std::ceil(need * 1.25 / 1e12)) * 1'000'000'000'000ULL;
    }

    SynthFixture out;
    out.data.sites = std::move(sites);
    out.data.links = std::move(links);
    for (auto& f : files)
        out.data.catalog.insert(std::move(f));
    out.data.trace = std::move(trace);
    out.histogram = default_histogram();
    return out;
}

void write_fixture(const SynthFixture& fixture, const std::string& directory)
{
    const std::filesystem::path dir(directory);
    std::filesystem::create_directories(dir);
    write_text(dir / "sites.csv", format_sites(fixture.data.sites));
    write_text(dir / "links.csv", format_links(fixture.data.links));
    write_text(dir / "catalog.csv", format_catalog(fixture.data.catalog));
    write_text(dir / "trace.csv", format_trace(fixture.data.trace));
    write_text(dir / "histogram.csv", format_histogram(fixture.histogram));
}

} // namespace gridsim
