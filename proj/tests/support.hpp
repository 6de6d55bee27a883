#pragma once

#include "gridsim/engine.hpp"
#include "gridsim/ingest.hpp"
#include "gridsim/model.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace testing {

using namespace gridsim;

inline const std::array<std::string, 9> kSites{"Purdue",  "UCSD",    "Nebraska", "Wisconsin", "Vanderbilt",
                                               "Caltech", "Florida", "MIT",      "FNAL"};

// Latency in ms, row = source, column = destination.
inline constexpr std::array<std::array<int, 9>, 9> kLatency{{
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

inline SiteId S(const char* name)
{
    return SiteId{name};
}

inline std::vector<Site> grid_sites(std::int64_t cores = 10, Bytes disk = 1'000'000'000'000'000ULL)
{
    std::vector<Site> out;
    for (const auto& n : kSites)
        out.push_back({SiteId{n}, cores, disk, 1.25e9});
    return out;
}

inline std::vector<Link> grid_links(double bandwidth = 1e9, double quality = 1.0)
{
    std::vector<Link> out;
    for (std::size_t i = 0; i < kSites.size(); ++i)
        for (std::size_t j = 0; j < kSites.size(); ++j)
            if (i != j)
                out.push_back({SiteId{kSites[i]}, SiteId{kSites[j]}, bandwidth, double(kLatency[i][j]), quality});
    return out;
}

inline Topology grid_topology(std::int64_t cores = 10, double bandwidth = 1e9, double quality = 1.0)
{
    return Topology(grid_sites(cores), grid_links(bandwidth, quality));
}

// Base efficiencies fixed per job id.
inline EfficiencySampler fixed_efficiency(std::map<JobId, double> eff, double fallback = 0.5)
{
    return [eff = std::move(eff), fallback](const Job& j) {
        auto it = eff.find(j.id);
        return it == eff.end() ? fallback : it->second;
    };
}

inline Job make_job(JobId id, const char* site, double cpu, std::vector<Lfn> inputs = {})
{
    Job j;
    j.id = id;
    j.site = SiteId{site};
    j.cpu_seconds = cpu;
    j.inputs = std::move(inputs);
    return j;
}

inline FileRecord make_file(const Lfn& lfn, Bytes size, std::initializer_list<const char*> at)
{
    FileRecord r{lfn, size, {}};
    for (const char* s : at)
        r.locations.insert(SiteId{s});
    return r;
}

// Two sites, FNAL and UCSD, one core each, 1 GB/s links at 100 ms.
inline Topology pair_topology(double quality = 1.0, std::int64_t cores = 1)
{
    std::vector<Site> sites{{S("FNAL"), cores, 100'000'000'000ULL, 1e9}, {S("UCSD"), cores, 100'000'000'000ULL, 1e9}};
    std::vector<Link> links{{S("FNAL"), S("UCSD"), 1e9, 100, quality}, {S("UCSD"), S("FNAL"), 1e9, 100, quality}};
    return Topology(std::move(sites), std::move(links));
}

} // namespace testing
