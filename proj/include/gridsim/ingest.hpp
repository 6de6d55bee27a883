#pragma once

#include "gridsim/model.hpp"
#include "gridsim/scenarios.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gridsim {

inline constexpr double kMinLinkBandwidth = 1e9;    // 1 GB/s
inline constexpr double kMaxLinkBandwidth = 1e10;   // 10 GB/s

// Clamps an aggregate link rate (bytes/s) into [1 GB/s, 10 GB/s].
double clamp_bandwidth(double raw);

// site,cores,disk_tb,internal_gbps
std::vector<Site> parse_sites(std::string_view text);

// src,dst,bandwidth_gbps,latency_ms,quality
std::vector<Link> parse_links(std::string_view text);

// lfn,size_bytes,sites   (sites separated by ';')
FileCatalog parse_catalog(std::string_view text);

struct Trace {
    std::vector<Job> jobs;
    // Sizes given inline as "lfn@bytes" for files the catalog may not know.
    std::map<Lfn, Bytes> size_hints;
};

// job_id,site,cpu_seconds,walltime_seconds,lfns   (lfns separated by ';')
Trace parse_trace(std::string_view text);

// Writers producing text the parsers accept; used for round-trip checks and
// by the synthetic fixture generator.
std::string format_sites(const std::vector<Site>& sites);
std::string format_links(const std::vector<Link>& links);
std::string format_catalog(const FileCatalog& catalog);
std::string format_trace(const Trace& trace);

// Appends one duplicate per job. Tier-2 duplicates move to the next Tier-2
// site in name order (cyclic, tier1 skipped); tier1 duplicates stay put.
// Duplicate ids are original id + trace length.
std::vector<Job> duplicate_trace(const std::vector<Job>& jobs, const Topology& topology, const SiteId& tier1);

// Gives every referenced LFN missing from the catalog a single replica at
// tier1, sized from `size_hints`. Throws ValidationError for unknown sizes.
FileCatalog place_missing_at_tier1(FileCatalog catalog, const std::vector<Job>& jobs, const SiteId& tier1,
                                   const std::map<Lfn, Bytes>& size_hints);

struct FixtureSet {
    std::string sites_path;
    std::string links_path;
    std::string catalog_path;
    std::string trace_path;
};

struct FixtureData {
    std::vector<Site> sites;
    std::vector<Link> links;
    FileCatalog catalog;
    Trace trace;
};

FixtureData load_fixtures(const FixtureSet& files);

struct AssemblyConfig {
    Scenario scenario = Scenario::Preplaced;
    SiteId tier1{"FNAL"};
    bool duplicate = true;
};

struct Assembly {
    Topology topology;
    FileCatalog catalog;
    std::vector<Job> jobs;
    // Number of jobs in the trace before duplication.
    std::size_t trace_length = 0;
};

// Cross-validates the fixtures, applies missing-file placement, trace
// duplication and the scenario's catalog rewrite, then checks disk usage.
// All problems are reported together in one ValidationError.
Assembly assemble_state(const FixtureData& fixtures, const AssemblyConfig& config);

} // namespace gridsim
