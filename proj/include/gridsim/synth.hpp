#pragma once

#include "gridsim/ingest.hpp"
#include "gridsim/params.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace gridsim {

// Knobs for the synthetic nine-site fixture. Sites and latencies follow the
// US CMS layout; everything else is drawn from `seed`.
struct SynthConfig {
    std::uint64_t seed = 2024;
    std::size_t jobs = 9000;
    std::size_t files = 2000;

    // Share of original trace jobs per site; tier1 gets the remainder.
    std::map<std::string, double> job_share{
        {"Caltech", 0.20}, {"Florida", 0.20}, {"UCSD", 0.20}, {"Purdue", 0.10}, {"Wisconsin", 0.10},
        {"MIT", 0.06},     {"Vanderbilt", 0.06}, {"Nebraska", 0.04},
    };
    // Cores across all sites, split by post-duplication CPU demand.
    std::int64_t total_cores = 4500;

    double file_median_bytes = 16e9;
    double file_sigma = 0.15;
    double file_min_bytes = 5e8;
    double file_max_bytes = 5e10;

    double cpu_median_s = 8000;
    double cpu_sigma = 0.8;
    double cpu_min_s = 600;
    double cpu_max_s = 80000;
    // Streams never need more than this many bytes per CPU second.
    double max_read_rate = 3e6;

    // Probability of a second and third input file.
    double extra_input_p = 0.1;
    // Zipf exponent for file popularity within a site; 0 is uniform.
    double popularity = 0.0;

    double link_bandwidth = 1e9;
    double t2_link_quality = 0.98;
    double tier1_link_quality = 1.0;
};

struct SynthFixture {
    FixtureData data;
    EfficiencyHistogram histogram;
};

SynthFixture make_synthetic(const SynthConfig& config);

// Writes sites.csv, links.csv, catalog.csv, trace.csv and histogram.csv.
void write_fixture(const SynthFixture& fixture, const std::string& directory);

} // namespace gridsim
