#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridsim {

// Latency (ms) -> remote-read CPU efficiency penalty. Step function over
// ascending thresholds; a row applies from its latency up to the next row.
struct PenaltyTable {
    std::vector<std::pair<double, double>> rows;   // (min_latency_ms, penalty)
    double scale = 1.0;

    static constexpr double kMaxPenalty = 0.95;

    static PenaltyTable standard();
};

// Latency (ms) -> maximum single-file transfer rate in bytes/s.
struct SpeedTable {
    std::vector<std::pair<double, double>> rows;   // (min_latency_ms, bytes/s)
    double scale = 1.0;

    static SpeedTable standard();
};

double penalty_for(const PenaltyTable& table, double latency_ms);
double max_speed_for(const SpeedTable& table, double latency_ms);

// Throws std::invalid_argument when rows are unordered or out of range.
void validate(const PenaltyTable& table);
void validate(const SpeedTable& table);

// Base CPU efficiency distribution, binned by job CPU time.
struct EfficiencyHistogram {
    static constexpr std::size_t kCpuBins = 10;
    static constexpr std::size_t kEffBins = 100;

    std::array<double, kCpuBins + 1> cpu_bin_edges{};
    std::array<std::array<double, kEffBins>, kCpuBins> weights{};

    std::size_t cpu_bin(double cpu_seconds) const;
};

// Parses the histogram CSV: one line of 11 edges ("inf" allowed for the
// last), then 10 lines of 100 non-negative counts.
EfficiencyHistogram load_histogram(std::string_view text);

// Logarithmic edges from 60 s to 1e5 s, each row a clipped bell whose
// centre rises with CPU time so short jobs run less efficiently.
EfficiencyHistogram default_histogram();

std::string format_histogram(const EfficiencyHistogram& hist);

// Draws a base efficiency in [0.01, 1).
double sample_efficiency(const EfficiencyHistogram& hist, double cpu_seconds, std::mt19937_64& rng);

struct SweepConfig {
    double cpu_hit_factor = 1.0;
    double max_speed_factor = 1.0;
    std::uint64_t rng_seed = 1;
};

inline constexpr std::array<double, 3> kSweepFactors{0.5, 1.0, 2.0};

struct ParamTables {
    PenaltyTable penalty = PenaltyTable::standard();
    SpeedTable speed = SpeedTable::standard();
};

// Applies key=value overrides such as "penalty.1ms=0.05" or
// "speed.50ms=100MBps" on top of `base`. '#' starts a comment.
ParamTables apply_overrides(ParamTables base, std::string_view text);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
inline double unit_from_bits(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace gridsim
