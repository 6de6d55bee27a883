#include "gridsim/params.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gridsim;

TEST_CASE("penalty table")
{
    auto t = PenaltyTable::standard();
    CHECK(penalty_for(t, 0) == 0.0);
    CHECK(penalty_for(t, 5) == 0.05);
    CHECK(penalty_for(t, 49.9) == 0.05);
    CHECK(penalty_for(t, 50) == 0.20);
    t.scale = 2.0;
    CHECK(penalty_for(t, 70) == doctest::Approx(0.40));
    t.scale = 10.0;
    CHECK(penalty_for(t, 70) == PenaltyTable::kMaxPenalty);
}

TEST_CASE("speed table")
{
    auto t = SpeedTable::standard();
    CHECK(max_speed_for(t, 0) == 1e10);
    CHECK(max_speed_for(t, 1) == 1e9);
    CHECK(max_speed_for(t, 50) == 1e8);
    CHECK(max_speed_for(t, 100) == 5e7);
    CHECK(max_speed_for(t, 400) == 5e7);
    t.scale = 0.5;
    CHECK(max_speed_for(t, 60) == 5e7);
}

TEST_CASE("tables are step functions of latency")
{
    const auto p = PenaltyTable::standard();
    const auto s = SpeedTable::standard();
    const double bounds[] = {0, 1, 50, 100, 1000};
    for (int i = 0; i + 1 < 5; ++i) {
        const double lo = i == 0 ? 0.001 : bounds[i];
        for (double x = lo; x < bounds[i + 1]; x += (bounds[i + 1] - lo) / 37) {
            CHECK(penalty_for(p, x) == penalty_for(p, lo));
            CHECK(max_speed_for(s, x) == max_speed_for(s, lo));
        }
    }
}

TEST_CASE("table validation")
{
    PenaltyTable p{{{0, 0}, {50, 0.2}, {1, 0.05}}, 1};
    CHECK_THROWS(validate(p));
    p = PenaltyTable{{{0, 0}, {1, 1.5}}, 1};
    CHECK_THROWS(validate(p));
    SpeedTable s{{{0, 1e10}, {1, -1}}, 1};
    CHECK_THROWS(validate(s));
    CHECK_NOTHROW(validate(PenaltyTable::standard()));
    CHECK_NOTHROW(validate(SpeedTable::standard()));
}

TEST_CASE("parameter overrides")
{
    auto t = apply_overrides({}, "# tweak\npenalty.1ms=0.1\nspeed.50ms=200MBps\nspeed.100ms=80MBps\n");
    CHECK(penalty_for(t.penalty, 10) == 0.1);
    CHECK(max_speed_for(t.speed, 60) == 2e8);
    CHECK(max_speed_for(t.speed, 200) == 8e7);
    CHECK_THROWS(apply_overrides({}, "speed.100ms=1GBps"));
    CHECK(max_speed_for(t.speed, 0) == 1e10);
    auto bare = apply_overrides({}, "speed.1ms=300");
    CHECK(max_speed_for(bare.speed, 10) == 3e8);
    CHECK_THROWS(apply_overrides({}, "penalty.1ms"));
    CHECK_THROWS(apply_overrides({}, "bogus.1ms=3"));
    CHECK_THROWS(apply_overrides({}, "penalty.1ms=2"));
}

namespace {

EfficiencyHistogram single_column(std::size_t col)
{
    EfficiencyHistogram h = default_histogram();
    for (auto& row : h.weights) {
        row.fill(0);
        row[col] = 1;
    }
    return h;
}

} // namespace

TEST_CASE("efficiency sampling")
{
    SUBCASE("degenerate histogram")
    {
        auto h = single_column(80);
        std::mt19937_64 rng(1);
        for (int i = 0; i < 1000; ++i) {
            double e = sample_efficiency(h, 3600, rng);
            CHECK(e >= 0.80);
            CHECK(e < 0.81);
        }
    }
    SUBCASE("two equal columns split evenly")
    {
        auto h = single_column(20);
        for (auto& row : h.weights)
            row[70] = 1;
        std::mt19937_64 rng(9);
        int low = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i)
            low += sample_efficiency(h, 100, rng) < 0.5;
        // 3 sigma of binomial(10000, 0.5) is 150
        CHECK(std::abs(low - n / 2) <= 150);
    }
    SUBCASE("floor")
    {
        auto h = single_column(0);
        std::mt19937_64 rng(2);
        for (int i = 0; i < 100; ++i)
            CHECK(sample_efficiency(h, 10, rng) >= 0.01);
    }
    SUBCASE("same seed, same sequence")
    {
        auto h = default_histogram();
        std::mt19937_64 a(77), b(77);
        for (int i = 0; i < 100; ++i)
            CHECK(sample_efficiency(h, 50.0 * i, a) == sample_efficiency(h, 50.0 * i, b));
    }
}

TEST_CASE("histogram file format")
{
    const auto h = default_histogram();
    const auto text = format_histogram(h);
    const auto back = load_histogram(text);
    CHECK(back.cpu_bin_edges == h.cpu_bin_edges);
    CHECK(back.weights == h.weights);
    CHECK(std::isinf(back.cpu_bin_edges.back()));

    // drop the last row -> 9 rows
    auto nine = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS(load_histogram(nine));

    auto negative = text;
    negative.replace(negative.find('\n') + 1, 1, "-");
    CHECK_THROWS(load_histogram(negative));
}

TEST_CASE("cpu bins")
{
    const auto h = default_histogram();
    CHECK(h.cpu_bin(0) == 0);
    CHECK(h.cpu_bin(1e12) == EfficiencyHistogram::kCpuBins - 1);
    for (std::size_t b = 0; b < EfficiencyHistogram::kCpuBins; ++b)
        CHECK(h.cpu_bin(h.cpu_bin_edges[b]) == b);
}

TEST_CASE("unit_from_bits")
{
    CHECK(unit_from_bits(0) == 0.0);
    CHECK(unit_from_bits(~0ULL) < 1.0);
    CHECK(unit_from_bits(1ULL << 63) == 0.5);
}
