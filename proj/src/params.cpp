#include "gridsim/params.hpp"

#include "gridsim/errors.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gridsim {

namespace {

template <typename Rows>
const typename Rows::value_type* matching_row(const Rows& rows, double latency_ms)
{
    const typename Rows::value_type* hit = nullptr;
    for (const auto& row : rows) {
        if (row.first <= latency_ms)
            hit = &row;
        else
            break;
    }
    return hit;
}

template <typename Rows>
void check_ascending(const Rows& rows, const char* what)
{
    if (rows.empty())
        throw std::invalid_argument(std::string(what) + ": no rows");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].first > rows[i - 1].first))
            throw std::invalid_argument(std::string(what) + ": latency thresholds must strictly increase");
    if (rows.front().first < 0)
        throw std::invalid_argument(std::string(what) + ": negative latency threshold");
}

} // namespace

PenaltyTable PenaltyTable::standard()
{
    return PenaltyTable{{{0.0, 0.0}, {1.0, 0.05}, {50.0, 0.20}}, 1.0};
}

SpeedTable SpeedTable::standard()
{
    constexpr double MB = 1e6;
    return SpeedTable{{{0.0, 10000 * MB}, {1.0, 1000 * MB}, {50.0, 100 * MB}, {100.0, 50 * MB}}, 1.0};
}

void validate(const PenaltyTable& table)
{
    check_ascending(table.rows, "penalty table");
    for (const auto& [lat, pen] : table.rows)
        if (!(pen >= 0 && pen < 1))
            throw std::invalid_argument("penalty table: penalty must be in [0, 1)");
    if (!(table.scale > 0))
        throw std::invalid_argument("penalty table: scale must be > 0");
}

void validate(const SpeedTable& table)
{
    check_ascending(table.rows, "speed table");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!(table.rows[i].second > 0))
            throw std::invalid_argument("speed table: speeds must be > 0");
        if (i > 0 && !(table.rows[i].second < table.rows[i - 1].second))
            throw std::invalid_argument("speed table: speeds must strictly decrease");
    }
    if (!(table.scale > 0))
        throw std::invalid_argument("speed table: scale must be > 0");
}

double penalty_for(const PenaltyTable& table, double latency_ms)
{
    if (latency_ms <= 0)
        return 0.0;
    const auto* row = matching_row(table.rows, latency_ms);
    if (!row)
        return 0.0;
    return std::clamp(row->second * table.scale, 0.0, PenaltyTable::kMaxPenalty);
}

double max_speed_for(const SpeedTable& table, double latency_ms)
{
    const auto* row = matching_row(table.rows, latency_ms);
    if (!row)
        row = &table.rows.front();
    return row->second * table.scale;
}

std::size_t EfficiencyHistogram::cpu_bin(double cpu_seconds) const
{
    // edges[0] is 0 and edges[10] is +inf, so every positive time lands in a bin
    auto it = std::upper_bound(cpu_bin_edges.begin() + 1, cpu_bin_edges.end() - 1, cpu_seconds);
    return static_cast<std::size_t>(it - cpu_bin_edges.begin()) - 1;
}

EfficiencyHistogram load_histogram(std::string_view text)
{
    const auto rows = text::lines(text);
    if (rows.size() != 1 + EfficiencyHistogram::kCpuBins)
        throw ParseError(rows.empty() ? 1 : rows.back().number,
                         "histogram needs 1 edge line and 10 weight rows, got " + std::to_string(rows.size()) + " lines");

    EfficiencyHistogram hist;
    const auto edges = text::split(rows[0].content, ',');
    if (edges.size() != hist.cpu_bin_edges.size())
        throw ParseError(rows[0].number, "expected 11 CPU-time bin edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i + 1 == edges.size() && (edges[i] == "inf" || edges[i] == "+inf")) {
            hist.cpu_bin_edges[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        auto v = text::to_double(edges[i]);
        if (!v)
            throw ParseError(rows[0].number, "bad bin edge '" + std::string(edges[i]) + "'");
        hist.cpu_bin_edges[i] = *v;
    }
    if (hist.cpu_bin_edges.front() != 0.0)
        throw ParseError(rows[0].number, "first bin edge must be 0");
    if (!std::isinf(hist.cpu_bin_edges.back()))
        throw ParseError(rows[0].number, "last bin edge must be inf");
    for (std::size_t i = 1; i < hist.cpu_bin_edges.size(); ++i)
        if (!(hist.cpu_bin_edges[i] > hist.cpu_bin_edges[i - 1]))
            throw ParseError(rows[0].number, "bin edges must strictly increase");

    for (std::size_t r = 0; r < EfficiencyHistogram::kCpuBins; ++r) {
        const auto& line = rows[r + 1];
        const auto cells = text::split(line.content, ',');
        if (cells.size() != EfficiencyHistogram::kEffBins)
            throw ParseError(line.number, "expected 100 efficiency counts, got " + std::to_string(cells.size()));
        double sum = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto v = text::to_double(cells[c]);
            if (!v || *v < 0)
                throw ParseError(line.number, "bad count '" + std::string(cells[c]) + "'");
            hist.weights[r][c] = *v;
            sum += *v;
        }
        if (!(sum > 0))
            throw ParseError(line.number, "CPU-time bin " + std::to_string(r) + " has no weight");
    }
    return hist;
}

EfficiencyHistogram default_histogram()
{
    EfficiencyHistogram hist;
    hist.cpu_bin_edges[0] = 0.0;
    // 60 s .. 1e5 s in 9 log steps
    for (std::size_t i = 1; i < EfficiencyHistogram::kCpuBins; ++i) {
        const double t = static_cast<double>(i - 1) / (EfficiencyHistogram::kCpuBins - 2);
        hist.cpu_bin_edges[i] = std::round(60.0 * std::pow(1e5 / 60.0, t));
    }
    hist.cpu_bin_edges.back() = std::numeric_limits<double>::infinity();

    for (std::size_t r = 0; r < EfficiencyHistogram::kCpuBins; ++r) {
        const double centre = 0.55 + 0.035 * static_cast<double>(r);
        const double width = 0.10 - 0.004 * static_cast<double>(r);
        for (std::size_t c = 0; c < EfficiencyHistogram::kEffBins; ++c) {
            const double x = (static_cast<double>(c) + 0.5) / 100.0;
            const double z = (x - centre) / width;
            hist.weights[r][c] = std::round(1000.0 * std::exp(-0.5 * z * z));
        }
    }
    return hist;
}

std::string format_histogram(const EfficiencyHistogram& hist)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < hist.cpu_bin_edges.size(); ++i) {
        if (i)
            out << ',';
        if (std::isinf(hist.cpu_bin_edges[i]))
            out << "inf";
        else
            out << hist.cpu_bin_edges[i];
    }
    out << '\n';
    for (const auto& row : hist.weights) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out << ',';
            out << row[c];
        }
        out << '\n';
    }
    return out.str();
}

double sample_efficiency(const EfficiencyHistogram& hist, double cpu_seconds, std::mt19937_64& rng)
{
    const auto& row = hist.weights[hist.cpu_bin(cpu_seconds)];
    const double total = std::accumulate(row.begin(), row.end(), 0.0);

    const double pick = unit_from_bits(rng()) * total;
    std::size_t column = 0;
    double running = 0;
    for (; column < row.size(); ++column) {
        running += row[column];
        if (pick < running && row[column] > 0)
            break;
    }
    if (column == row.size()) {
        // rounding pushed the pick past the last bin; take the last non-empty one
        column = row.size() - 1;
        while (row[column] <= 0)
            --column;
    }

    const double within = unit_from_bits(rng());
    const double eff = (static_cast<double>(column) + within) / 100.0;
    return std::max(eff, 0.01);
}

ParamTables apply_overrides(ParamTables base, std::string_view text)
{
    for (const auto& line : text::lines(text)) {
        auto content = line.content;
        if (auto hash = content.find('#'); hash != std::string_view::npos)
            content = content.substr(0, hash);
        content = text::trim(content);
        if (content.empty())
            continue;

        const auto eq = content.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line.number, "expected key=value");
        const auto key = text::trim(content.substr(0, eq));
        auto value = text::trim(content.substr(eq + 1));

        const auto dot = key.find('.');
        if (dot == std::string_view::npos || !key.ends_with("ms"))
            throw ParseError(line.number, "key must look like penalty.<N>ms or speed.<N>ms");
        const auto table = key.substr(0, dot);
        const auto latency = text::to_double(key.substr(dot + 1, key.size() - dot - 3));
        if (!latency || *latency < 0)
            throw ParseError(line.number, "bad latency in key '" + std::string(key) + "'");

        auto upsert = [&](auto& rows, double v) {
            auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.first == *latency; });
            if (it != rows.end())
                it->second = v;
            else {
                rows.emplace_back(*latency, v);
                std::sort(rows.begin(), rows.end());
            }
        };

        if (table == "penalty") {
            auto v = text::to_double(value);
            if (!v)
                throw ParseError(line.number, "bad penalty '" + std::string(value) + "'");
            upsert(base.penalty.rows, *v);
        } else if (table == "speed") {
            double unit = 1e6;   // bare numbers are MB/s
            if (value.ends_with("GBps")) {
                unit = 1e9;
                value.remove_suffix(4);
            } else if (value.ends_with("MBps")) {
                value.remove_suffix(4);
            } else if (value.ends_with("Bps")) {
                unit = 1.0;
                value.remove_suffix(3);
            }
            auto v = text::to_double(value);
            if (!v)
                throw ParseError(line.number, "bad speed '" + std::string(value) + "'");
            upsert(base.speed.rows, *v * unit);
        } else {
            throw ParseError(line.number, "unknown table '" + std::string(table) + "'");
        }
    }
    validate(base.penalty);
    validate(base.speed);
    return base;
}

} // namespace gridsim
