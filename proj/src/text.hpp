#pragma once

// Small helpers for the line-oriented fixture formats.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridsim::text {

struct Line {
    std::size_t number;   // 1-based
    std::string_view content;
};

// Splits on LF, strips a trailing CR, drops blank lines.
std::vector<Line> lines(std::string_view text);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

std::optional<double> to_double(std::string_view s);
std::optional<std::int64_t> to_int(std::string_view s);
std::optional<std::uint64_t> to_uint(std::string_view s);

std::string read_file(const std::string& path);

} // namespace gridsim::text
