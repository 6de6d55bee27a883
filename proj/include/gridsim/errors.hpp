#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsim {

// Malformed fixture text. Line numbers are 1-based and count the header.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what) : ParseError({}, line, what) {}
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error((source.empty() ? "" : source + " ") + "line " + std::to_string(line) + ": " + what),
          line_(line), detail_(what)
    {
    }

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

// Cross-reference or invariant failures, collected rather than thrown one at a time.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty())
                out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gridsim
