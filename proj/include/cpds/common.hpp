#pragma once

// Shared small types and error classes used across the library.

#include <cmath>
#include <stdexcept>
#include <string>

namespace cpds {

// Thrown when an input file cannot be read or is not syntactically valid.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when parsed data violates a documented invariant. The message names
// the violated invariant and the offending element.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an optimization backend fails to produce a usable solution.
struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
};

inline double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace cpds
