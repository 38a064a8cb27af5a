#pragma once

#include <cstddef>
#include <string>

namespace muspark {

/// Position inside a source file. Lines and columns are 1-based,
/// offset is a 0-based byte index.
struct SourceLocation {
    int line = 1;
    int column = 1;
    std::size_t offset = 0;

    friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

inline std::string to_string(const SourceLocation& loc) {
    return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

} // namespace muspark
