#pragma once

#include "muspark/source.hpp"

#include <optional>
#include <string>
#include <vector>

namespace muspark {

/// Structured report of a rule violation.
///
/// `rule` is the identifier of the violated rule ("P-assignDeepName",
/// "T-assignExpr", ...), `code` a short slug suitable for matching in
/// tests ("borrow-requires-rw", "type-mismatch", ...).
struct Diagnostic {
    std::string rule;
    std::string code;
    std::string path;               // offending path rendering, may be empty
    std::vector<std::string> required; // permission set required by the rule
    std::string actual;             // actual permission, may be empty
    SourceLocation location;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::string format_diagnostic(const Diagnostic& d);

} // namespace muspark
