#pragma once

#include "muspark/ast.hpp"
#include "muspark/diagnostics.hpp"
#include "muspark/lexer.hpp"

#include <optional>

namespace muspark {

struct ParseResult {
    std::optional<Program> program;
    std::optional<Diagnostic> error;
};

/// Recursive-descent parser over a token stream produced by tokenize().
ParseResult parse_program(const std::vector<Token>& tokens);

/// Convenience: tokenize then parse.
ParseResult parse_source(const std::string& source);

} // namespace muspark
