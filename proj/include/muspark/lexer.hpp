#pragma once

#include "muspark/diagnostics.hpp"
#include "muspark/source.hpp"

#include <optional>
#include <string>
#include <vector>

namespace muspark {

enum class TokenKind {
    Ident,
    IntLit,
    // keywords
    KwProcedure,
    KwIs,
    KwBegin,
    KwEnd,
    KwIf,
    KwThen,
    KwElse,
    KwType,
    KwRecord,
    KwAccess,
    KwNew,
    KwNull,
    KwIn,
    KwOut,
    KwAll,
    // punctuation
    Assign, // :=
    Colon,
    Semi,
    Dot,
    Comma,
    LParen,
    RParen,
    Tick, // '
    Star,
    Dash, // in "in-out"
    Eof,
};

std::string to_string(TokenKind k);

struct Token {
    TokenKind kind;
    std::string text; // identifier text / literal digits
    SourceLocation location;
};

struct LexResult {
    std::vector<Token> tokens; // always terminated by an Eof token on success
    std::optional<Diagnostic> error;
};

/// Splits source text into tokens. Identifiers are case-sensitive;
/// "--" comments run to end of line.
LexResult tokenize(const std::string& source);

} // namespace muspark
