#include "muspark/lexer.hpp"

#include <cctype>
#include <map>

namespace muspark {

std::string to_string(TokenKind k) {
    switch (k) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::IntLit: return "integer literal";
    case TokenKind::KwProcedure: return "'procedure'";
    case TokenKind::KwIs: return "'is'";
    case TokenKind::KwBegin: return "'begin'";
    case TokenKind::KwEnd: return "'end'";
    case TokenKind::KwIf: return "'if'";
    case TokenKind::KwThen: return "'then'";
    case TokenKind::KwElse: return "'else'";
    case TokenKind::KwType: return "'type'";
    case TokenKind::KwRecord: return "'record'";
    case TokenKind::KwAccess: return "'access'";
    case TokenKind::KwNew: return "'new'";
    case TokenKind::KwNull: return "'null'";
    case TokenKind::KwIn: return "'in'";
    case TokenKind::KwOut: return "'out'";
    case TokenKind::KwAll: return "'all'";
    case TokenKind::Assign: return "':='";
    case TokenKind::Colon: return "':'";
    case TokenKind::Semi: return "';'";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Comma: return "','";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Tick: return "'''";
    case TokenKind::Star: return "'*'";
    case TokenKind::Dash: return "'-'";
    case TokenKind::Eof: return "end of input";
    }
    return "?";
}

namespace {

const std::map<std::string, TokenKind>& keywords() {
    static const std::map<std::string, TokenKind> kw = {
        {"procedure", TokenKind::KwProcedure}, {"is", TokenKind::KwIs},
        {"begin", TokenKind::KwBegin},         {"end", TokenKind::KwEnd},
        {"if", TokenKind::KwIf},               {"then", TokenKind::KwThen},
        {"else", TokenKind::KwElse},           {"type", TokenKind::KwType},
        {"record", TokenKind::KwRecord},       {"access", TokenKind::KwAccess},
        {"new", TokenKind::KwNew},             {"null", TokenKind::KwNull},
        {"in", TokenKind::KwIn},               {"out", TokenKind::KwOut},
        {"all", TokenKind::KwAll},
    };
    return kw;
}

} // namespace

LexResult tokenize(const std::string& src) {
    LexResult out;
    SourceLocation loc;
    std::size_t i = 0;
    const auto advance = [&](std::size_t n = 1) {
        for (std::size_t k = 0; k < n; ++k) {
            if (i < src.size() && src[i] == '\n') {
                ++loc.line;
                loc.column = 1;
            } else {
                ++loc.column;
            }
            ++i;
            ++loc.offset;
        }
    };

    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance();
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance();
            continue;
        }
        const SourceLocation start = loc;
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string text;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
                text += src[i];
                advance();
            }
            const auto it = keywords().find(text);
            if (it != keywords().end())
                out.tokens.push_back({it->second, text, start});
            else
                out.tokens.push_back({TokenKind::Ident, text, start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string text;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                text += src[i];
                advance();
            }
            out.tokens.push_back({TokenKind::IntLit, text, start});
            continue;
        }
        if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
            advance(2);
            out.tokens.push_back({TokenKind::Assign, ":=", start});
            continue;
        }
        TokenKind kind;
        switch (c) {
        case ':': kind = TokenKind::Colon; break;
        case ';': kind = TokenKind::Semi; break;
        case '.': kind = TokenKind::Dot; break;
        case ',': kind = TokenKind::Comma; break;
        case '(': kind = TokenKind::LParen; break;
        case ')': kind = TokenKind::RParen; break;
        case '\'': kind = TokenKind::Tick; break;
        case '*': kind = TokenKind::Star; break;
        case '-': kind = TokenKind::Dash; break;
        default: {
            Diagnostic d;
            d.rule = "lex";
            d.code = "lex-error";
            d.location = start;
            d.message = std::string("unexpected character '") + c + "'";
            out.error = std::move(d);
            return out;
        }
        }
        advance();
        out.tokens.push_back({kind, std::string(1, c), start});
    }
    out.tokens.push_back({TokenKind::Eof, "", loc});
    return out;
}

} // namespace muspark
