#include "muspark/parser.hpp"

#include <cstdlib>

namespace muspark {

namespace {

struct Parser {
    const std::vector<Token>& toks;
    std::size_t pos = 0;
    int next_stmt_id = 0;
    int next_proc_id = 0;
    std::optional<Diagnostic> error;

    const Token& peek(std::size_t n = 0) const {
        const std::size_t idx = std::min(pos + n, toks.size() - 1);
        return toks[idx];
    }
    bool at(TokenKind k) const { return peek().kind == k; }
    Token take() { return toks[std::min(pos++, toks.size() - 1)]; }

    void fail(const std::string& expected) {
        if (error) return;
        Diagnostic d;
        d.rule = "parse";
        d.code = "parse-error";
        d.location = peek().location;
        d.message = "expected " + expected + ", found " + to_string(peek().kind);
        error = std::move(d);
    }

    bool expect(TokenKind k) {
        if (at(k)) {
            take();
            return true;
        }
        fail(to_string(k));
        return false;
    }

    std::string expect_ident() {
        if (at(TokenKind::Ident)) return take().text;
        fail("identifier");
        return {};
    }

    // <name> ::= <ident> | <name> . <ident> | <name> . all
    Path parse_path() {
        Path p;
        p.location = peek().location;
        p.base = expect_ident();
        while (!error && at(TokenKind::Dot)) {
            take();
            if (at(TokenKind::KwAll)) {
                take();
                p.selectors.push_back(Selector::deref());
            } else {
                p.selectors.push_back(Selector::make_field(expect_ident()));
            }
        }
        return p;
    }

    Expr parse_expr() {
        Expr e;
        e.location = peek().location;
        if (at(TokenKind::KwNull)) {
            take();
            e.node = NullLit{};
            return e;
        }
        if (at(TokenKind::IntLit)) {
            e.node = IntLit{std::strtoll(take().text.c_str(), nullptr, 10)};
            return e;
        }
        Path p = parse_path();
        if (at(TokenKind::Tick)) {
            take();
            const std::string attr = expect_ident();
            if (!error && attr != "Access") fail("'Access attribute");
            e.node = AccessOf{std::move(p)};
        } else {
            e.node = NameRef{std::move(p)};
        }
        return e;
    }

    StmtPtr parse_stmt() {
        auto s = std::make_unique<Stmt>();
        s->location = peek().location;
        s->id = next_stmt_id++;
        if (at(TokenKind::KwIf)) {
            take();
            expect(TokenKind::Star);
            expect(TokenKind::KwThen);
            auto then_branch = parse_stmt();
            expect(TokenKind::KwElse);
            auto else_branch = parse_stmt();
            expect(TokenKind::KwEnd);
            expect(TokenKind::KwIf);
            expect(TokenKind::Semi);
            s->node = IfStmt{std::move(then_branch), std::move(else_branch)};
            return s;
        }
        if (at(TokenKind::KwBegin)) {
            take();
            BlockStmt b;
            do {
                b.stmts.push_back(parse_stmt());
            } while (!error && !at(TokenKind::KwEnd));
            expect(TokenKind::KwEnd);
            expect(TokenKind::Semi);
            s->node = std::move(b);
            return s;
        }
        // call: <ident> ( expr+, ) ;
        if (at(TokenKind::Ident) && peek(1).kind == TokenKind::LParen) {
            CallStmt c;
            c.callee = take().text;
            take(); // (
            c.actuals.push_back(parse_expr());
            while (!error && at(TokenKind::Comma)) {
                take();
                c.actuals.push_back(parse_expr());
            }
            expect(TokenKind::RParen);
            expect(TokenKind::Semi);
            s->node = std::move(c);
            return s;
        }
        // assignment
        Path target = parse_path();
        expect(TokenKind::Assign);
        if (at(TokenKind::KwNew)) {
            take();
            std::string type_name = expect_ident();
            expect(TokenKind::Semi);
            s->node = AssignNewStmt{std::move(target), std::move(type_name)};
            return s;
        }
        Expr rhs = parse_expr();
        expect(TokenKind::Semi);
        s->node = AssignStmt{std::move(target), std::move(rhs)};
        return s;
    }

    TypeExpr parse_type_expr() {
        TypeExpr te;
        te.location = peek().location;
        if (at(TokenKind::KwAccess)) {
            take();
            te.kind = TypeExpr::Kind::AccessTo;
        } else {
            te.kind = TypeExpr::Kind::Named;
        }
        te.name = expect_ident();
        return te;
    }

    // <mode> ::= in | in-out | in out | out
    Mode parse_mode() {
        if (at(TokenKind::KwOut)) {
            take();
            return Mode::Out;
        }
        expect(TokenKind::KwIn);
        if (at(TokenKind::Dash)) {
            take();
            expect(TokenKind::KwOut);
            return Mode::InOut;
        }
        if (at(TokenKind::KwOut)) {
            take();
            return Mode::InOut;
        }
        return Mode::In;
    }

    DeclPtr parse_decl() {
        auto d = std::make_unique<Decl>();
        d->location = peek().location;
        if (at(TokenKind::KwType)) {
            take();
            RecordDecl r;
            r.name = expect_ident();
            expect(TokenKind::KwIs);
            expect(TokenKind::KwRecord);
            do {
                std::string fname = expect_ident();
                expect(TokenKind::Colon);
                TypeExpr ftype = parse_type_expr();
                expect(TokenKind::Semi);
                r.fields.emplace_back(std::move(fname), std::move(ftype));
            } while (!error && !at(TokenKind::KwEnd));
            expect(TokenKind::KwEnd);
            expect(TokenKind::KwRecord);
            expect(TokenKind::Semi);
            d->node = std::move(r);
            return d;
        }
        if (at(TokenKind::KwProcedure)) {
            d->node = parse_proc();
            return d;
        }
        VarDecl v;
        v.name = expect_ident();
        expect(TokenKind::Colon);
        v.type = parse_type_expr();
        expect(TokenKind::Semi);
        d->node = std::move(v);
        return d;
    }

    ProcDecl parse_proc() {
        ProcDecl p;
        p.id = next_proc_id++;
        expect(TokenKind::KwProcedure);
        p.name = expect_ident();
        if (at(TokenKind::LParen)) {
            take();
            do {
                Param param;
                param.location = peek().location;
                param.name = expect_ident();
                expect(TokenKind::Colon);
                param.mode = parse_mode();
                param.type = parse_type_expr();
                p.params.push_back(std::move(param));
                if (at(TokenKind::Semi))
                    take();
                else
                    break;
            } while (!error);
            expect(TokenKind::RParen);
        }
        expect(TokenKind::KwIs);
        while (!error && !at(TokenKind::KwBegin)) p.decls.push_back(parse_decl());
        expect(TokenKind::KwBegin);
        p.body = parse_stmt();
        expect(TokenKind::KwEnd);
        expect(TokenKind::Semi);
        return p;
    }
};

} // namespace

ParseResult parse_program(const std::vector<Token>& tokens) {
    ParseResult out;
    Parser p{tokens, 0, 0, 0, std::nullopt};
    Program prog;
    prog.main = p.parse_proc();
    if (!p.error && !p.at(TokenKind::Eof)) p.fail("end of input");
    if (p.error) {
        out.error = p.error;
        return out;
    }
    out.program = std::move(prog);
    return out;
}

ParseResult parse_source(const std::string& source) {
    LexResult lexed = tokenize(source);
    if (lexed.error) {
        ParseResult out;
        out.error = lexed.error;
        return out;
    }
    return parse_program(lexed.tokens);
}

} // namespace muspark
