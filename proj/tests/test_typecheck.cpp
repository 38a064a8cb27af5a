#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <muspark/parser.hpp>
#include <muspark/typecheck.hpp>

#include <algorithm>

using namespace muspark;

namespace {

Program parse_ok(const std::string& src) {
    ParseResult r = parse_source(src);
    if (!r.program) FAIL(r.error->message);
    return std::move(*r.program);
}

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
    return std::any_of(ds.begin(), ds.end(),
                       [&](const Diagnostic& d) { return d.code == code; });
}

const char* kRecSrc =
    "procedure M is type S is record a : integer; b : access integer; "
    "end record; V : access S; g : integer; begin g := 0; end;";

} // namespace

TEST_CASE("type equivalence: nulltype matches any access type") {
    const Type acc_int = Type::access(Type::integer());
    const Type acc_s = Type::access(Type::record("S"));
    CHECK(type_equiv(Type::null_type(), acc_int));
    CHECK(type_equiv(acc_int, Type::null_type()));
    CHECK(type_equiv(Type::null_type(), acc_s));
    CHECK(type_equiv(acc_int, acc_int));
    CHECK(!type_equiv(acc_int, acc_s));
    CHECK(!type_equiv(Type::null_type(), Type::integer()));
    CHECK(!type_equiv(Type::integer(), Type::record("S")));

    // same_as is stricter: nulltype is not structurally an access type.
    CHECK(!Type::null_type().same_as(acc_int));
    CHECK(acc_int.same_as(Type::access(Type::integer())));
}

TEST_CASE("is_deep: access parts, recursion through access terminates") {
    Program p = parse_ok(
        "procedure M is "
        "type L is record v : integer; next : access L; end record; "
        "type Flat is record x : integer; y : integer; end record; "
        "g : integer; begin g := 0; end;");
    CheckedProgram cp = check_program(p);
    REQUIRE(cp.ok());
    const Scope& sc = cp.scopes.begin()->second;
    CHECK(!is_deep(Type::integer(), sc));
    CHECK(is_deep(Type::access(Type::integer()), sc));
    CHECK(is_deep(Type::record("L"), sc)); // holds an access field
    CHECK(!is_deep(Type::record("Flat"), sc));
    CHECK(is_deep(Type::null_type(), sc));
}

TEST_CASE("type_of_name walks fields and dereferences") {
    Program p = parse_ok(kRecSrc);
    CheckedProgram cp = check_program(p);
    REQUIRE(cp.ok());
    const Scope& sc = cp.scopes.begin()->second;

    auto type_of = [&](Path path) -> Type {
        TypeOrDiag r = type_of_name(sc, path);
        if (const auto* d = std::get_if<Diagnostic>(&r)) FAIL(d->message);
        return std::get<Type>(r);
    };
    Path v{"V", {}, {}};
    CHECK(type_of(v).same_as(Type::access(Type::record("S"))));
    Path v_all{"V", {Selector::deref()}, {}};
    CHECK(type_of(v_all).same_as(Type::record("S")));
    Path v_all_b{"V", {Selector::deref(), Selector::make_field("b")}, {}};
    CHECK(type_of(v_all_b).same_as(Type::access(Type::integer())));

    Path bad_field{"V", {Selector::deref(), Selector::make_field("z")}, {}};
    TypeOrDiag r1 = type_of_name(sc, bad_field);
    REQUIRE(std::holds_alternative<Diagnostic>(r1));
    CHECK(std::get<Diagnostic>(r1).code == "no-such-field");

    Path bad_deref{"g", {Selector::deref()}, {}};
    TypeOrDiag r2 = type_of_name(sc, bad_deref);
    REQUIRE(std::holds_alternative<Diagnostic>(r2));
    CHECK(std::get<Diagnostic>(r2).code == "deref-of-non-access");

    Path unknown{"Nope", {}, {}};
    TypeOrDiag r3 = type_of_name(sc, unknown);
    REQUIRE(std::holds_alternative<Diagnostic>(r3));
    CHECK(std::get<Diagnostic>(r3).code == "unknown-variable");
}

TEST_CASE("type_of_expr: literals, null, 'Access") {
    Program p = parse_ok(kRecSrc);
    CheckedProgram cp = check_program(p);
    const Scope& sc = cp.scopes.begin()->second;

    Expr lit{IntLit{7}, {}};
    CHECK(std::get<Type>(type_of_expr(sc, lit)).same_as(Type::integer()));
    Expr nul{NullLit{}, {}};
    CHECK(std::get<Type>(type_of_expr(sc, nul)).same_as(Type::null_type()));
    Expr acc{AccessOf{Path{"V", {Selector::deref(), Selector::make_field("a")}, {}}}, {}};
    CHECK(std::get<Type>(type_of_expr(sc, acc)).same_as(Type::access(Type::integer())));
}

TEST_CASE("assignment type checking") {
    SUBCASE("null assignable to any access variable") {
        Program p = parse_ok("procedure M is X : access integer; begin X := null; end;");
        CHECK(check_program(p).ok());
    }
    SUBCASE("integer literal to access variable rejected") {
        Program p = parse_ok("procedure M is X : access integer; begin X := 7; end;");
        CheckedProgram cp = check_program(p);
        CHECK(has_code(cp.diagnostics, "type-mismatch"));
        CHECK(!cp.bad_stmts.empty());
    }
    SUBCASE("new of unknown type rejected") {
        Program p = parse_ok("procedure M is X : access integer; begin X := new Mystery; end;");
        CHECK(has_code(check_program(p).diagnostics, "unknown-type"));
    }
    SUBCASE("call arity and argument types") {
        Program p = parse_ok(
            "procedure M is procedure P(x : in integer) is t : integer; begin t := x; end; "
            "G : access integer; begin P(G); end;");
        CHECK(has_code(check_program(p).diagnostics, "type-mismatch"));
        Program q = parse_ok(
            "procedure M is procedure P(x : in integer) is t : integer; begin t := x; end; "
            "g : integer; begin P(g, g); end;");
        CHECK(has_code(check_program(q).diagnostics, "arity-mismatch"));
        Program r = parse_ok("procedure M is g : integer; begin Nope(g); end;");
        CHECK(has_code(check_program(r).diagnostics, "unknown-procedure"));
    }
}

TEST_CASE("legality: shadowing and duplicates") {
    SUBCASE("local shadows global") {
        Program p = parse_ok(
            "procedure M is g : integer; procedure P(a : in integer) is g : integer; "
            "begin g := 1; end; begin P(g); end;");
        CHECK(has_code(check_legality(p), "shadowing"));
    }
    SUBCASE("duplicate parameter names") {
        Program p = parse_ok(
            "procedure M is procedure P(a : in integer; a : in integer) is t : integer; "
            "begin t := 0; end; g : integer; begin P(g, g); end;");
        CHECK(has_code(check_legality(p), "duplicate-param"));
    }
    SUBCASE("duplicate record field") {
        Program p = parse_ok(
            "procedure M is type S is record a : integer; a : integer; end record; "
            "g : integer; begin g := 0; end;");
        CHECK(has_code(check_legality(p), "duplicate-field"));
    }
    SUBCASE("record self-reference must go through access") {
        Program bad = parse_ok(
            "procedure M is type S is record next : S; end record; g : integer; "
            "begin g := 0; end;");
        CHECK(has_code(check_legality(bad), "record-self-use"));
        Program good = parse_ok(
            "procedure M is type S is record next : access S; end record; g : integer; "
            "begin g := 0; end;");
        CHECK(!has_code(check_legality(good), "record-self-use"));
    }
}

TEST_CASE("legality: parameter modes") {
    SUBCASE("write to in-mode formal rejected") {
        Program p = parse_ok(
            "procedure M is procedure P(x : in integer) is begin x := 1; end; "
            "g : integer; begin P(g); end;");
        CHECK(has_code(check_legality(p), "write-to-in-formal"));
    }
    SUBCASE("in-out and out actuals must be names") {
        Program p = parse_ok(
            "procedure M is procedure P(x : in-out access integer) is begin x := null; end; "
            "begin P(null); end;");
        CHECK(has_code(check_legality(p), "actual-must-be-name"));
        Program q = parse_ok(
            "procedure M is procedure P(x : out integer) is begin x := 1; end; "
            "begin P(42); end;");
        CHECK(has_code(check_legality(q), "actual-must-be-name"));
    }
    SUBCASE("writing through an in formal's dereference is legal") {
        Program p = parse_ok(
            "procedure M is procedure P(x : in access integer) is begin x.all := 1; end; "
            "G : access integer; begin P(G); end;");
        CHECK(!has_code(check_legality(p), "write-to-in-formal"));
    }
    SUBCASE("passing an in formal as an in-out actual rejected") {
        Program p = parse_ok(
            "procedure M is procedure Q(y : in-out access integer) is begin y := null; end; "
            "procedure P(x : in access integer) is begin Q(x); end; "
            "G : access integer; begin P(G); end;");
        CHECK(has_code(check_legality(p), "write-to-in-formal"));
    }
}

TEST_CASE("check_program: scopes per procedure, bad statements flagged") {
    Program p = parse_ok(
        "procedure M is procedure P(x : in-out access integer) is begin x := null; end; "
        "A : access integer; begin begin A := new integer; P(A); end; end;");
    CheckedProgram cp = check_program(p);
    REQUIRE(cp.ok());
    CHECK(cp.scopes.size() == 2);
    CHECK(cp.procs.size() == 2);
    // Each scope sees what its body can reference.
    bool found_formal = false, found_global = false;
    for (const auto& [id, sc] : cp.scopes) {
        if (sc.vars.count("x")) found_formal = true;
        if (sc.vars.count("A")) found_global = true;
    }
    CHECK(found_formal);
    CHECK(found_global);

    Program bad = parse_ok("procedure M is X : access integer; begin X := 7; end;");
    CheckedProgram cb = check_program(bad);
    CHECK(!cb.ok());
    REQUIRE(cb.bad_stmts.size() == 1);
}

TEST_CASE("resolve_type_expr") {
    Program p = parse_ok(kRecSrc);
    CheckedProgram cp = check_program(p);
    const Scope& sc = cp.scopes.begin()->second;
    TypeExpr named{TypeExpr::Kind::Named, "S", {}};
    REQUIRE(resolve_type_expr(sc, named).has_value());
    CHECK(resolve_type_expr(sc, named)->same_as(Type::record("S")));
    TypeExpr acc{TypeExpr::Kind::AccessTo, "integer", {}};
    CHECK(resolve_type_expr(sc, acc)->same_as(Type::access(Type::integer())));
    TypeExpr bad{TypeExpr::Kind::Named, "Nope", {}};
    CHECK(!resolve_type_expr(sc, bad).has_value());
}
