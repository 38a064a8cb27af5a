#pragma once

#include "muspark/source.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace muspark {

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// One step of a path: either a record field selection or a `.all`
/// dereference.
struct Selector {
    enum class Kind { Field, Deref } kind;
    std::string field; // valid when kind == Field

    static Selector make_field(std::string name) { return {Kind::Field, std::move(name)}; }
    static Selector deref() { return {Kind::Deref, {}}; }

    friend bool operator==(const Selector&, const Selector&) = default;
};

/// A base identifier followed by field/dereference selectors; the unit at
/// which permissions are tracked.
struct Path {
    std::string base;
    std::vector<Selector> selectors;
    SourceLocation location;

    bool operator==(const Path& other) const {
        return base == other.base && selectors == other.selectors;
    }

    int deref_count() const;
    /// Path without its final selector. Precondition: !selectors.empty().
    Path parent() const;
    /// True iff *this is a strict prefix of q.
    bool is_strict_prefix_of(const Path& q) const;
    std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct NullLit {};
struct IntLit {
    long long value = 0;
};
struct NameRef {
    Path path;
};
struct AccessOf {
    Path path; // grammar: <name>'Access
};

struct Expr {
    std::variant<NullLit, IntLit, NameRef, AccessOf> node;
    SourceLocation location;
};

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct AssignStmt {
    Path target;
    Expr rhs;
};
struct AssignNewStmt {
    Path target;
    std::string type_name;
};
struct CallStmt {
    std::string callee;
    std::vector<Expr> actuals;
};
struct IfStmt { // "if * then" -- branching is non-deterministic
    StmtPtr then_branch;
    StmtPtr else_branch;
};
struct BlockStmt {
    std::vector<StmtPtr> stmts;
};

struct Stmt {
    std::variant<AssignStmt, AssignNewStmt, CallStmt, IfStmt, BlockStmt> node;
    SourceLocation location;
    int id = -1; // unique per program, assigned by the parser
};

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

enum class Mode { In, InOut, Out };

std::string to_string(Mode m);

/// Syntactic type expression: a named type or `access <ident>`.
struct TypeExpr {
    enum class Kind { Named, AccessTo } kind;
    std::string name;
    SourceLocation location;
};

struct Decl;
using DeclPtr = std::unique_ptr<Decl>;

struct RecordDecl {
    std::string name;
    std::vector<std::pair<std::string, TypeExpr>> fields;
};
struct VarDecl {
    std::string name;
    TypeExpr type;
};
struct Param {
    std::string name;
    Mode mode;
    TypeExpr type;
    SourceLocation location;
};
struct ProcDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<DeclPtr> decls;
    StmtPtr body;
    int id = -1; // unique per program
};

struct Decl {
    std::variant<RecordDecl, VarDecl, ProcDecl> node;
    SourceLocation location;
};

/// A µSPARK compilation unit: exactly one file-level procedure.
struct Program {
    ProcDecl main;
};

// Deep copies; statement and procedure ids are preserved.
Expr clone(const Expr& e);
StmtPtr clone(const Stmt& s);
DeclPtr clone(const Decl& d);
Program clone(const Program& p);

/// Renders a program back to parseable source text.
std::string pretty_print(const Program& p);

/// Structural equality ignoring source locations and node ids.
bool ast_equal(const Program& a, const Program& b);

} // namespace muspark
