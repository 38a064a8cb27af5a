#pragma once

#include "muspark/ast.hpp"
#include "muspark/diagnostics.hpp"
#include "muspark/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace muspark {

/// Purely syntactic legality conditions: name-only in-out/out actuals, no
/// writes to in-mode formals, no shadowing, no duplicate record fields,
/// record self-reference only under access type.
std::vector<Diagnostic> check_legality(const Program& p);

/// True iff t has an access part. Descent never crosses access types, so
/// this terminates on recursive records.
bool is_deep(const Type& t, const Scope& scope);

/// The smallest reflexive, symmetric relation with nulltype ≡ access tau.
bool type_equiv(const Type& a, const Type& b);

using TypeOrDiag = std::variant<Type, Diagnostic>;

TypeOrDiag type_of_name(const Scope& scope, const Path& path);
TypeOrDiag type_of_expr(const Scope& scope, const Expr& e);

std::vector<Diagnostic> check_stmt(const Scope& scope, const Stmt& s);

/// Semantic program context shared by borrowck and interp: the scope each
/// procedure body is checked in (keyed by ProcDecl id; the main procedure
/// uses its own id) and the set of statements rejected by typecheck.
struct CheckedProgram {
    std::map<int, Scope> scopes;
    std::map<int, const ProcDecl*> procs; // id -> declaration node
    std::vector<Diagnostic> diagnostics;
    std::vector<int> bad_stmts; // statements later phases must skip
    bool ok() const { return diagnostics.empty(); }
};

CheckedProgram check_program(const Program& p);

/// Converts a syntactic type expression against a scope.
std::optional<Type> resolve_type_expr(const Scope& scope, const TypeExpr& te);

} // namespace muspark
