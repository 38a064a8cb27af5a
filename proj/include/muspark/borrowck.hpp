#pragma once

#include "muspark/ast.hpp"
#include "muspark/diagnostics.hpp"
#include "muspark/permission.hpp"
#include "muspark/typecheck.hpp"

#include <map>
#include <string>
#include <vector>

namespace muspark {

/// Seeded rule defects for mutation testing of the soundness oracle.
enum class RuleMutation {
    None,
    AccessMoveAsPlainMove,      // 'Access moves degrade to plain moves
    BorrowKeepsExtensions,      // borrows do not restrict prefixes/extensions
    MoveKeepsMoreDerefs,        // moves leave deeper indirections readable
    ObserveKeepsPerm,           // observes leave permissions untouched
    AssignAccessKeepsExtensions,// 'Access assignment skips the NO extension sweep
    FusionUsesLub,              // branch merge joins instead of meets
};

struct BorrowckOptions {
    RuleMutation mutation = RuleMutation::None;
};

/// Per-program-point permission environments. Point ids:
///   stmt:<id>:pre / stmt:<id>:post
///   call:<id>:chained          (caller env after the observe/borrow chain)
///   call:<id>:transfer         (callee entry env)
///   proc:<id>:entry / proc:<id>:exit
///   decl:<stmt-less id> is not used; declarations snapshot via proc entry.
using PermSnapshot = std::map<std::string, PermEnv>;

struct CheckReport {
    std::vector<Diagnostic> diagnostics;
    PermSnapshot snapshots;
    bool accepted = false; // accepted <=> diagnostics empty
};

// Rule-level entry points (exposed for unit tests and the oracle).

/// P-M-*: the path and every strict prefix become W.
void move_name(PermEnv& env, const Path& p);
/// P-SM-*: the path goes to NO; prefixes within the same indirection level
/// go to NO, prefixes across a deref degrade to W.
void access_move_name(PermEnv& env, const Path& p);

struct BorrowCheckContext; // internal

/// Full analysis: legality, typecheck, then the permission rules over every
/// procedure declaration and the main body.
CheckReport analyze(const Program& p, const BorrowckOptions& opts = {});

/// Runs the permission rules for a single statement against an explicit
/// environment (unit-test surface; diagnostics appended, snapshots keyed as
/// in analyze()).
PermEnv check_stmt_perm(const Scope& scope, PermEnv env, const Stmt& s,
                        std::vector<Diagnostic>& diags, PermSnapshot& snaps,
                        const BorrowckOptions& opts = {});

} // namespace muspark
