#pragma once

#include "muspark/ast.hpp"
#include "muspark/types.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace muspark {

// ---------------------------------------------------------------------------
// The permission lattice {RW, R, W, NO}
// ---------------------------------------------------------------------------

enum class Perm : unsigned char { No = 0, R = 1, W = 2, Rw = 3 };

Perm glb(Perm a, Perm b);
Perm lub(Perm a, Perm b);
/// Partial order: NO < R < RW, NO < W < RW; R and W incomparable.
bool perm_leq(Perm a, Perm b);
bool readable(Perm p);  // p in {R, RW}
bool writable(Perm p);  // p in {W, RW}
std::string to_string(Perm p);

// ---------------------------------------------------------------------------
// Lazy permission trees
// ---------------------------------------------------------------------------

/// A (conceptually infinite) tree assigning a permission to every path
/// extension. A Thunk stands for a whole unevaluated subtree whose root
/// carries `perm` and whose strict descendants carry `deep_children_perm`
/// or `shallow_children_perm` according to the deepness of their type (the
/// two coincide for uniform subtrees); dethunking materializes one level
/// at a time, so trees over recursive record types stay finite. The split
/// keeps the borrow entry rules (deep extensions NO, shallow extensions R)
/// representable without forcing the tree.
struct PermTree {
    enum class Kind { Thunk, Record, Access, Int } kind = Kind::Thunk;
    Perm perm = Perm::No;
    bool deep = false;
    Perm deep_children_perm = Perm::No;                   // Thunk
    Perm shallow_children_perm = Perm::No;                // Thunk
    std::vector<std::pair<std::string, PermTree>> fields; // Record, declaration order
    std::vector<PermTree> child;                          // Access, size 1

    static PermTree thunk(Perm node, bool deep, Perm children) {
        PermTree t;
        t.kind = Kind::Thunk;
        t.perm = node;
        t.deep = deep;
        t.deep_children_perm = children;
        t.shallow_children_perm = children;
        return t;
    }
};

/// Permission environment Φ: variable name -> (type, permission tree).
/// Value semantics; copies are independent (branch analysis relies on it).
struct PermEnv {
    std::shared_ptr<const Scope> scope; // record table used for dethunking
    std::map<std::string, std::pair<Type, PermTree>> vars;

    bool has(const std::string& name) const { return vars.count(name) != 0; }
};

/// Which extensions of a path an update applies to.
enum class ExtFilter {
    AllStrict,          // every strict extension
    MoreDerefs,         // strict extensions with more .all than the path
    DeepSameDerefs,     // deep-typed extensions with the same number of .all
    ShallowSameDerefs,  // shallow-typed extensions with the same number of .all
    DeepAnyDerefs,      // deep-typed extensions at any depth (borrow rules)
    ShallowAnyDerefs,   // shallow-typed extensions at any depth (borrow rules)
};

/// A tree every node of which (lazily) carries kappa.
PermTree pfresh(const Type& t, const Scope& scope, Perm kappa);

/// Node permission at p, dethunking as needed. p must match the tree's
/// type shape; a mismatch is an internal contract violation.
Perm lookup(PermEnv& env, const Path& p);

/// Changes exactly the node at p.
void set_node(PermEnv& env, const Path& p, Perm kappa);
/// Replaces the whole subtree at p by a uniform kappa tree (collapses to a
/// Thunk).
void set_subtree(PermEnv& env, const Path& p, Perm kappa);
/// Updates the strict extensions of p selected by the filter.
void set_extensions(PermEnv& env, const Path& p, Perm kappa, ExtFilter filter);

/// Bottom-up normalization: each record/access node permission becomes
/// kappa ∨ glb(children). Identity on Int nodes; on a Thunk the children
/// contribution is computed from the type without forcing the subtree.
void perm_release(PermEnv& env);

/// Pointwise glb of two environments over the same variables (lub when
/// use_lub is set; only the mutation-testing harness asks for that).
PermEnv fusion(const PermEnv& a, const PermEnv& b, bool use_lub = false);

/// node.perm >= glb(children perms) on every materialized node.
bool is_normalized(const PermEnv& env);
/// R nodes have all-R children, RW nodes all-RW children.
bool readability_holds(const PermEnv& env);

/// Deterministic textual rendering: one "path: PERM" line per materialized
/// node, sorted by variable then pre-order.
std::string dump(const PermEnv& env);

} // namespace muspark
