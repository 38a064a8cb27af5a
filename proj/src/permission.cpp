#include "muspark/permission.hpp"

#include "muspark/typecheck.hpp"

#include <cassert>
#include <set>
#include <sstream>

namespace muspark {

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------
//
// Encoding: NO = 00, R = 01, W = 10, RW = 11 — the lattice is the product of
// the read bit and the write bit, so glb/lub are bitwise and/or.

Perm glb(Perm a, Perm b) {
    return static_cast<Perm>(static_cast<unsigned>(a) & static_cast<unsigned>(b));
}

Perm lub(Perm a, Perm b) {
    return static_cast<Perm>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}

bool perm_leq(Perm a, Perm b) { return glb(a, b) == a; }

bool readable(Perm p) { return p == Perm::R || p == Perm::Rw; }
bool writable(Perm p) { return p == Perm::W || p == Perm::Rw; }

std::string to_string(Perm p) {
    switch (p) {
    case Perm::No: return "NO";
    case Perm::R: return "R";
    case Perm::W: return "W";
    case Perm::Rw: return "RW";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Type helpers shared by the tree operations
// ---------------------------------------------------------------------------

namespace {

bool has_children(const Type& ty, const Scope& scope) {
    switch (ty.kind) {
    case Type::Kind::Integer:
    case Type::Kind::Null: return false;
    case Type::Kind::Access: return true;
    case Type::Kind::Record: {
        const auto it = scope.records.find(ty.record_name);
        return it != scope.records.end() && !it->second.fields.empty();
    }
    }
    return false;
}

std::vector<Type> child_types(const Type& ty, const Scope& scope) {
    std::vector<Type> out;
    if (ty.kind == Type::Kind::Access) {
        out.push_back(*ty.inner);
    } else if (ty.kind == Type::Kind::Record) {
        const auto it = scope.records.find(ty.record_name);
        if (it != scope.records.end())
            for (const auto& [fname, ftype] : it->second.fields) out.push_back(ftype);
    }
    return out;
}

/// Visits each distinct type reachable inside a subtree of type `ty`
/// (including `ty` itself), once per structural identity.
template <typename F>
void for_each_reachable_type(const Type& ty, const Scope& scope, F&& fn) {
    std::set<std::string> seen;
    std::vector<Type> work{ty};
    while (!work.empty()) {
        Type cur = work.back();
        work.pop_back();
        if (!seen.insert(cur.to_string()).second) continue;
        fn(cur);
        for (const Type& c : child_types(cur, scope)) work.push_back(c);
    }
}

Perm class_perm(const PermTree& thunk, const Type& ty, const Scope& scope) {
    return is_deep(ty, scope) ? thunk.deep_children_perm : thunk.shallow_children_perm;
}

/// Materializes one level of a thunk in place; children become thunks (or
/// Int leaves) carrying their class permission.
void dethunk(PermTree& t, const Type& ty, const Scope& scope) {
    if (t.kind != PermTree::Kind::Thunk) return;
    const Perm node_perm = t.perm;
    const Perm dcp = t.deep_children_perm;
    const Perm scp = t.shallow_children_perm;
    const auto make_child = [&](const Type& cty) {
        const Perm cp = is_deep(cty, scope) ? dcp : scp;
        if (cty.kind == Type::Kind::Integer) {
            PermTree leaf;
            leaf.kind = PermTree::Kind::Int;
            leaf.perm = cp;
            return leaf;
        }
        PermTree child = PermTree::thunk(cp, is_deep(cty, scope), cp);
        child.deep_children_perm = dcp;
        child.shallow_children_perm = scp;
        return child;
    };
    switch (ty.kind) {
    case Type::Kind::Integer:
    case Type::Kind::Null: t.kind = PermTree::Kind::Int; break;
    case Type::Kind::Access:
        t.kind = PermTree::Kind::Access;
        t.child.push_back(make_child(*ty.inner));
        break;
    case Type::Kind::Record: {
        t.kind = PermTree::Kind::Record;
        const auto it = scope.records.find(ty.record_name);
        if (it != scope.records.end())
            for (const auto& [fname, ftype] : it->second.fields)
                t.fields.emplace_back(fname, make_child(ftype));
        break;
    }
    }
    t.perm = node_perm;
    t.deep = is_deep(ty, scope);
}

struct Cursor {
    PermTree* tree;
    Type type;
};

Cursor navigate(PermEnv& env, const Path& p) {
    auto it = env.vars.find(p.base);
    assert(it != env.vars.end() && "permission lookup of undeclared variable");
    PermTree* t = &it->second.second;
    Type ty = it->second.first;
    const Scope& scope = *env.scope;
    for (const auto& sel : p.selectors) {
        dethunk(*t, ty, scope);
        if (sel.kind == Selector::Kind::Deref) {
            assert(t->kind == PermTree::Kind::Access);
            t = &t->child.front();
            ty = *ty.inner;
        } else {
            assert(t->kind == PermTree::Kind::Record);
            PermTree* next = nullptr;
            for (auto& [fname, ftree] : t->fields)
                if (fname == sel.field) next = &ftree;
            assert(next && "permission lookup of unknown field");
            const auto rec = env.scope->records.find(ty.record_name);
            ty = *rec->second.field_type(sel.field);
            t = next;
        }
    }
    return {t, ty};
}

bool filter_applies(ExtFilter f, const Type& ty, int derefs, const Scope& scope) {
    switch (f) {
    case ExtFilter::AllStrict: return true;
    case ExtFilter::MoreDerefs: return derefs > 0;
    case ExtFilter::DeepSameDerefs: return derefs == 0 && is_deep(ty, scope);
    case ExtFilter::ShallowSameDerefs: return derefs == 0 && !is_deep(ty, scope);
    case ExtFilter::DeepAnyDerefs: return is_deep(ty, scope);
    case ExtFilter::ShallowAnyDerefs: return !is_deep(ty, scope);
    }
    return false;
}

/// Updates the strict descendants of t (never t itself).
void apply_ext(PermTree& t, const Type& ty, int derefs, Perm kappa, ExtFilter f,
               const Scope& scope) {
    if (t.kind == PermTree::Kind::Int) return;
    if (t.kind == PermTree::Kind::Thunk) {
        switch (f) {
        case ExtFilter::AllStrict:
            t.deep_children_perm = kappa;
            t.shallow_children_perm = kappa;
            return;
        case ExtFilter::MoreDerefs:
            if (derefs > 0) {
                t.deep_children_perm = kappa;
                t.shallow_children_perm = kappa;
                return;
            }
            break; // same-deref prefix: materialize and descend
        case ExtFilter::DeepSameDerefs:
        case ExtFilter::ShallowSameDerefs:
            if (derefs > 0 || ty.kind == Type::Kind::Access)
                return; // no same-deref strict extension in this subtree
            break;
        case ExtFilter::DeepAnyDerefs: t.deep_children_perm = kappa; return;
        case ExtFilter::ShallowAnyDerefs: t.shallow_children_perm = kappa; return;
        }
        dethunk(t, ty, scope);
    }
    if (t.kind == PermTree::Kind::Access) {
        PermTree& child = t.child.front();
        const Type& cty = *ty.inner;
        if (filter_applies(f, cty, derefs + 1, scope)) child.perm = kappa;
        apply_ext(child, cty, derefs + 1, kappa, f, scope);
    } else if (t.kind == PermTree::Kind::Record) {
        const auto it = scope.records.find(ty.record_name);
        if (it == scope.records.end()) return;
        for (auto& [fname, ftree] : t.fields) {
            const Type& fty = *it->second.field_type(fname);
            if (filter_applies(f, fty, derefs, scope)) ftree.perm = kappa;
            apply_ext(ftree, fty, derefs, kappa, f, scope);
        }
    }
}

// ---------------------------------------------------------------------------
// Release
// ---------------------------------------------------------------------------

/// Least-fixpoint released permission of a node of each type inside a
/// thunk region (every node carries its class permission). For uniform
/// thunks this degenerates to the class permission itself.
struct ReleasedClass {
    const Scope& scope;
    Perm dcp, scp;
    std::map<std::string, Perm> value;

    Perm of(const Type& ty) {
        const Perm base =
            is_deep(ty, scope) ? dcp : scp;
        auto [it, fresh] = value.emplace(ty.to_string(), base);
        if (!fresh) return it->second;
        // Iterate to a fixpoint over the finite set of reachable types.
        bool changed = true;
        while (changed) {
            changed = false;
            for_each_reachable_type(ty, scope, [&](const Type& u) {
                const Perm cur = value.emplace(u.to_string(),
                                               is_deep(u, scope) ? dcp : scp)
                                     .first->second;
                const auto kids = child_types(u, scope);
                if (kids.empty()) return;
                Perm k = Perm::Rw;
                for (const Type& c : kids)
                    k = glb(k, value.emplace(c.to_string(),
                                             is_deep(c, scope) ? dcp : scp)
                                   .first->second);
                const Perm next = lub(cur, k);
                if (next != cur) {
                    value[u.to_string()] = next;
                    changed = true;
                }
            });
        }
        return value[ty.to_string()];
    }
};

Perm release_tree(PermTree& t, const Type& ty, const Scope& scope) {
    switch (t.kind) {
    case PermTree::Kind::Int: return t.perm;
    case PermTree::Kind::Thunk: {
        if (!has_children(ty, scope)) return t.perm;
        ReleasedClass rc{scope, t.deep_children_perm, t.shallow_children_perm, {}};
        Perm k = Perm::Rw;
        for (const Type& c : child_types(ty, scope)) k = glb(k, rc.of(c));
        t.perm = lub(t.perm, k);
        return t.perm;
    }
    case PermTree::Kind::Access: {
        const Perm child = release_tree(t.child.front(), *ty.inner, scope);
        t.perm = lub(t.perm, child);
        return t.perm;
    }
    case PermTree::Kind::Record: {
        const auto it = scope.records.find(ty.record_name);
        if (it == scope.records.end() || t.fields.empty()) return t.perm;
        Perm k = Perm::Rw;
        for (auto& [fname, ftree] : t.fields)
            k = glb(k, release_tree(ftree, *it->second.field_type(fname), scope));
        t.perm = lub(t.perm, k);
        return t.perm;
    }
    }
    return t.perm;
}

// ---------------------------------------------------------------------------
// Fusion
// ---------------------------------------------------------------------------

PermTree fuse_tree(const PermTree& a, const PermTree& b, const Type& ty,
                   const Scope& scope, Perm (*combine)(Perm, Perm)) {
    if (a.kind == PermTree::Kind::Thunk && b.kind == PermTree::Kind::Thunk) {
        PermTree r = a;
        r.perm = combine(a.perm, b.perm);
        r.deep_children_perm = combine(a.deep_children_perm, b.deep_children_perm);
        r.shallow_children_perm = combine(a.shallow_children_perm, b.shallow_children_perm);
        return r;
    }
    PermTree ma = a, mb = b;
    dethunk(ma, ty, scope);
    dethunk(mb, ty, scope);
    PermTree r = ma;
    r.perm = combine(ma.perm, mb.perm);
    if (r.kind == PermTree::Kind::Access) {
        r.child.front() =
            fuse_tree(ma.child.front(), mb.child.front(), *ty.inner, scope, combine);
    } else if (r.kind == PermTree::Kind::Record) {
        const auto it = scope.records.find(ty.record_name);
        for (std::size_t i = 0; i < r.fields.size(); ++i)
            r.fields[i].second =
                fuse_tree(ma.fields[i].second, mb.fields[i].second,
                          *it->second.field_type(r.fields[i].first), scope, combine);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Invariant checks
// ---------------------------------------------------------------------------

/// Checks a thunk region: `ok(node perm, child perms)` must hold for the
/// region root (which carries t.perm) and for every interior node, whose
/// permission is determined by its type class.
template <typename F>
bool check_thunk_region(const PermTree& t, const Type& ty, const Scope& scope, F&& ok) {
    bool good = true;
    const auto child_cps = [&](const Type& u) {
        std::vector<Perm> cps;
        for (const Type& c : child_types(u, scope)) cps.push_back(class_perm(t, c, scope));
        return cps;
    };
    if (const auto root_cps = child_cps(ty); !root_cps.empty() && !ok(t.perm, root_cps))
        good = false;
    // Interior nodes: every type reachable from the root's children.
    for (const Type& start : child_types(ty, scope))
        for_each_reachable_type(start, scope, [&](const Type& u) {
            const auto cps = child_cps(u);
            if (!cps.empty() && !ok(class_perm(t, u, scope), cps)) good = false;
        });
    return good;
}

template <typename F>
bool check_tree(const PermTree& t, const Type& ty, const Scope& scope, F&& ok) {
    switch (t.kind) {
    case PermTree::Kind::Int: return true;
    case PermTree::Kind::Thunk:
        if (!has_children(ty, scope)) return true;
        return check_thunk_region(t, ty, scope, ok);
    case PermTree::Kind::Access: {
        std::vector<Perm> cps{t.child.front().perm};
        if (!ok(t.perm, cps)) return false;
        return check_tree(t.child.front(), *ty.inner, scope, ok);
    }
    case PermTree::Kind::Record: {
        if (t.fields.empty()) return true;
        const auto it = scope.records.find(ty.record_name);
        std::vector<Perm> cps;
        for (const auto& [fname, ftree] : t.fields) cps.push_back(ftree.perm);
        if (!ok(t.perm, cps)) return false;
        for (const auto& [fname, ftree] : t.fields)
            if (!check_tree(ftree, *it->second.field_type(fname), scope, ok))
                return false;
        return true;
    }
    }
    return true;
}

void dump_tree(std::ostringstream& out, const PermTree& t, const std::string& path) {
    out << path << ": " << to_string(t.perm) << "\n";
    if (t.kind == PermTree::Kind::Record)
        for (const auto& [fname, ftree] : t.fields) dump_tree(out, ftree, path + "." + fname);
    else if (t.kind == PermTree::Kind::Access)
        dump_tree(out, t.child.front(), path + ".all");
}

} // namespace

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

PermTree pfresh(const Type& t, const Scope& scope, Perm kappa) {
    if (t.kind == Type::Kind::Integer || t.kind == Type::Kind::Null) {
        PermTree leaf;
        leaf.kind = PermTree::Kind::Int;
        leaf.perm = kappa;
        return leaf;
    }
    return PermTree::thunk(kappa, is_deep(t, scope), kappa);
}

Perm lookup(PermEnv& env, const Path& p) { return navigate(env, p).tree->perm; }

void set_node(PermEnv& env, const Path& p, Perm kappa) {
    navigate(env, p).tree->perm = kappa;
}

void set_subtree(PermEnv& env, const Path& p, Perm kappa) {
    Cursor c = navigate(env, p);
    *c.tree = pfresh(c.type, *env.scope, kappa);
}

void set_extensions(PermEnv& env, const Path& p, Perm kappa, ExtFilter filter) {
    Cursor c = navigate(env, p);
    apply_ext(*c.tree, c.type, 0, kappa, filter, *env.scope);
}

void perm_release(PermEnv& env) {
    for (auto& [name, entry] : env.vars)
        release_tree(entry.second, entry.first, *env.scope);
}

PermEnv fusion(const PermEnv& a, const PermEnv& b, bool use_lub) {
    PermEnv r;
    r.scope = a.scope;
    for (const auto& [name, entry] : a.vars) {
        const auto it = b.vars.find(name);
        assert(it != b.vars.end() && "fusion over mismatched environments");
        r.vars[name] = {entry.first,
                        fuse_tree(entry.second, it->second.second, entry.first, *a.scope,
                                  use_lub ? lub : glb)};
    }
    return r;
}

bool is_normalized(const PermEnv& env) {
    for (const auto& [name, entry] : env.vars) {
        const bool ok = check_tree(
            entry.second, entry.first, *env.scope,
            [](Perm node, const std::vector<Perm>& children) {
                Perm k = Perm::Rw;
                for (Perm c : children) k = glb(k, c);
                return perm_leq(k, node);
            });
        if (!ok) return false;
    }
    return true;
}

bool readability_holds(const PermEnv& env) {
    for (const auto& [name, entry] : env.vars) {
        const bool ok = check_tree(
            entry.second, entry.first, *env.scope,
            [](Perm node, const std::vector<Perm>& children) {
                if (node != Perm::R && node != Perm::Rw) return true;
                for (Perm c : children)
                    if (c != node) return false;
                return true;
            });
        if (!ok) return false;
    }
    return true;
}

std::string dump(const PermEnv& env) {
    std::ostringstream out;
    for (const auto& [name, entry] : env.vars) dump_tree(out, entry.second, name);
    return out.str();
}

} // namespace muspark
