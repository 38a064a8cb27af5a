#include "muspark/typecheck.hpp"

#include <algorithm>
#include <set>

namespace muspark {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

bool Type::same_as(const Type& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
    case Kind::Integer:
    case Kind::Null: return true;
    case Kind::Record: return record_name == other.record_name;
    case Kind::Access: return inner->same_as(*other.inner);
    }
    return false;
}

std::string Type::to_string() const {
    switch (kind) {
    case Kind::Integer: return "integer";
    case Kind::Null: return "nulltype";
    case Kind::Record: return record_name;
    case Kind::Access: return "access " + inner->to_string();
    }
    return "?";
}

const Type* RecordInfo::field_type(const std::string& name) const {
    for (const auto& [fname, ftype] : fields)
        if (fname == name) return &ftype;
    return nullptr;
}

bool type_equiv(const Type& a, const Type& b) {
    if (a.same_as(b)) return true;
    if (a.kind == Type::Kind::Null && b.kind == Type::Kind::Access) return true;
    if (b.kind == Type::Kind::Null && a.kind == Type::Kind::Access) return true;
    return false;
}

bool is_deep(const Type& t, const Scope& scope) {
    switch (t.kind) {
    case Type::Kind::Access:
    case Type::Kind::Null: return true;
    case Type::Kind::Integer: return false;
    case Type::Kind::Record: {
        const auto it = scope.records.find(t.record_name);
        if (it == scope.records.end()) return false;
        for (const auto& [fname, ftype] : it->second.fields)
            if (is_deep(ftype, scope)) return true;
        return false;
    }
    }
    return false;
}

std::optional<Type> resolve_type_expr(const Scope& scope, const TypeExpr& te) {
    const auto named = [&](const std::string& name) -> std::optional<Type> {
        if (name == "integer") return Type::integer();
        if (scope.records.count(name)) return Type::record(name);
        return std::nullopt;
    };
    if (te.kind == TypeExpr::Kind::Named) return named(te.name);
    auto inner = named(te.name);
    if (!inner) return std::nullopt;
    return Type::access(std::move(*inner));
}

// ---------------------------------------------------------------------------
// Name and expression typing
// ---------------------------------------------------------------------------

namespace {

Diagnostic make_diag(std::string rule, std::string code, SourceLocation loc, std::string path,
                     std::string message) {
    Diagnostic d;
    d.rule = std::move(rule);
    d.code = std::move(code);
    d.location = loc;
    d.path = std::move(path);
    d.message = std::move(message);
    return d;
}

} // namespace

TypeOrDiag type_of_name(const Scope& scope, const Path& path) {
    const auto it = scope.vars.find(path.base);
    if (it == scope.vars.end())
        return make_diag("T-readIdent", "unknown-variable", path.location, path.base,
                         "unknown variable '" + path.base + "'");
    Type cur = it->second;
    Path prefix;
    prefix.base = path.base;
    prefix.location = path.location;
    for (const auto& sel : path.selectors) {
        if (sel.kind == Selector::Kind::Deref) {
            if (cur.kind != Type::Kind::Access)
                return make_diag("T-readDeref", "deref-of-non-access", path.location,
                                 prefix.to_string(),
                                 "'" + prefix.to_string() + "' of type " + cur.to_string() +
                                     " cannot be dereferenced");
            cur = *cur.inner;
        } else {
            if (cur.kind != Type::Kind::Record)
                return make_diag("T-readField", "no-such-field", path.location,
                                 prefix.to_string(),
                                 "'" + prefix.to_string() + "' of type " + cur.to_string() +
                                     " has no field '" + sel.field + "'");
            const auto rec = scope.records.find(cur.record_name);
            const Type* ft = rec == scope.records.end() ? nullptr
                                                        : rec->second.field_type(sel.field);
            if (!ft)
                return make_diag("T-readField", "no-such-field", path.location,
                                 prefix.to_string(),
                                 "record " + cur.record_name + " has no field '" + sel.field +
                                     "'");
            cur = *ft;
        }
        prefix.selectors.push_back(sel);
    }
    return cur;
}

TypeOrDiag type_of_expr(const Scope& scope, const Expr& e) {
    return std::visit(
        [&](const auto& node) -> TypeOrDiag {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NullLit>) return Type::null_type();
            else if constexpr (std::is_same_v<T, IntLit>) return Type::integer();
            else if constexpr (std::is_same_v<T, NameRef>) return type_of_name(scope, node.path);
            else {
                TypeOrDiag t = type_of_name(scope, node.path);
                if (std::holds_alternative<Diagnostic>(t)) return t;
                return Type::access(std::get<Type>(t));
            }
        },
        e.node);
}

// ---------------------------------------------------------------------------
// Statement checking
// ---------------------------------------------------------------------------

std::vector<Diagnostic> check_stmt(const Scope& scope, const Stmt& s) {
    std::vector<Diagnostic> diags;
    const auto push_if_diag = [&](const TypeOrDiag& t) -> const Type* {
        if (const auto* d = std::get_if<Diagnostic>(&t)) {
            diags.push_back(*d);
            return nullptr;
        }
        return &std::get<Type>(t);
    };
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
                const TypeOrDiag tt = type_of_name(scope, node.target);
                const TypeOrDiag rt = type_of_expr(scope, node.rhs);
                const Type* target = push_if_diag(tt);
                const Type* rhs = push_if_diag(rt);
                if (target && rhs && !type_equiv(*rhs, *target))
                    diags.push_back(make_diag("T-assignExpr", "type-mismatch", s.location,
                                              node.target.to_string(),
                                              "cannot assign " + rhs->to_string() + " to '" +
                                                  node.target.to_string() + "' of type " +
                                                  target->to_string()));
            } else if constexpr (std::is_same_v<T, AssignNewStmt>) {
                const Type* target = push_if_diag(type_of_name(scope, node.target));
                TypeExpr te{TypeExpr::Kind::Named, node.type_name, s.location};
                const auto alloc = resolve_type_expr(scope, te);
                if (!alloc) {
                    diags.push_back(make_diag("T-assignNew", "unknown-type", s.location,
                                              node.target.to_string(),
                                              "unknown type '" + node.type_name + "'"));
                } else if (target && !type_equiv(Type::access(*alloc), *target)) {
                    diags.push_back(make_diag("T-assignNew", "type-mismatch", s.location,
                                              node.target.to_string(),
                                              "cannot assign access " + alloc->to_string() +
                                                  " to '" + node.target.to_string() +
                                                  "' of type " + target->to_string()));
                }
            } else if constexpr (std::is_same_v<T, CallStmt>) {
                const auto it = scope.procs.find(node.callee);
                if (it == scope.procs.end()) {
                    diags.push_back(make_diag("T-procedureCall", "unknown-procedure", s.location,
                                              node.callee,
                                              "unknown procedure '" + node.callee + "'"));
                    return;
                }
                const ProcSig& sig = it->second;
                if (sig.params.size() != node.actuals.size()) {
                    diags.push_back(make_diag(
                        "T-procedureCall", "arity-mismatch", s.location, node.callee,
                        node.callee + " expects " + std::to_string(sig.params.size()) +
                            " arguments, got " + std::to_string(node.actuals.size())));
                    return;
                }
                for (std::size_t i = 0; i < sig.params.size(); ++i) {
                    const ProcParam& formal = sig.params[i];
                    const Expr& actual = node.actuals[i];
                    if (formal.mode != Mode::In &&
                        !std::holds_alternative<NameRef>(actual.node))
                        continue; // legality reports actual-must-be-name
                    const Type* at = push_if_diag(type_of_expr(scope, actual));
                    if (at && !type_equiv(*at, formal.type))
                        diags.push_back(make_diag(
                            "T-procedureCall", "type-mismatch", actual.location,
                            node.callee,
                            "argument " + std::to_string(i + 1) + " has type " +
                                at->to_string() + ", expected " + formal.type.to_string()));
                }
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                auto d1 = check_stmt(scope, *node.then_branch);
                auto d2 = check_stmt(scope, *node.else_branch);
                diags.insert(diags.end(), d1.begin(), d1.end());
                diags.insert(diags.end(), d2.begin(), d2.end());
            } else {
                for (const auto& st : node.stmts) {
                    auto d = check_stmt(scope, *st);
                    diags.insert(diags.end(), d.begin(), d.end());
                }
            }
        },
        s.node);
    return diags;
}

// ---------------------------------------------------------------------------
// Program checking (T-uninitDecl / T-procedureDecl / T-recordDecl)
// ---------------------------------------------------------------------------

namespace {

struct ProgramChecker {
    CheckedProgram result;

    void mark_bad(const Stmt& s, const std::vector<Diagnostic>& before,
                  const std::vector<Diagnostic>& after) {
        if (before.size() != after.size()) result.bad_stmts.push_back(s.id);
    }

    void check_stmts_marking(const Scope& scope, const Stmt& s) {
        // Leaf statements are marked individually so later phases skip only
        // the offending ones.
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, IfStmt>) {
                    check_stmts_marking(scope, *node.then_branch);
                    check_stmts_marking(scope, *node.else_branch);
                } else if constexpr (std::is_same_v<T, BlockStmt>) {
                    for (const auto& st : node.stmts) check_stmts_marking(scope, *st);
                } else {
                    auto d = check_stmt(scope, s);
                    if (!d.empty()) {
                        result.bad_stmts.push_back(s.id);
                        result.diagnostics.insert(result.diagnostics.end(), d.begin(), d.end());
                    }
                }
            },
            s.node);
    }

    // Γ' := {types, procedures} + P + formals, then locals in order.
    void check_proc(const Scope& outer, const ProcDecl& proc) {
        Scope scope;
        scope.records = outer.records;
        scope.procs = outer.procs;

        ProcSig self;
        self.proc_id = proc.id;
        for (const auto& param : proc.params) {
            auto pt = resolve_type_expr(scope, param.type);
            if (!pt) {
                result.diagnostics.push_back(
                    make_diag("T-procedureDecl", "unknown-type", param.location, param.name,
                              "unknown type in parameter '" + param.name + "'"));
                pt = Type::integer();
            }
            self.params.push_back({param.name, param.mode, *pt});
            scope.vars[param.name] = *pt;
        }
        scope.procs[proc.name] = self;

        for (const auto& d : proc.decls) process_decl(scope, *d);

        check_stmts_marking(scope, *proc.body);
        result.scopes[proc.id] = scope;
        result.procs[proc.id] = &proc;
    }

    void process_decl(Scope& scope, const Decl& d) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, RecordDecl>) {
                    RecordInfo info;
                    Scope with_self = scope; // T-recordDecl: Γ + R ⊢ τ_i
                    with_self.records[node.name] = {};
                    for (const auto& [fname, ftype] : node.fields) {
                        auto t = resolve_type_expr(with_self, ftype);
                        if (!t) {
                            result.diagnostics.push_back(make_diag(
                                "T-recordDecl", "unknown-type", d.location, node.name,
                                "unknown type in field '" + fname + "' of record " + node.name));
                            t = Type::integer();
                        }
                        info.fields.emplace_back(fname, *t);
                    }
                    scope.records[node.name] = std::move(info);
                } else if constexpr (std::is_same_v<T, VarDecl>) {
                    auto t = resolve_type_expr(scope, node.type);
                    if (!t) {
                        result.diagnostics.push_back(
                            make_diag("T-uninitDecl", "unknown-type", d.location, node.name,
                                      "unknown type for variable '" + node.name + "'"));
                        t = Type::integer();
                    }
                    scope.vars[node.name] = *t;
                } else {
                    check_proc(scope, node); // restricted environment built inside
                    ProcSig sig;
                    sig.proc_id = node.id;
                    Scope restricted;
                    restricted.records = scope.records;
                    for (const auto& param : node.params) {
                        auto pt = resolve_type_expr(restricted, param.type);
                        sig.params.push_back({param.name, param.mode,
                                              pt ? *pt : Type::integer()});
                    }
                    scope.procs[node.name] = std::move(sig);
                }
            },
            d.node);
    }
};

} // namespace

CheckedProgram check_program(const Program& p) {
    ProgramChecker checker;
    Scope empty;
    checker.check_proc(empty, p.main);
    return checker.result;
}

// ---------------------------------------------------------------------------
// Legality (purely syntactic additional conditions)
// ---------------------------------------------------------------------------

namespace {

struct LegalityChecker {
    std::vector<Diagnostic> diags;

    struct ProcInfo {
        std::vector<Mode> modes;
    };

    void check_proc(const ProcDecl& proc, std::set<std::string> visible,
                    std::map<std::string, ProcInfo> procs) {
        std::set<std::string> in_formals;
        std::set<std::string> seen_params;
        for (const auto& param : proc.params) {
            if (!seen_params.insert(param.name).second)
                diags.push_back(make_diag("duplicate-param", "duplicate-param", param.location,
                                          param.name,
                                          "duplicate parameter '" + param.name + "'"));
            if (visible.count(param.name))
                diags.push_back(make_diag("shadowing", "shadowing", param.location, param.name,
                                          "parameter '" + param.name +
                                              "' shadows another declaration"));
            visible.insert(param.name);
            if (param.mode == Mode::In) in_formals.insert(param.name);
        }
        ProcInfo self;
        for (const auto& param : proc.params) self.modes.push_back(param.mode);
        procs[proc.name] = self;

        for (const auto& d : proc.decls) {
            std::visit(
                [&](const auto& node) {
                    using T = std::decay_t<decltype(node)>;
                    if constexpr (std::is_same_v<T, RecordDecl>) {
                        declare(node.name, d->location, visible);
                        std::set<std::string> fields;
                        for (const auto& [fname, ftype] : node.fields) {
                            if (!fields.insert(fname).second)
                                diags.push_back(make_diag(
                                    "duplicate-field", "duplicate-field", d->location, fname,
                                    "duplicate field '" + fname + "' in record " + node.name));
                            if (ftype.kind == TypeExpr::Kind::Named && ftype.name == node.name)
                                diags.push_back(make_diag(
                                    "record-self-use", "record-self-use", ftype.location, fname,
                                    "record " + node.name +
                                        " may appear in its own fields only under access type"));
                        }
                    } else if constexpr (std::is_same_v<T, VarDecl>) {
                        declare(node.name, d->location, visible);
                    } else {
                        declare(node.name, d->location, visible);
                        ProcInfo info;
                        for (const auto& param : node.params) info.modes.push_back(param.mode);
                        // Nested procedures see types and procedures, not
                        // the enclosing variables; shadowing is still judged
                        // against everything visible at the declaration.
                        check_proc(node, visible, procs);
                        procs[node.name] = std::move(info);
                    }
                },
                d->node);
        }
        check_stmt_legality(*proc.body, in_formals, procs);
    }

    void declare(const std::string& name, SourceLocation loc, std::set<std::string>& visible) {
        if (!visible.insert(name).second)
            diags.push_back(make_diag("shadowing", "shadowing", loc, name,
                                      "declaration of '" + name +
                                          "' shadows another declaration"));
    }

    static bool writes_in_formal(const Path& p, const std::set<std::string>& in_formals) {
        // Writing the formal itself or one of its fields is illegal; writing
        // through .all is fine.
        if (!in_formals.count(p.base)) return false;
        return p.deref_count() == 0;
    }

    void check_stmt_legality(const Stmt& s, const std::set<std::string>& in_formals,
                             const std::map<std::string, ProcInfo>& procs) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, AssignStmt> ||
                              std::is_same_v<T, AssignNewStmt>) {
                    if (writes_in_formal(node.target, in_formals))
                        diags.push_back(make_diag(
                            "write-to-in-formal", "write-to-in-formal", s.location,
                            node.target.to_string(),
                            "cannot write to in-mode formal '" + node.target.base + "'"));
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    const auto it = procs.find(node.callee);
                    for (std::size_t i = 0; i < node.actuals.size(); ++i) {
                        if (it == procs.end() || i >= it->second.modes.size()) break;
                        const Mode mode = it->second.modes[i];
                        if (mode == Mode::In) continue;
                        const auto* name = std::get_if<NameRef>(&node.actuals[i].node);
                        if (!name) {
                            diags.push_back(make_diag(
                                "actual-must-be-name", "actual-must-be-name",
                                node.actuals[i].location, "",
                                "argument " + std::to_string(i + 1) + " of " + node.callee +
                                    " has mode " + to_string(mode) + " and must be a name"));
                        } else if (writes_in_formal(name->path, in_formals)) {
                            diags.push_back(make_diag(
                                "write-to-in-formal", "write-to-in-formal",
                                node.actuals[i].location, name->path.to_string(),
                                "in-mode formal '" + name->path.base +
                                    "' cannot be passed with mode " + to_string(mode)));
                        }
                    }
                } else if constexpr (std::is_same_v<T, IfStmt>) {
                    check_stmt_legality(*node.then_branch, in_formals, procs);
                    check_stmt_legality(*node.else_branch, in_formals, procs);
                } else {
                    for (const auto& st : node.stmts)
                        check_stmt_legality(*st, in_formals, procs);
                }
            },
            s.node);
    }
};

} // namespace

std::vector<Diagnostic> check_legality(const Program& p) {
    LegalityChecker checker;
    checker.check_proc(p.main, {}, {});
    return checker.diags;
}

} // namespace muspark
