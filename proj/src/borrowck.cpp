#include "muspark/borrowck.hpp"

#include <algorithm>
#include <set>

namespace muspark {

// ---------------------------------------------------------------------------
// Name transitions
// ---------------------------------------------------------------------------

void move_name(PermEnv& env, const Path& p) {
    // P-M-*: the path and every strict prefix lose readability. Meeting with
    // W instead of overwriting matters: a prefix that is already NO (its
    // subtree is aliased away) must not regain writability, or a later
    // whole-subtree assignment through it would relegitimize the alias.
    Path cur;
    cur.base = p.base;
    cur.location = p.location;
    set_node(env, cur, glb(Perm::W, lookup(env, cur)));
    for (const auto& sel : p.selectors) {
        cur.selectors.push_back(sel);
        set_node(env, cur, glb(Perm::W, lookup(env, cur)));
    }
}

void access_move_name(PermEnv& env, const Path& p) {
    // P-SM-*: field prefixes back to the last deref go to NO (the whole
    // suffix is frozen behind the taken access); from the deref inwards it
    // degrades to a plain move.
    if (p.selectors.empty()) {
        set_node(env, p, Perm::No);
        return;
    }
    Path parent = p.parent();
    if (p.selectors.back().kind == Selector::Kind::Deref)
        move_name(env, parent);
    else
        access_move_name(env, parent);
    set_node(env, p, Perm::No);
}

// ---------------------------------------------------------------------------
// Analysis context
// ---------------------------------------------------------------------------

namespace {

enum class ParamClass { Observed, ShallowIn, BorrowIn, BorrowInOut, BorrowOut };

ParamClass classify(Mode mode, const Type& ty, const Scope& scope) {
    switch (mode) {
    case Mode::InOut: return ParamClass::BorrowInOut;
    case Mode::Out: return ParamClass::BorrowOut;
    case Mode::In:
        if (ty.kind == Type::Kind::Access) return ParamClass::BorrowIn;
        return is_deep(ty, scope) ? ParamClass::Observed : ParamClass::ShallowIn;
    }
    return ParamClass::ShallowIn;
}

struct Ctx {
    const CheckedProgram* checked = nullptr; // null for the bare-statement surface
    BorrowckOptions opts;
    std::vector<Diagnostic>* diags;
    PermSnapshot* snaps;

    bool skip(int stmt_id) const {
        if (!checked) return false;
        const auto& bad = checked->bad_stmts;
        return std::find(bad.begin(), bad.end(), stmt_id) != bad.end();
    }

    void report(std::string rule, std::string code, const Path& p, SourceLocation loc,
                std::vector<std::string> required, Perm actual, std::string message) {
        Diagnostic d;
        d.rule = std::move(rule);
        d.code = std::move(code);
        d.path = p.to_string();
        d.location = loc;
        d.required = std::move(required);
        d.actual = to_string(actual);
        d.message = std::move(message);
        diags->push_back(std::move(d));
    }

    // --- entry-point transitions --------------------------------------

    void observe_chain(PermEnv& env, const Path& p) {
        Path cur;
        cur.base = p.base;
        set_node(env, cur, Perm::R);
        for (const auto& sel : p.selectors) {
            cur.selectors.push_back(sel);
            set_node(env, cur, Perm::R);
        }
    }

    void observe_entry(PermEnv& env, const Path& p, SourceLocation loc) {
        const Perm have = lookup(env, p);
        if (!readable(have))
            report("P-O-entryPoint", "observe-requires-readable", p, loc, {"R", "RW"}, have,
                   "'" + p.to_string() + "' is observed but has permission " +
                       to_string(have));
        if (opts.mutation == RuleMutation::ObserveKeepsPerm) return;
        observe_chain(env, p);
        set_extensions(env, p, Perm::R, ExtFilter::AllStrict);
    }

    void borrow_chain(PermEnv& env, const Path& p, const Scope& scope) {
        // P-B-*: the path and each strict prefix go to NO when deep, R when
        // shallow.
        Path cur;
        cur.base = p.base;
        std::vector<Path> prefixes{cur};
        for (const auto& sel : p.selectors) {
            cur.selectors.push_back(sel);
            prefixes.push_back(cur);
        }
        for (auto& pre : prefixes) {
            const TypeOrDiag t = type_of_name(scope, pre);
            const Type& ty = std::get<Type>(t);
            set_node(env, pre, is_deep(ty, scope) ? Perm::No : Perm::R);
        }
    }

    void borrow_entry(PermEnv& env, const Scope& scope, const Path& p, SourceLocation loc,
                      bool out_mode) {
        const Perm have = lookup(env, p);
        if (out_mode) {
            if (!writable(have))
                report("P-B-entryPointOut", "borrow-out-requires-writable", p, loc,
                       {"W", "RW"}, have,
                       "'" + p.to_string() + "' is borrowed with mode out but has permission " +
                           to_string(have));
        } else {
            if (have != Perm::Rw)
                report("P-B-entryPointInOut", "borrow-requires-rw", p, loc, {"RW"}, have,
                       "'" + p.to_string() + "' is borrowed but has permission " +
                           to_string(have));
        }
        if (opts.mutation == RuleMutation::BorrowKeepsExtensions) return;
        borrow_chain(env, p, scope);
        set_extensions(env, p, Perm::No, ExtFilter::DeepAnyDerefs);
        set_extensions(env, p, Perm::R, ExtFilter::ShallowAnyDerefs);
    }

    // --- statements ----------------------------------------------------

    void snapshot(const std::string& key, const PermEnv& env) {
        if (snaps) (*snaps)[key] = env;
    }

    PermEnv exec_stmt(const Scope& scope, PermEnv env, const Stmt& s) {
        snapshot("stmt:" + std::to_string(s.id) + ":pre", env);
        if (!skip(s.id)) env = dispatch(scope, std::move(env), s);
        snapshot("stmt:" + std::to_string(s.id) + ":post", env);
        return env;
    }

    PermEnv dispatch(const Scope& scope, PermEnv env, const Stmt& s) {
        return std::visit(
            [&](const auto& node) -> PermEnv {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, AssignStmt>)
                    return exec_assign(scope, std::move(env), s, node);
                else if constexpr (std::is_same_v<T, AssignNewStmt>) {
                    check_target(env, node.target, s.location, "P-assignNew");
                    set_subtree(env, node.target, Perm::Rw);
                    perm_release(env);
                    return env;
                } else if constexpr (std::is_same_v<T, CallStmt>)
                    return exec_call(scope, std::move(env), s, node);
                else if constexpr (std::is_same_v<T, IfStmt>) {
                    PermEnv then_env = exec_stmt(scope, env, *node.then_branch);
                    PermEnv else_env = exec_stmt(scope, std::move(env), *node.else_branch);
                    PermEnv merged = fusion(then_env, else_env,
                                            opts.mutation == RuleMutation::FusionUsesLub);
                    perm_release(merged);
                    return merged;
                } else {
                    for (const auto& st : node.stmts)
                        env = exec_stmt(scope, std::move(env), *st);
                    return env;
                }
            },
            s.node);
    }

    void check_target(PermEnv& env, const Path& x, SourceLocation loc,
                      const std::string& rule) {
        const Perm have = lookup(env, x);
        if (!writable(have))
            report(rule, "assign-target-not-writable", x, loc, {"W", "RW"}, have,
                   "'" + x.to_string() + "' is assigned but has permission " +
                       to_string(have));
    }

    PermEnv exec_assign(const Scope& scope, PermEnv env, const Stmt& s,
                        const AssignStmt& node) {
        const Path& x = node.target;
        std::visit(
            [&](const auto& rhs) {
                using T = std::decay_t<decltype(rhs)>;
                if constexpr (std::is_same_v<T, NullLit>) {
                    check_target(env, x, s.location, "P-assignNull");
                } else if constexpr (std::is_same_v<T, IntLit>) {
                    check_target(env, x, s.location, "P-assignLiteral");
                } else if constexpr (std::is_same_v<T, NameRef>) {
                    const Path& n = rhs.path;
                    const Type ty = std::get<Type>(type_of_name(scope, n));
                    if (is_deep(ty, scope)) {
                        // P-assignDeepName; the premise order matters — the
                        // move happens before the target is checked, which
                        // is exactly what rejects cyclic self-assignments.
                        const Perm have = lookup(env, n);
                        if (have != Perm::Rw)
                            report("P-assignDeepName", "move-requires-rw", n, s.location,
                                   {"RW"}, have,
                                   "'" + n.to_string() + "' is moved but has permission " +
                                       to_string(have));
                        move_name(env, n);
                        if (opts.mutation != RuleMutation::MoveKeepsMoreDerefs)
                            set_extensions(env, n, Perm::No, ExtFilter::MoreDerefs);
                        set_extensions(env, n, Perm::W, ExtFilter::DeepSameDerefs);
                        set_extensions(env, n, Perm::Rw, ExtFilter::ShallowSameDerefs);
                        check_target(env, x, s.location, "P-assignDeepName");
                    } else {
                        const Perm have = lookup(env, n);
                        if (!readable(have))
                            report("P-assignShallowName", "source-not-readable", n,
                                   s.location, {"R", "RW"}, have,
                                   "'" + n.to_string() + "' is read but has permission " +
                                       to_string(have));
                        check_target(env, x, s.location, "P-assignShallowName");
                    }
                } else { // 'Access
                    const Path& n = rhs.path;
                    const Perm have = lookup(env, n);
                    if (have != Perm::Rw)
                        report("P-assignAccess", "access-requires-rw", n, s.location, {"RW"},
                               have,
                               "'" + n.to_string() +
                                   "''Access is taken but the path has permission " +
                                   to_string(have));
                    if (opts.mutation == RuleMutation::AccessMoveAsPlainMove)
                        move_name(env, n);
                    else
                        access_move_name(env, n);
                    if (opts.mutation != RuleMutation::AssignAccessKeepsExtensions)
                        set_extensions(env, n, Perm::No, ExtFilter::AllStrict);
                    check_target(env, x, s.location, "P-assignAccess");
                }
            },
            node.rhs.node);
        set_subtree(env, x, Perm::Rw);
        perm_release(env);
        return env;
    }

    PermEnv exec_call(const Scope& scope, PermEnv env, const Stmt& s, const CallStmt& node) {
        const auto sig_it = scope.procs.find(node.callee);
        if (sig_it == scope.procs.end()) return env; // typecheck reported it
        const ProcSig& sig = sig_it->second;

        // The observe/borrow chain threads one environment through the
        // actuals in group order; it exists only to validate the call.
        PermEnv chained = env;
        const auto handle = [&](ParamClass want) {
            for (std::size_t i = 0; i < sig.params.size() && i < node.actuals.size(); ++i) {
                if (classify(sig.params[i].mode, sig.params[i].type, scope) != want)
                    continue;
                const Expr& actual = node.actuals[i];
                const Path* name = nullptr;
                if (const auto* ref = std::get_if<NameRef>(&actual.node)) name = &ref->path;
                if (const auto* acc = std::get_if<AccessOf>(&actual.node)) name = &acc->path;
                switch (want) {
                case ParamClass::Observed:
                    if (name) observe_entry(chained, *name, actual.location);
                    break;
                case ParamClass::ShallowIn:
                    if (name) {
                        const Perm have = lookup(chained, *name);
                        if (!readable(have))
                            report("P-O-entryPoint", "observe-requires-readable", *name,
                                   actual.location, {"R", "RW"}, have,
                                   "'" + name->to_string() +
                                       "' is passed with mode in but has permission " +
                                       to_string(have));
                    }
                    break;
                case ParamClass::BorrowIn:
                case ParamClass::BorrowInOut:
                    if (name) borrow_entry(chained, scope, *name, actual.location, false);
                    break;
                case ParamClass::BorrowOut:
                    if (name) borrow_entry(chained, scope, *name, actual.location, true);
                    break;
                }
            }
        };
        handle(ParamClass::Observed);
        handle(ParamClass::ShallowIn);
        handle(ParamClass::BorrowIn);
        handle(ParamClass::BorrowInOut);
        handle(ParamClass::BorrowOut);
        snapshot("call:" + std::to_string(s.id) + ":chained", chained);

        // P-call result: in-out and out actuals come back whole.
        for (std::size_t i = 0; i < sig.params.size() && i < node.actuals.size(); ++i) {
            if (sig.params[i].mode == Mode::In) continue;
            if (const auto* ref = std::get_if<NameRef>(&node.actuals[i].node))
                set_subtree(env, ref->path, Perm::Rw);
        }
        perm_release(env);
        return env;
    }

    // --- declarations ----------------------------------------------------

    void check_proc(const ProcDecl& proc) {
        const auto scope_it = checked->scopes.find(proc.id);
        if (scope_it == checked->scopes.end()) return;
        auto scope = std::make_shared<const Scope>(scope_it->second);

        PermEnv env;
        env.scope = scope;
        for (const auto& param : proc.params) {
            const auto ty_it = scope->vars.find(param.name);
            if (ty_it == scope->vars.end()) continue;
            const Type& ty = ty_it->second;
            Perm kappa = Perm::R;
            switch (classify(param.mode, ty, *scope)) {
            case ParamClass::Observed:
            case ParamClass::ShallowIn: kappa = Perm::R; break;
            case ParamClass::BorrowIn:
            case ParamClass::BorrowInOut: kappa = Perm::Rw; break;
            case ParamClass::BorrowOut: kappa = Perm::W; break;
            }
            env.vars[param.name] = {ty, pfresh(ty, *scope, kappa)};
        }
        for (const auto& d : proc.decls) {
            if (const auto* var = std::get_if<VarDecl>(&d->node)) {
                const auto ty_it = scope->vars.find(var->name);
                if (ty_it != scope->vars.end())
                    env.vars[var->name] = {ty_it->second,
                                           pfresh(ty_it->second, *scope, Perm::W)};
            } else if (const auto* nested = std::get_if<ProcDecl>(&d->node)) {
                check_proc(*nested);
            }
        }
        snapshot("proc:" + std::to_string(proc.id) + ":entry", env);

        env = exec_stmt(*scope, std::move(env), *proc.body);

        snapshot("proc:" + std::to_string(proc.id) + ":exit", env);
        for (const auto& param : proc.params) {
            const auto ty_it = scope->vars.find(param.name);
            if (ty_it == scope->vars.end()) continue;
            const ParamClass cls = classify(param.mode, ty_it->second, *scope);
            if (cls == ParamClass::Observed || cls == ParamClass::ShallowIn) continue;
            Path p;
            p.base = param.name;
            p.location = param.location;
            const Perm have = lookup(env, p);
            if (have != Perm::Rw)
                report("P-procedureDecl", "borrowed-not-rw-at-exit", p, param.location,
                       {"RW"}, have,
                       "borrowed parameter '" + param.name + "' of " + proc.name +
                           " must be RW at the end of the procedure, found " +
                           to_string(have));
        }
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

CheckReport analyze(const Program& p, const BorrowckOptions& opts) {
    CheckReport report;
    report.diagnostics = check_legality(p);

    const CheckedProgram checked = check_program(p);
    report.diagnostics.insert(report.diagnostics.end(), checked.diagnostics.begin(),
                              checked.diagnostics.end());

    Ctx ctx;
    ctx.checked = &checked;
    ctx.opts = opts;
    ctx.diags = &report.diagnostics;
    ctx.snaps = &report.snapshots;
    ctx.check_proc(p.main);

    report.accepted = report.diagnostics.empty();
    return report;
}

PermEnv check_stmt_perm(const Scope& scope, PermEnv env, const Stmt& s,
                        std::vector<Diagnostic>& diags, PermSnapshot& snaps,
                        const BorrowckOptions& opts) {
    Ctx ctx;
    ctx.opts = opts;
    ctx.diags = &diags;
    ctx.snaps = &snaps;
    return ctx.exec_stmt(scope, std::move(env), s);
}

} // namespace muspark
