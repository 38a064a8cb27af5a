#include "muspark/interp.hpp"

#include <cassert>
#include <sstream>

namespace muspark {

namespace {
Cell g_next_cell = 1;
}

Cell fresh_cell() { return g_next_cell++; }

MemNodePtr MemFrame::find(const std::string& name) const {
    for (const auto& [vname, node] : vars)
        if (vname == name) return node;
    return nullptr;
}

MemNodePtr fresh_tree(const Type& t, const Scope& scope) {
    auto node = std::make_shared<MemNode>();
    node->cell = fresh_cell();
    switch (t.kind) {
    case Type::Kind::Integer:
    case Type::Kind::Null:
        node->kind = MemNode::Kind::Int;
        node->value = 0;
        break;
    case Type::Kind::Access:
        node->kind = MemNode::Kind::Access;
        node->target = nullptr;
        break;
    case Type::Kind::Record: {
        node->kind = MemNode::Kind::Record;
        const auto it = scope.records.find(t.record_name);
        if (it != scope.records.end())
            for (const auto& [fname, ftype] : it->second.fields)
                node->fields.emplace_back(fname, fresh_tree(ftype, scope));
        break;
    }
    }
    return node;
}

void assign_tree(const MemNodePtr& dst, const MemNodePtr& src) {
    assert(dst && src && dst->kind == src->kind);
    switch (dst->kind) {
    case MemNode::Kind::Int: dst->value = src->value; break;
    case MemNode::Kind::Access: dst->target = src->target; break;
    case MemNode::Kind::Record:
        for (std::size_t i = 0; i < dst->fields.size(); ++i)
            assign_tree(dst->fields[i].second, src->fields[i].second);
        break;
    }
}

// ---------------------------------------------------------------------------
// Canonical frame dumps
// ---------------------------------------------------------------------------

namespace {

struct Renumberer {
    std::map<Cell, std::size_t> ids;
    std::size_t id(Cell c) {
        const auto [it, fresh] = ids.emplace(c, ids.size() + 1);
        return it->second;
    }
    bool seen(Cell c) const { return ids.count(c) != 0; }
};

void dump_node(std::ostringstream& out, const MemNodePtr& n, Renumberer& ren) {
    if (ren.seen(n->cell)) {
        out << "ref#" << ren.id(n->cell);
        return;
    }
    const std::size_t k = ren.id(n->cell);
    switch (n->kind) {
    case MemNode::Kind::Int: out << "int#" << k << "=" << n->value; break;
    case MemNode::Kind::Access:
        out << "acc#" << k << "->";
        if (n->target)
            dump_node(out, n->target, ren);
        else
            out << "null";
        break;
    case MemNode::Kind::Record:
        out << "rec#" << k << "{";
        for (std::size_t i = 0; i < n->fields.size(); ++i) {
            if (i) out << ", ";
            out << n->fields[i].first << ": ";
            dump_node(out, n->fields[i].second, ren);
        }
        out << "}";
        break;
    }
}

} // namespace

std::string dump_frame(const MemFrame& frame) {
    std::ostringstream out;
    Renumberer ren;
    for (const auto& [name, node] : frame.vars) {
        out << name << ": ";
        dump_node(out, node, ren);
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

struct StopSignal {
    RuntimeStop stop;
};

struct AbortSignal {}; // observer asked to end the run

struct Machine {
    const CheckedProgram& checked;
    ChoiceSource choices;
    const Observer& observer;
    bool record_trace;
    std::vector<TraceEntry> trace;
    int steps_left;

    void checkpoint(const std::string& point, TraceEvent ev, const MemFrame& frame) {
        if (record_trace) trace.push_back({point, ev, dump_frame(frame)});
        if (observer && !observer(point, ev, frame)) throw AbortSignal{};
    }

    MemNodePtr resolve(const MemFrame& frame, const Path& p) {
        MemNodePtr node = frame.find(p.base);
        assert(node && "runtime lookup of undeclared variable");
        Path prefix;
        prefix.base = p.base;
        for (const auto& sel : p.selectors) {
            if (sel.kind == Selector::Kind::Deref) {
                if (!node->target)
                    throw StopSignal{{RuntimeStop::Kind::NullDereference,
                                      prefix.to_string(), p.location}};
                node = node->target;
            } else {
                MemNodePtr next;
                for (const auto& [fname, fnode] : node->fields)
                    if (fname == sel.field) next = fnode;
                assert(next && "runtime lookup of unknown field");
                node = next;
            }
            prefix.selectors.push_back(sel);
        }
        return node;
    }

    MemNodePtr get_from_expr(MemFrame& frame, const Expr& e) {
        return std::visit(
            [&](const auto& node) -> MemNodePtr {
                using T = std::decay_t<decltype(node)>;
                auto fresh = std::make_shared<MemNode>();
                fresh->cell = fresh_cell();
                if constexpr (std::is_same_v<T, NullLit>) {
                    fresh->kind = MemNode::Kind::Access;
                    fresh->target = nullptr;
                    return fresh;
                } else if constexpr (std::is_same_v<T, IntLit>) {
                    fresh->kind = MemNode::Kind::Int;
                    fresh->value = node.value;
                    return fresh;
                } else if constexpr (std::is_same_v<T, AccessOf>) {
                    fresh->kind = MemNode::Kind::Access;
                    fresh->target = resolve(frame, node.path);
                    return fresh;
                } else {
                    return resolve(frame, node.path);
                }
            },
            e.node);
    }

    void exec_stmt(MemFrame& frame, const Scope& scope, const Stmt& s) {
        if (--steps_left < 0)
            throw StopSignal{{RuntimeStop::Kind::StepBudgetExceeded, "", s.location}};
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, AssignStmt>)
                    exec_assign(frame, node);
                else if constexpr (std::is_same_v<T, AssignNewStmt>) {
                    MemNodePtr x = resolve(frame, node.target);
                    const auto ty = type_of_name(scope, node.target);
                    const Type& t = std::get<Type>(ty);
                    x->target = fresh_tree(*t.inner, scope);
                } else if constexpr (std::is_same_v<T, CallStmt>)
                    exec_call(frame, scope, s, node);
                else if constexpr (std::is_same_v<T, IfStmt>) {
                    if (choices.next >= choices.choices.size())
                        throw StopSignal{
                            {RuntimeStop::Kind::ChoicesExhausted, "", s.location}};
                    const bool take_then = choices.choices[choices.next++];
                    exec_stmt(frame, scope, take_then ? *node.then_branch
                                                      : *node.else_branch);
                } else {
                    for (const auto& st : node.stmts) exec_stmt(frame, scope, *st);
                }
            },
            s.node);
        checkpoint("stmt:" + std::to_string(s.id) + ":post", TraceEvent::Stmt, frame);
    }

    void exec_assign(MemFrame& frame, const AssignStmt& stmt) {
        MemNodePtr x = resolve(frame, stmt.target);
        std::visit(
            [&](const auto& rhs) {
                using T = std::decay_t<decltype(rhs)>;
                if constexpr (std::is_same_v<T, NullLit>) {
                    x->target = nullptr;
                } else if constexpr (std::is_same_v<T, IntLit>) {
                    x->value = rhs.value;
                } else if constexpr (std::is_same_v<T, AccessOf>) {
                    x->target = resolve(frame, rhs.path);
                } else {
                    assign_tree(x, resolve(frame, rhs.path));
                }
            },
            stmt.rhs.node);
    }

    MemFrame make_frame(const ProcDecl& proc, const Scope& scope,
                        std::vector<MemNodePtr> formal_values) {
        MemFrame frame;
        frame.proc_id = proc.id;
        for (std::size_t i = 0; i < proc.params.size(); ++i)
            frame.vars.emplace_back(proc.params[i].name, std::move(formal_values[i]));
        for (const auto& d : proc.decls)
            if (const auto* var = std::get_if<VarDecl>(&d->node)) {
                const auto it = scope.vars.find(var->name);
                if (it != scope.vars.end())
                    frame.vars.emplace_back(var->name, fresh_tree(it->second, scope));
            }
        return frame;
    }

    void exec_call(MemFrame& caller, const Scope& caller_scope, const Stmt& s,
                   const CallStmt& stmt) {
        const auto sig_it = caller_scope.procs.find(stmt.callee);
        assert(sig_it != caller_scope.procs.end());
        const ProcSig& sig = sig_it->second;
        const ProcDecl& callee = *checked.procs.at(sig.proc_id);
        const Scope& callee_scope = checked.scopes.at(sig.proc_id);

        std::vector<MemNodePtr> formals;
        for (std::size_t i = 0; i < stmt.actuals.size(); ++i) {
            // Out-mode formals are uninitialized on entry; sharing the
            // actual's old value would leak aliases the caller still holds.
            if (i < sig.params.size() && sig.params[i].mode == Mode::Out) {
                formals.push_back(fresh_tree(sig.params[i].type, callee_scope));
            } else if (i < sig.params.size() && sig.params[i].mode == Mode::In &&
                       !is_deep(sig.params[i].type, callee_scope)) {
                // Shallow in-mode parameters are by-copy.
                MemNodePtr copy = fresh_tree(sig.params[i].type, callee_scope);
                assign_tree(copy, get_from_expr(caller, stmt.actuals[i]));
                formals.push_back(std::move(copy));
            } else {
                formals.push_back(get_from_expr(caller, stmt.actuals[i]));
            }
        }

        MemFrame frame = make_frame(callee, callee_scope, std::move(formals));
        checkpoint("proc:" + std::to_string(callee.id) + ":entry", TraceEvent::CallTransfer,
                   frame);

        exec_stmt(frame, callee_scope, *callee.body);

        // Copy-back. Name actuals of mode in share their tree with the
        // formal, so only 'Access actuals and in-out/out modes transfer
        // anything.
        for (std::size_t i = 0; i < stmt.actuals.size() && i < sig.params.size(); ++i) {
            const ProcParam& formal = sig.params[i];
            const Expr& actual = stmt.actuals[i];
            if (formal.mode == Mode::In) {
                if (formal.type.kind != Type::Kind::Access) continue;
                if (const auto* acc = std::get_if<AccessOf>(&actual.node)) {
                    MemNodePtr dst = resolve(caller, acc->path);
                    MemNodePtr fnode = frame.find(formal.name);
                    if (!fnode->target)
                        throw StopSignal{{RuntimeStop::Kind::NullDereference,
                                          formal.name, actual.location}};
                    assign_tree(dst, fnode->target);
                } else if (const auto* ref = std::get_if<NameRef>(&actual.node)) {
                    MemNodePtr dst = resolve(caller, ref->path);
                    assign_tree(dst, frame.find(formal.name));
                }
            } else if (const auto* ref = std::get_if<NameRef>(&actual.node)) {
                MemNodePtr dst = resolve(caller, ref->path);
                assign_tree(dst, frame.find(formal.name));
            }
        }
        checkpoint("call:" + std::to_string(s.id) + ":return", TraceEvent::CallReturn,
                   caller);
    }
};

} // namespace

RunResult run(const Program& p, const CheckedProgram& checked, ChoiceSource choices,
              const Observer& observer, bool record_trace) {
    Machine m{checked, std::move(choices), observer, record_trace, {}, 0};
    m.steps_left = m.choices.step_budget;

    RunResult result;
    const Scope& scope = checked.scopes.at(p.main.id);
    MemFrame frame = m.make_frame(p.main, scope, {});
    try {
        m.checkpoint("proc:" + std::to_string(p.main.id) + ":entry", TraceEvent::Decl,
                     frame);
        m.exec_stmt(frame, scope, *p.main.body);
    } catch (const StopSignal& sig) {
        result.outcome.stop = sig.stop;
    } catch (const AbortSignal&) {
        // Observer ended the run; whatever was collected stands.
    }
    result.trace = std::move(m.trace);
    result.choices_consumed = m.choices.consumed();
    return result;
}

} // namespace muspark
