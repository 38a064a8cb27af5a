#include "muspark/oracle.hpp"

#include "muspark/parser.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace muspark {

std::string to_string(Violation::Kind k) {
    switch (k) {
    case Violation::Kind::Crew: return "crew";
    case Violation::Kind::Normalization: return "normalization";
    case Violation::Kind::Readability: return "readability";
    case Violation::Kind::NoCycle: return "no-cycle";
    case Violation::Kind::Coherence: return "coherence";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Alias sets and CREW
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxAliasDepth = 64;

void collect_aliases(const MemNodePtr& n, Path p, std::map<Cell, AliasSet>& out,
                     std::set<Cell>& on_path, int depth) {
    if (!n || depth > kMaxAliasDepth) return;
    auto& set = out[n->cell];
    set.cell = n->cell;
    set.members.push_back(p);
    if (!on_path.insert(n->cell).second) {
        // Already on the current path: the memory loops (No-cycle catches
        // it); stop so enumeration terminates.
        set.members.pop_back();
        return;
    }
    if (n->kind == MemNode::Kind::Record) {
        for (const auto& [fname, fnode] : n->fields) {
            Path q = p;
            q.selectors.push_back(Selector::make_field(fname));
            collect_aliases(fnode, std::move(q), out, on_path, depth + 1);
        }
    } else if (n->kind == MemNode::Kind::Access && n->target) {
        Path q = p;
        q.selectors.push_back(Selector::deref());
        collect_aliases(n->target, std::move(q), out, on_path, depth + 1);
    }
    on_path.erase(n->cell);
}

} // namespace

std::vector<AliasSet> alias_sets(const MemFrame& frame) {
    std::map<Cell, AliasSet> by_cell;
    for (const auto& [name, node] : frame.vars) {
        Path p;
        p.base = name;
        std::set<Cell> on_path;
        collect_aliases(node, std::move(p), by_cell, on_path, 0);
    }
    std::vector<AliasSet> out;
    out.reserve(by_cell.size());
    for (auto& [cell, set] : by_cell) out.push_back(std::move(set));
    return out;
}

std::vector<Violation> crew_check(const std::vector<AliasSet>& sets, PermEnv& perm,
                                  const std::string& point) {
    std::vector<Violation> out;
    for (const AliasSet& set : sets) {
        if (set.members.size() < 2) continue;
        std::vector<std::pair<const Path*, Perm>> perms;
        for (const Path& p : set.members) {
            if (!perm.has(p.base)) continue;
            perms.emplace_back(&p, lookup(perm, p));
        }
        bool has_writer = false, bad = false;
        for (const auto& [p, k] : perms)
            if (writable(k)) has_writer = true;
        if (has_writer) {
            std::size_t usable = 0;
            for (const auto& [p, k] : perms)
                if (readable(k) || writable(k)) ++usable;
            bad = usable >= 2;
        }
        if (!bad) continue;
        std::ostringstream detail;
        detail << "cell shared by";
        for (const auto& [p, k] : perms) detail << " " << p->to_string() << "(" << to_string(k) << ")";
        Violation v;
        v.kind = Violation::Kind::Crew;
        v.point = point;
        v.detail = detail.str();
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lemmas
// ---------------------------------------------------------------------------

namespace {

bool find_cycle(const MemNodePtr& n, std::set<Cell>& on_path, std::string& where,
                const Path& p, int depth) {
    if (!n || depth > kMaxAliasDepth) return false;
    if (!on_path.insert(n->cell).second) {
        where = p.to_string();
        return true;
    }
    bool found = false;
    if (n->kind == MemNode::Kind::Record) {
        for (const auto& [fname, fnode] : n->fields) {
            Path q = p;
            q.selectors.push_back(Selector::make_field(fname));
            if (find_cycle(fnode, on_path, where, q, depth + 1)) {
                found = true;
                break;
            }
        }
    } else if (n->kind == MemNode::Kind::Access && n->target) {
        Path q = p;
        q.selectors.push_back(Selector::deref());
        found = find_cycle(n->target, on_path, where, q, depth + 1);
    }
    on_path.erase(n->cell);
    return found;
}

bool shapes_agree(const MemNodePtr& n, const Type& ty, const Scope& scope,
                  std::string& where, const Path& p, int depth) {
    if (!n || depth > kMaxAliasDepth) return true;
    const auto mismatch = [&] {
        where = p.to_string();
        return false;
    };
    switch (ty.kind) {
    case Type::Kind::Integer:
    case Type::Kind::Null:
        return n->kind == MemNode::Kind::Int ? true : mismatch();
    case Type::Kind::Access: {
        if (n->kind != MemNode::Kind::Access) return mismatch();
        if (!n->target) return true;
        Path q = p;
        q.selectors.push_back(Selector::deref());
        return shapes_agree(n->target, *ty.inner, scope, where, q, depth + 1);
    }
    case Type::Kind::Record: {
        if (n->kind != MemNode::Kind::Record) return mismatch();
        const auto it = scope.records.find(ty.record_name);
        if (it == scope.records.end()) return mismatch();
        if (it->second.fields.size() != n->fields.size()) return mismatch();
        for (std::size_t i = 0; i < n->fields.size(); ++i) {
            if (n->fields[i].first != it->second.fields[i].first) return mismatch();
            Path q = p;
            q.selectors.push_back(Selector::make_field(n->fields[i].first));
            if (!shapes_agree(n->fields[i].second, it->second.fields[i].second, scope, where,
                              q, depth + 1))
                return false;
        }
        return true;
    }
    }
    return true;
}

} // namespace

std::vector<Violation> lemma_checks(const MemFrame& frame, PermEnv& perm,
                                    const std::string& point) {
    std::vector<Violation> out;
    const auto push = [&](Violation::Kind k, std::string detail) {
        Violation v;
        v.kind = k;
        v.point = point;
        v.detail = std::move(detail);
        out.push_back(std::move(v));
    };

    if (!is_normalized(perm))
        push(Violation::Kind::Normalization, "permission environment is not normalized");
    if (!readability_holds(perm))
        push(Violation::Kind::Readability,
             "a readable node has a child with lower permission");

    for (const auto& [name, node] : frame.vars) {
        Path p;
        p.base = name;
        std::set<Cell> on_path;
        std::string where;
        if (find_cycle(node, on_path, where, p, 0)) {
            push(Violation::Kind::NoCycle, "memory cycle through " + where);
            break;
        }
    }

    for (const auto& [name, node] : frame.vars) {
        if (!perm.has(name)) {
            push(Violation::Kind::Coherence, "no permission tree for " + name);
            continue;
        }
        Path p;
        p.base = name;
        std::string where;
        if (!shapes_agree(node, perm.vars.at(name).first, *perm.scope, where, p, 0))
            push(Violation::Kind::Coherence, "memory and permission shapes diverge at " + where);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lockstep verification
// ---------------------------------------------------------------------------

VerifyReport lockstep_verify(const Program& p, int max_depth, int step_budget,
                             const BorrowckOptions& opts) {
    VerifyReport rep;
    const CheckReport ck = analyze(p, opts);
    if (!ck.accepted) {
        rep.applicable = false;
        return rep;
    }
    const CheckedProgram checked = check_program(p);
    const std::string source = pretty_print(p);
    std::set<std::pair<std::string, std::string>> seen; // (kind+point, detail)

    std::vector<std::vector<bool>> work{{}};
    while (!work.empty()) {
        std::vector<bool> vec = std::move(work.back());
        work.pop_back();

        const Observer observer = [&](const std::string& point, TraceEvent ev,
                                      const MemFrame& frame) {
            if (ev == TraceEvent::CallReturn) return true;
            const auto snap = ck.snapshots.find(point);
            if (snap == ck.snapshots.end()) return true;
            PermEnv env = snap->second;
            std::vector<Violation> found = crew_check(alias_sets(frame), env, point);
            std::vector<Violation> lemmas = lemma_checks(frame, env, point);
            found.insert(found.end(), lemmas.begin(), lemmas.end());
            for (Violation& v : found) {
                if (!seen.insert({to_string(v.kind) + "@" + v.point, v.detail}).second)
                    continue;
                v.program_source = source;
                v.choices = vec;
                rep.violations.push_back(std::move(v));
            }
            return true;
        };

        ChoiceSource cs;
        cs.choices = vec;
        cs.step_budget = step_budget;
        const RunResult r = run(p, checked, std::move(cs), observer, false);
        ++rep.executions;
        if (r.outcome.stop) {
            switch (r.outcome.stop->kind) {
            case RuntimeStop::Kind::StepBudgetExceeded: ++rep.truncated; break;
            case RuntimeStop::Kind::ChoicesExhausted:
                if (static_cast<int>(vec.size()) < max_depth) {
                    auto with_false = vec;
                    with_false.push_back(false);
                    auto with_true = std::move(vec);
                    with_true.push_back(true);
                    work.push_back(std::move(with_false));
                    work.push_back(std::move(with_true));
                    --rep.executions; // replaced by its two extensions
                } else {
                    ++rep.truncated;
                }
                break;
            case RuntimeStop::Kind::NullDereference: break; // legitimate outcome
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Program generator
// ---------------------------------------------------------------------------

namespace {

// Closed type universe of the generator.
enum class GType { Int, S, List, AccInt, AccS, AccList };

const char* gtype_text(GType t) {
    switch (t) {
    case GType::Int: return "integer";
    case GType::S: return "S";
    case GType::List: return "List";
    case GType::AccInt: return "access integer";
    case GType::AccS: return "access S";
    case GType::AccList: return "access List";
    }
    return "integer";
}

bool is_access(GType t) {
    return t == GType::AccInt || t == GType::AccS || t == GType::AccList;
}

GType pointee(GType t) {
    switch (t) {
    case GType::AccInt: return GType::Int;
    case GType::AccS: return GType::S;
    case GType::AccList: return GType::List;
    default: assert(false); return GType::Int;
    }
}

const char* pointee_name(GType t) {
    switch (pointee(t)) {
    case GType::Int: return "integer";
    case GType::S: return "S";
    case GType::List: return "List";
    default: return "integer";
    }
}

struct GVar {
    std::string name;
    GType type;
    bool writable_base; // in-mode formals are not assignable at depth 0
};

struct GProc {
    std::string name;
    std::vector<std::pair<Mode, GType>> params;
};

struct Gen {
    std::mt19937_64 rng;
    GenCoverage* cov;
    std::ostringstream out;
    int next_name = 0;

    explicit Gen(std::uint64_t seed, GenCoverage* coverage) : rng(seed), cov(coverage) {}

    std::uint64_t pick(std::uint64_t n) { return rng() % n; }
    bool chance(int percent) { return static_cast<int>(pick(100)) < percent; }

    std::string fresh_name(const char* prefix) {
        return prefix + std::to_string(next_name++);
    }

    GType random_type() {
        static constexpr GType kAll[] = {GType::Int,    GType::S,    GType::List,
                                         GType::AccInt, GType::AccS, GType::AccList};
        return kAll[pick(6)];
    }

    // Paths of a wanted type, reachable from the visible variables with at
    // most three selectors. `for_write` excludes paths rooted at an in-mode
    // formal unless they cross a dereference.
    std::vector<std::string> paths_of(const std::vector<GVar>& vars, GType want,
                                      bool for_write) {
        std::vector<std::string> found;
        const std::function<void(const std::string&, GType, int, bool)> walk =
            [&](const std::string& path, GType t, int depth, bool write_ok) {
                if (t == want && (!for_write || write_ok)) found.push_back(path);
                if (depth >= 3) return;
                switch (t) {
                case GType::S:
                    walk(path + ".a", GType::Int, depth + 1, write_ok);
                    walk(path + ".b", GType::AccInt, depth + 1, write_ok);
                    walk(path + ".c", GType::Int, depth + 1, write_ok);
                    break;
                case GType::List:
                    walk(path + ".v", GType::Int, depth + 1, write_ok);
                    walk(path + ".next", GType::AccList, depth + 1, write_ok);
                    break;
                case GType::AccInt:
                case GType::AccS:
                case GType::AccList:
                    walk(path + ".all", pointee(t), depth + 1, true);
                    break;
                case GType::Int: break;
                }
            };
        for (const GVar& v : vars) walk(v.name, v.type, 0, v.writable_base);
        return found;
    }

    std::string indent(int depth) { return std::string(depth * 2, ' '); }

    // Every scope is set up with at least one writable integer path, so a
    // well-typed filler statement always exists.
    void emit_filler(const std::vector<GVar>& vars, int depth) {
        const auto targets = paths_of(vars, GType::Int, true);
        assert(!targets.empty());
        out << indent(depth) << targets[0] << " := 0;\n";
        if (cov) ++cov->assigns;
    }

    // Emits one statement; returns false if nothing applicable was found.
    bool gen_stmt(const std::vector<GVar>& vars, const std::vector<GProc>& procs,
                  int depth, int& budget) {
        if (budget <= 0) return false;
        --budget;
        for (int attempt = 0; attempt < 8; ++attempt) {
            int kind = static_cast<int>(pick(13));
            if (kind == 12) kind = 7; // calls carry double weight
            if (kind <= 1) { // integer literal assignment
                const auto targets = paths_of(vars, GType::Int, true);
                if (targets.empty()) continue;
                out << indent(depth) << targets[pick(targets.size())] << " := "
                    << pick(100) << ";\n";
                if (cov) ++cov->assigns;
                return true;
            }
            if (kind == 2) { // null assignment
                static constexpr GType kAcc[] = {GType::AccInt, GType::AccS, GType::AccList};
                const auto targets = paths_of(vars, kAcc[pick(3)], true);
                if (targets.empty()) continue;
                out << indent(depth) << targets[pick(targets.size())] << " := null;\n";
                if (cov) ++cov->assigns;
                return true;
            }
            if (kind == 3) { // allocation
                static constexpr GType kAcc[] = {GType::AccInt, GType::AccS, GType::AccList};
                const GType t = kAcc[pick(3)];
                const auto targets = paths_of(vars, t, true);
                if (targets.empty()) continue;
                out << indent(depth) << targets[pick(targets.size())] << " := new "
                    << pointee_name(t) << ";\n";
                if (cov) ++cov->assign_news;
                return true;
            }
            if (kind == 4 || kind == 5) { // name assignment
                const GType t = random_type();
                const auto targets = paths_of(vars, t, true);
                const auto sources = paths_of(vars, t, false);
                if (targets.empty() || sources.empty()) continue;
                out << indent(depth) << targets[pick(targets.size())] << " := "
                    << sources[pick(sources.size())] << ";\n";
                if (cov) ++cov->assigns;
                return true;
            }
            if (kind == 6) { // 'Access assignment
                static constexpr GType kAcc[] = {GType::AccInt, GType::AccS, GType::AccList};
                const GType t = kAcc[pick(3)];
                const auto targets = paths_of(vars, t, true);
                const auto sources = paths_of(vars, pointee(t), false);
                if (targets.empty() || sources.empty()) continue;
                out << indent(depth) << targets[pick(targets.size())] << " := "
                    << sources[pick(sources.size())] << "'Access;\n";
                if (cov) ++cov->assigns;
                return true;
            }
            if (kind == 7 && !procs.empty()) { // call
                const GProc& callee = procs[pick(procs.size())];
                // Clustered calls root every actual in one variable, which is
                // how overlapping borrows/observes arise.
                std::string cluster;
                if (chance(60)) cluster = vars[pick(vars.size())].name;
                std::vector<std::string> actuals;
                bool ok = true;
                for (const auto& [mode, t] : callee.params) {
                    const bool need_name = mode != Mode::In;
                    auto names = paths_of(vars, t, need_name);
                    if (!cluster.empty()) {
                        std::vector<std::string> near;
                        for (const auto& n : names)
                            if (n.compare(0, cluster.size(), cluster) == 0) near.push_back(n);
                        if (!near.empty()) names = std::move(near);
                    }
                    if (mode == Mode::In && t == GType::Int && (names.empty() || chance(40))) {
                        actuals.push_back(std::to_string(pick(100)));
                        continue;
                    }
                    if (mode == Mode::In && is_access(t) && names.empty() && chance(50)) {
                        actuals.push_back("null");
                        continue;
                    }
                    if (mode == Mode::In && is_access(t) && chance(35)) {
                        const auto tgt = paths_of(vars, pointee(t), false);
                        if (!tgt.empty()) {
                            actuals.push_back(tgt[pick(tgt.size())] + "'Access");
                            continue;
                        }
                    }
                    if (names.empty()) {
                        ok = false;
                        break;
                    }
                    actuals.push_back(names[pick(names.size())]);
                }
                if (!ok || actuals.empty()) continue;
                // Occasionally pass the same object twice; overlapping
                // actuals are the sharpest probe of the borrow rules.
                if (actuals.size() >= 2 && chance(30)) {
                    for (std::size_t i = 0; i + 1 < callee.params.size(); ++i)
                        for (std::size_t j = i + 1; j < callee.params.size(); ++j)
                            if (callee.params[i].second == callee.params[j].second &&
                                actuals[j].find('\'') == std::string::npos &&
                                actuals[i].find('\'') == std::string::npos &&
                                !std::isdigit(static_cast<unsigned char>(actuals[i][0])) &&
                                actuals[i] != "null") {
                                actuals[j] = actuals[i];
                                i = callee.params.size();
                                break;
                            }
                }
                out << indent(depth) << callee.name << "(";
                for (std::size_t i = 0; i < actuals.size(); ++i)
                    out << (i ? ", " : "") << actuals[i];
                out << ");\n";
                if (cov) ++cov->calls;
                return true;
            }
            if (kind == 8 && depth < 5 && budget >= 2) { // if
                out << indent(depth) << "if * then\n";
                if (!gen_stmt(vars, procs, depth + 1, budget)) emit_filler(vars, depth + 1);
                out << indent(depth) << "else\n";
                if (!gen_stmt(vars, procs, depth + 1, budget)) emit_filler(vars, depth + 1);
                out << indent(depth) << "end if;\n";
                if (cov) ++cov->ifs;
                return true;
            }
            if (kind == 10 || kind == 11) {
                // Variable-level pointer copy / 'Access: aliases rooted at
                // plain variables survive longest, so bias toward them.
                static constexpr GType kAcc[] = {GType::AccInt, GType::AccS, GType::AccList};
                const GType t = kAcc[pick(3)];
                std::vector<std::string> targets;
                for (const GVar& v : vars)
                    if (v.type == t && v.writable_base) targets.push_back(v.name);
                if (targets.empty()) targets = paths_of(vars, t, true);
                const auto sources = kind == 10 ? paths_of(vars, t, false)
                                                : paths_of(vars, pointee(t), false);
                if (targets.empty() || sources.empty()) continue;
                out << indent(depth) << targets[pick(targets.size())] << " := "
                    << sources[pick(sources.size())] << (kind == 10 ? "" : "'Access")
                    << ";\n";
                if (cov) ++cov->assigns;
                return true;
            }
            if (kind == 9 && depth < 5 && budget >= 2) { // block
                out << indent(depth) << "begin\n";
                const int n = 2 + static_cast<int>(pick(2));
                int emitted = 0;
                for (int i = 0; i < n && budget > 0; ++i)
                    emitted += gen_stmt(vars, procs, depth + 1, budget) ? 1 : 0;
                if (emitted == 0) emit_filler(vars, depth + 1);
                out << indent(depth) << "end;\n";
                if (cov) ++cov->blocks;
                return true;
            }
        }
        return false;
    }

    // Allocates pointer-bearing variables up front so that generated
    // dereferences mostly hit live memory instead of stopping on null.
    int emit_allocations(const std::vector<GVar>& vars, int depth, int percent) {
        int emitted = 0;
        const auto alloc = [&](const std::string& path, const char* ty) {
            out << indent(depth) << path << " := new " << ty << ";\n";
            if (cov) ++cov->assign_news;
            ++emitted;
        };
        for (const GVar& v : vars) {
            if (!v.writable_base || !chance(percent)) continue;
            switch (v.type) {
            case GType::AccInt: alloc(v.name, "integer"); break;
            case GType::AccS:
                alloc(v.name, "S");
                if (chance(60)) alloc(v.name + ".all.b", "integer");
                break;
            case GType::AccList:
                alloc(v.name, "List");
                if (chance(50)) alloc(v.name + ".all.next", "List");
                break;
            case GType::S:
                if (chance(70)) alloc(v.name + ".b", "integer");
                break;
            case GType::List:
                if (chance(70)) alloc(v.name + ".next", "List");
                break;
            case GType::Int: break;
            }
        }
        return emitted;
    }

    void gen_block_body(const std::vector<GVar>& vars, const std::vector<GProc>& procs,
                        int depth, int stmts, int& budget, int alloc_percent = 0) {
        out << indent(depth) << "begin\n";
        int emitted = 0;
        if (alloc_percent > 0) emitted += emit_allocations(vars, depth + 1, alloc_percent);
        for (int i = 0; i < stmts && budget > 0; ++i)
            emitted += gen_stmt(vars, procs, depth + 1, budget) ? 1 : 0;
        if (emitted == 0) emit_filler(vars, depth + 1);
        out << indent(depth) << "end;\n";
    }

    Program generate(int size_budget) {
        out << "procedure Main is\n";
        out << "  type S is record a : integer; b : access integer; c : integer; "
               "end record;\n";
        out << "  type List is record v : integer; next : access List; end record;\n";

        std::vector<GVar> globals;
        const int nvars = 3 + static_cast<int>(pick(4));
        for (int i = 0; i < nvars; ++i) {
            GVar v;
            v.name = fresh_name("g");
            // The first variable anchors filler statements; the rest lean
            // toward pointer-bearing types, since aliasing is the point.
            if (i == 0)
                v.type = GType::Int;
            else
                v.type = chance(70) ? static_cast<GType>(3 + pick(3)) : random_type();
            v.writable_base = true;
            globals.push_back(v);
            out << "  " << v.name << " : " << gtype_text(v.type) << ";\n";
        }

        std::vector<GProc> procs;
        const int nprocs = static_cast<int>(pick(3));
        for (int i = 0; i < nprocs; ++i) {
            GProc proc;
            proc.name = fresh_name("P");
            const int nparams = 1 + static_cast<int>(pick(3));
            std::vector<GVar> formals;
            out << "  procedure " << proc.name << "(";
            for (int j = 0; j < nparams; ++j) {
                GVar f;
                f.name = fresh_name("x");
                // Pointer-heavy with a solid share of record params: record
                // in-formals are the observe entry point.
                f.type = chance(55) ? static_cast<GType>(3 + pick(3))
                         : chance(60) ? (chance(50) ? GType::S : GType::List)
                                      : random_type();
                Mode mode = Mode::In;
                const int m = static_cast<int>(pick(3));
                if (m == 1) mode = Mode::InOut;
                if (m == 2) mode = Mode::Out;
                f.writable_base = mode != Mode::In;
                proc.params.emplace_back(mode, f.type);
                formals.push_back(f);
                out << (j ? "; " : "") << f.name << " : " << to_string(mode) << " "
                    << gtype_text(f.type);
            }
            out << ") is\n";
            std::vector<GVar> locals = formals;
            {
                // A guaranteed integer local anchors filler statements.
                GVar l;
                l.name = fresh_name("t");
                l.type = GType::Int;
                l.writable_base = true;
                locals.push_back(l);
                out << "    " << l.name << " : integer;\n";
            }
            if (chance(50)) {
                GVar l;
                l.name = fresh_name("t");
                l.type = chance(60) ? static_cast<GType>(3 + pick(3)) : random_type();
                l.writable_base = true;
                locals.push_back(l);
                out << "    " << l.name << " : " << gtype_text(l.type) << ";\n";
            }
            int proc_budget = 2 + static_cast<int>(pick(3));
            out << "  begin\n";
            gen_block_body(locals, procs, 2, proc_budget, proc_budget, 30);
            out << "  end;\n";
            procs.push_back(std::move(proc));
        }

        out << "begin\n";
        int budget = size_budget;
        gen_block_body(globals, procs, 1, size_budget, budget, 85);
        out << "end;\n";

        ParseResult parsed = parse_source(out.str());
        if (!parsed.program)
            throw std::logic_error("generator produced unparseable source: " +
                                   parsed.error->message + "\n" + out.str());
        return std::move(*parsed.program);
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Shrinking
// ---------------------------------------------------------------------------

namespace {

/// Applies the `target`-th reduction site; returns true when one was
/// applied. Sites: block element deletion, if-to-branch replacement,
/// declaration deletion.
struct Reducer {
    int target;
    int counter = 0;
    bool applied = false;

    bool here() {
        if (applied) return false;
        if (counter++ != target) return false;
        applied = true;
        return true;
    }

    void visit_stmt(Stmt& s) {
        if (applied) return;
        if (auto* block = std::get_if<BlockStmt>(&s.node)) {
            // Blocks must stay non-empty to remain printable source.
            if (block->stmts.size() > 1) {
                for (std::size_t i = 0; i < block->stmts.size(); ++i) {
                    if (here()) {
                        block->stmts.erase(block->stmts.begin() + static_cast<long>(i));
                        return;
                    }
                }
            }
            for (auto& st : block->stmts) visit_stmt(*st);
        } else if (auto* ifs = std::get_if<IfStmt>(&s.node)) {
            if (here()) {
                StmtPtr keep = std::move(ifs->then_branch);
                s.node = std::move(keep->node);
                return;
            }
            if (here()) {
                StmtPtr keep = std::move(ifs->else_branch);
                s.node = std::move(keep->node);
                return;
            }
            visit_stmt(*ifs->then_branch);
            if (!applied) visit_stmt(*ifs->else_branch);
        }
    }

    void visit_proc(ProcDecl& proc) {
        if (applied) return;
        for (std::size_t i = 0; i < proc.decls.size(); ++i) {
            if (here()) {
                proc.decls.erase(proc.decls.begin() + static_cast<long>(i));
                return;
            }
        }
        for (auto& d : proc.decls)
            if (auto* nested = std::get_if<ProcDecl>(&d->node)) {
                visit_proc(*nested);
                if (applied) return;
            }
        visit_stmt(*proc.body);
    }
};

int count_sites(const Program& p) {
    Program copy = clone(p);
    Reducer r{-1};
    r.visit_proc(copy.main);
    return r.counter;
}

std::optional<Program> reduce_at(const Program& p, int site) {
    Program copy = clone(p);
    Reducer r{site};
    r.visit_proc(copy.main);
    if (!r.applied) return std::nullopt;
    return copy;
}

} // namespace

Program gen_program(std::uint64_t seed, int size_budget, GenCoverage* cov,
                    const BorrowckOptions& opts) {
    Gen gen(seed * 0x9E3779B97F4A7C15ULL + 1, cov);
    Program p = gen.generate(size_budget);

    // Acceptance-guided repair: a rejected program exercises nothing at
    // runtime, so greedily delete statements while the diagnostic count of
    // the checker under test drops. Repairing against the checker under test
    // (not the reference rules) is what lets mutation-exposing programs
    // survive: the mutated checker accepts them, the reference would not.
    const auto ndiags = [&](const Program& q) { return analyze(q, opts).diagnostics.size(); };
    std::size_t cur = ndiags(p);
    bool improved = true;
    while (cur > 0 && improved) {
        improved = false;
        const int sites = count_sites(p);
        for (int i = 0; i < sites; ++i) {
            auto candidate = reduce_at(p, i);
            if (!candidate) continue;
            const std::size_t n = ndiags(*candidate);
            if (n < cur) {
                p = std::move(*candidate);
                cur = n;
                improved = true;
                break;
            }
        }
    }
    return p;
}

Program shrink_violation(const Program& p, Violation::Kind kind, int max_depth,
                         int step_budget, const BorrowckOptions& opts) {
    const auto exhibits = [&](const Program& q) {
        const VerifyReport rep = lockstep_verify(q, max_depth, step_budget, opts);
        if (!rep.applicable) return false;
        return std::any_of(rep.violations.begin(), rep.violations.end(),
                           [&](const Violation& v) { return v.kind == kind; });
    };

    Program current = clone(p);
    if (!exhibits(current)) return current;
    bool improved = true;
    while (improved) {
        improved = false;
        const int sites = count_sites(current);
        for (int i = 0; i < sites; ++i) {
            auto candidate = reduce_at(current, i);
            if (!candidate) continue;
            if (exhibits(*candidate)) {
                current = std::move(*candidate);
                improved = true;
                break;
            }
        }
    }
    return current;
}

// ---------------------------------------------------------------------------
// Fuzzing
// ---------------------------------------------------------------------------

FuzzReport fuzz_soundness(std::uint64_t n, std::uint64_t seed, int max_depth,
                          int step_budget, const BorrowckOptions& opts) {
    FuzzReport rep;
    for (std::uint64_t i = 0; i < n; ++i) {
        const Program prog = gen_program(seed + i, 24, nullptr, opts);
        ++rep.generated;
        const VerifyReport vr = lockstep_verify(prog, max_depth, step_budget, opts);
        if (!vr.applicable) {
            ++rep.rejected;
            continue;
        }
        ++rep.accepted;
        rep.executions += vr.executions;
        rep.truncated += vr.truncated;
        std::set<Violation::Kind> kinds;
        for (const Violation& v : vr.violations) kinds.insert(v.kind);
        for (const Violation::Kind kind : kinds) {
            const Program small =
                shrink_violation(prog, kind, max_depth, step_budget, opts);
            const VerifyReport small_rep =
                lockstep_verify(small, max_depth, step_budget, opts);
            bool stored = false;
            for (const Violation& v : small_rep.violations)
                if (v.kind == kind && !stored) {
                    rep.violations.push_back(v);
                    stored = true;
                }
            if (!stored) {
                // Shrinking must preserve the violation; keep the original
                // evidence if it somehow did not.
                for (const Violation& v : vr.violations)
                    if (v.kind == kind && !stored) {
                        rep.violations.push_back(v);
                        stored = true;
                    }
            }
        }
    }
    return rep;
}

} // namespace muspark
