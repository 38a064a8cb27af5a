#include "muspark/ast.hpp"

#include <sstream>

namespace muspark {

int Path::deref_count() const {
    int n = 0;
    for (const auto& s : selectors)
        if (s.kind == Selector::Kind::Deref) ++n;
    return n;
}

Path Path::parent() const {
    Path p = *this;
    p.selectors.pop_back();
    return p;
}

bool Path::is_strict_prefix_of(const Path& q) const {
    if (base != q.base || selectors.size() >= q.selectors.size()) return false;
    for (std::size_t i = 0; i < selectors.size(); ++i)
        if (!(selectors[i] == q.selectors[i])) return false;
    return true;
}

std::string Path::to_string() const {
    std::string out = base;
    for (const auto& s : selectors) {
        out += '.';
        out += s.kind == Selector::Kind::Deref ? "all" : s.field;
    }
    return out;
}

std::string to_string(Mode m) {
    switch (m) {
    case Mode::In: return "in";
    case Mode::InOut: return "in-out";
    case Mode::Out: return "out";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Cloning
// ---------------------------------------------------------------------------

Expr clone(const Expr& e) {
    return e; // all alternatives are value types
}

StmtPtr clone(const Stmt& s) {
    auto out = std::make_unique<Stmt>();
    out->location = s.location;
    out->id = s.id;
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, AssignStmt> || std::is_same_v<T, AssignNewStmt> ||
                          std::is_same_v<T, CallStmt>) {
                out->node = node;
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                out->node = IfStmt{clone(*node.then_branch), clone(*node.else_branch)};
            } else {
                BlockStmt b;
                for (const auto& st : node.stmts) b.stmts.push_back(clone(*st));
                out->node = std::move(b);
            }
        },
        s.node);
    return out;
}

DeclPtr clone(const Decl& d) {
    auto out = std::make_unique<Decl>();
    out->location = d.location;
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ProcDecl>) {
                ProcDecl p;
                p.name = node.name;
                p.params = node.params;
                p.id = node.id;
                for (const auto& sub : node.decls) p.decls.push_back(clone(*sub));
                p.body = clone(*node.body);
                out->node = std::move(p);
            } else {
                out->node = node;
            }
        },
        d.node);
    return out;
}

Program clone(const Program& p) {
    Program out;
    out.main.name = p.main.name;
    out.main.params = p.main.params;
    out.main.id = p.main.id;
    for (const auto& d : p.main.decls) out.main.decls.push_back(clone(*d));
    out.main.body = clone(*p.main.body);
    return out;
}

// ---------------------------------------------------------------------------
// Pretty printer
// ---------------------------------------------------------------------------

namespace {

void indent(std::ostream& os, int depth) {
    for (int i = 0; i < depth; ++i) os << "  ";
}

void print_expr(std::ostream& os, const Expr& e) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NullLit>) os << "null";
            else if constexpr (std::is_same_v<T, IntLit>) os << node.value;
            else if constexpr (std::is_same_v<T, NameRef>) os << node.path.to_string();
            else os << node.path.to_string() << "'Access";
        },
        e.node);
}

void print_stmt(std::ostream& os, const Stmt& s, int depth) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
                indent(os, depth);
                os << node.target.to_string() << " := ";
                print_expr(os, node.rhs);
                os << ";\n";
            } else if constexpr (std::is_same_v<T, AssignNewStmt>) {
                indent(os, depth);
                os << node.target.to_string() << " := new " << node.type_name << ";\n";
            } else if constexpr (std::is_same_v<T, CallStmt>) {
                indent(os, depth);
                os << node.callee << "(";
                for (std::size_t i = 0; i < node.actuals.size(); ++i) {
                    if (i) os << ", ";
                    print_expr(os, node.actuals[i]);
                }
                os << ");\n";
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                indent(os, depth);
                os << "if * then\n";
                print_stmt(os, *node.then_branch, depth + 1);
                indent(os, depth);
                os << "else\n";
                print_stmt(os, *node.else_branch, depth + 1);
                indent(os, depth);
                os << "end if;\n";
            } else {
                indent(os, depth);
                os << "begin\n";
                for (const auto& st : node.stmts) print_stmt(os, *st, depth + 1);
                indent(os, depth);
                os << "end;\n";
            }
        },
        s.node);
}

void print_type_expr(std::ostream& os, const TypeExpr& te) {
    if (te.kind == TypeExpr::Kind::AccessTo) os << "access ";
    os << te.name;
}

void print_decl(std::ostream& os, const Decl& d, int depth);

void print_proc(std::ostream& os, const ProcDecl& p, int depth) {
    indent(os, depth);
    os << "procedure " << p.name;
    if (!p.params.empty()) {
        os << " (";
        for (std::size_t i = 0; i < p.params.size(); ++i) {
            if (i) os << "; ";
            os << p.params[i].name << " : " << to_string(p.params[i].mode) << " ";
            print_type_expr(os, p.params[i].type);
        }
        os << ")";
    }
    os << " is\n";
    for (const auto& d : p.decls) print_decl(os, *d, depth + 1);
    indent(os, depth);
    os << "begin\n";
    print_stmt(os, *p.body, depth + 1);
    indent(os, depth);
    os << "end;\n";
}

void print_decl(std::ostream& os, const Decl& d, int depth) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, RecordDecl>) {
                indent(os, depth);
                os << "type " << node.name << " is record ";
                for (const auto& [fname, ftype] : node.fields) {
                    os << fname << " : ";
                    print_type_expr(os, ftype);
                    os << "; ";
                }
                os << "end record;\n";
            } else if constexpr (std::is_same_v<T, VarDecl>) {
                indent(os, depth);
                os << node.name << " : ";
                print_type_expr(os, node.type);
                os << ";\n";
            } else {
                print_proc(os, node, depth);
            }
        },
        d.node);
}

} // namespace

std::string pretty_print(const Program& p) {
    std::ostringstream os;
    print_proc(os, p.main, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

namespace {

bool eq(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* ia = std::get_if<IntLit>(&a.node))
        return ia->value == std::get<IntLit>(b.node).value;
    if (const auto* na = std::get_if<NameRef>(&a.node))
        return na->path == std::get<NameRef>(b.node).path;
    if (const auto* aa = std::get_if<AccessOf>(&a.node))
        return aa->path == std::get<AccessOf>(b.node).path;
    return true; // NullLit
}

bool eq(const Stmt& a, const Stmt& b);

bool eq_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq(*a[i], *b[i])) return false;
    return true;
}

bool eq(const Stmt& a, const Stmt& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* x = std::get_if<AssignStmt>(&a.node)) {
        const auto& y = std::get<AssignStmt>(b.node);
        return x->target == y.target && eq(x->rhs, y.rhs);
    }
    if (const auto* x = std::get_if<AssignNewStmt>(&a.node)) {
        const auto& y = std::get<AssignNewStmt>(b.node);
        return x->target == y.target && x->type_name == y.type_name;
    }
    if (const auto* x = std::get_if<CallStmt>(&a.node)) {
        const auto& y = std::get<CallStmt>(b.node);
        if (x->callee != y.callee || x->actuals.size() != y.actuals.size()) return false;
        for (std::size_t i = 0; i < x->actuals.size(); ++i)
            if (!eq(x->actuals[i], y.actuals[i])) return false;
        return true;
    }
    if (const auto* x = std::get_if<IfStmt>(&a.node)) {
        const auto& y = std::get<IfStmt>(b.node);
        return eq(*x->then_branch, *y.then_branch) && eq(*x->else_branch, *y.else_branch);
    }
    return eq_stmts(std::get<BlockStmt>(a.node).stmts, std::get<BlockStmt>(b.node).stmts);
}

bool eq_type_expr(const TypeExpr& a, const TypeExpr& b) {
    return a.kind == b.kind && a.name == b.name;
}

bool eq(const Decl& a, const Decl& b);

bool eq_proc(const ProcDecl& a, const ProcDecl& b) {
    if (a.name != b.name || a.params.size() != b.params.size()) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (a.params[i].name != b.params[i].name || a.params[i].mode != b.params[i].mode ||
            !eq_type_expr(a.params[i].type, b.params[i].type))
            return false;
    }
    if (a.decls.size() != b.decls.size()) return false;
    for (std::size_t i = 0; i < a.decls.size(); ++i)
        if (!eq(*a.decls[i], *b.decls[i])) return false;
    return eq(*a.body, *b.body);
}

bool eq(const Decl& a, const Decl& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* x = std::get_if<RecordDecl>(&a.node)) {
        const auto& y = std::get<RecordDecl>(b.node);
        if (x->name != y.name || x->fields.size() != y.fields.size()) return false;
        for (std::size_t i = 0; i < x->fields.size(); ++i)
            if (x->fields[i].first != y.fields[i].first ||
                !eq_type_expr(x->fields[i].second, y.fields[i].second))
                return false;
        return true;
    }
    if (const auto* x = std::get_if<VarDecl>(&a.node)) {
        const auto& y = std::get<VarDecl>(b.node);
        return x->name == y.name && eq_type_expr(x->type, y.type);
    }
    return eq_proc(std::get<ProcDecl>(a.node), std::get<ProcDecl>(b.node));
}

} // namespace

bool ast_equal(const Program& a, const Program& b) {
    return eq_proc(a.main, b.main);
}

} // namespace muspark
