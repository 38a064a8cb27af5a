#pragma once

#include "muspark/ast.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace muspark {

/// Semantic type: integer | R | access tau | nulltype.
struct Type {
    enum class Kind { Integer, Record, Access, Null } kind = Kind::Integer;
    std::string record_name;      // Record
    std::shared_ptr<Type> inner;  // Access

    static Type integer() { return {Kind::Integer, {}, nullptr}; }
    static Type null_type() { return {Kind::Null, {}, nullptr}; }
    static Type record(std::string name) { return {Kind::Record, std::move(name), nullptr}; }
    static Type access(Type t) {
        return {Kind::Access, {}, std::make_shared<Type>(std::move(t))};
    }

    bool is_access() const { return kind == Kind::Access; }
    bool is_record() const { return kind == Kind::Record; }

    /// Structural equality (distinct from the ≡ equivalence in typecheck).
    bool same_as(const Type& other) const;
    std::string to_string() const;
};

struct RecordInfo {
    std::vector<std::pair<std::string, Type>> fields;
    const Type* field_type(const std::string& name) const;
};

struct ProcParam {
    std::string name;
    Mode mode;
    Type type;
};

struct ProcSig {
    std::vector<ProcParam> params;
    int proc_id = -1; // id of the ProcDecl node
};

/// What a procedure body can see: type declarations, visible procedures,
/// its formals and its locals. Built constructively in declaration order.
struct Scope {
    std::map<std::string, RecordInfo> records;
    std::map<std::string, ProcSig> procs;
    std::map<std::string, Type> vars;
};

} // namespace muspark
