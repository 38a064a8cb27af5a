#pragma once

#include "muspark/ast.hpp"
#include "muspark/typecheck.hpp"
#include "muspark/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace muspark {

/// Uniquely identified allocation unit; equal cells reached by distinct
/// paths constitute aliasing.
using Cell = std::uint64_t;

/// Runtime memory tree. Access targets are shared pointers: sharing a node
/// between two trees is exactly what aliasing means here, and must stay
/// observable through cell identity.
struct MemNode {
    enum class Kind { Int, Record, Access } kind;
    Cell cell = 0;
    long long value = 0;                                             // Int
    std::vector<std::pair<std::string, std::shared_ptr<MemNode>>> fields; // Record
    std::shared_ptr<MemNode> target; // Access; nullptr encodes Null
};

using MemNodePtr = std::shared_ptr<MemNode>;

/// One activation frame: variable name -> memory tree. During a call only
/// the callee frame is active.
struct MemFrame {
    int proc_id = -1;
    std::vector<std::pair<std::string, MemNodePtr>> vars; // declaration order
    MemNodePtr find(const std::string& name) const;
};

struct RuntimeStop {
    enum class Kind { NullDereference, StepBudgetExceeded, ChoicesExhausted } kind;
    std::string path;
    SourceLocation location;
};

struct Outcome {
    std::optional<RuntimeStop> stop; // empty => Completed
    bool completed() const { return !stop.has_value(); }
};

/// Booleans consumed left-to-right at if statements; running out is an
/// explicit outcome, not an error.
struct ChoiceSource {
    std::vector<bool> choices;
    std::size_t next = 0;
    int step_budget = 10000;
    std::size_t consumed() const { return next; }
};

/// Lockstep checkpoint events, aligned with borrowck snapshot ids.
enum class TraceEvent { Stmt, CallTransfer, CallReturn, Decl };

/// Called with the point id and the active frame after each step. Returning
/// false aborts the run (used by the oracle to stop on first violation --
/// not used by default).
using Observer =
    std::function<bool(const std::string& point, TraceEvent ev, const MemFrame& active)>;

struct TraceEntry {
    std::string point;
    TraceEvent event;
    std::string dump; // canonical rendering of the active frame
};

struct RunResult {
    Outcome outcome;
    std::vector<TraceEntry> trace;
    std::size_t choices_consumed = 0;
};

Cell fresh_cell();
MemNodePtr fresh_tree(const Type& t, const Scope& scope);

/// In-place value/target update preserving dst cells; access targets are
/// shared from src (this is where aliasing arises).
void assign_tree(const MemNodePtr& dst, const MemNodePtr& src);

/// Executes the program with the given choices. `checked` must come from a
/// clean check_program run on the same AST. The observer, when set, fires
/// at every statement, declaration, call transfer and call return.
RunResult run(const Program& p, const CheckedProgram& checked, ChoiceSource choices,
              const Observer& observer = {}, bool record_trace = false);

/// Canonical rendering of one frame; cell ids renumbered in visit order so
/// dumps are reproducible while sharing stays visible.
std::string dump_frame(const MemFrame& frame);

} // namespace muspark
