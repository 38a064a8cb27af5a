#pragma once

#include "muspark/borrowck.hpp"
#include "muspark/interp.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace muspark {

/// All paths in the active frame reaching a given memory cell.
struct AliasSet {
    Cell cell = 0;
    std::vector<Path> members;
};

struct Violation {
    enum class Kind { Crew, Normalization, Readability, NoCycle, Coherence } kind;
    std::string point;
    std::string detail; // offending paths/permissions
    std::string program_source; // reproduction
    std::vector<bool> choices;
};

std::string to_string(Violation::Kind k);

struct VerifyReport {
    bool applicable = true; // false when borrowck rejected the program
    std::uint64_t executions = 0;
    std::uint64_t truncated = 0; // step budget exceeded
    std::vector<Violation> violations;
};

/// Groups every node reachable from the frame by cell.
std::vector<AliasSet> alias_sets(const MemFrame& frame);

/// CREW: in any set of >= 2 aliases, a writable member forbids any other
/// readable or writable member.
std::vector<Violation> crew_check(const std::vector<AliasSet>& sets, PermEnv& perm,
                                  const std::string& point);

/// Lemmas 1-4: Normalization, Readability, No-cycle, Coherence.
std::vector<Violation> lemma_checks(const MemFrame& frame, PermEnv& perm,
                                    const std::string& point);

/// Runs borrowck and the interpreter in lockstep over every choice vector up
/// to max_depth, checking CREW and the lemmas at each checkpoint.
VerifyReport lockstep_verify(const Program& p, int max_depth = 12, int step_budget = 10000,
                             const BorrowckOptions& opts = {});

/// Statement production coverage of the generator, for instrumentation.
struct GenCoverage {
    std::uint64_t assigns = 0, assign_news = 0, calls = 0, ifs = 0, blocks = 0;
};

/// Seed-deterministic well-typed program generator.
/// Generation is acceptance-guided: statements the given checker rejects are
/// greedily deleted, so most returned programs are runnable under it.
Program gen_program(std::uint64_t seed, int size_budget = 24, GenCoverage* cov = nullptr,
                    const BorrowckOptions& opts = {});

struct FuzzReport {
    std::uint64_t generated = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t executions = 0;
    std::uint64_t truncated = 0;
    std::vector<Violation> violations; // shrunk reproductions
};

/// Generates n programs; lockstep-verifies every borrowck-accepted one.
/// Violations are minimized by statement deletion before reporting.
FuzzReport fuzz_soundness(std::uint64_t n, std::uint64_t seed, int max_depth = 12,
                          int step_budget = 10000, const BorrowckOptions& opts = {});

/// Statement-deletion shrinking: smallest variant that is still accepted and
/// still exhibits a violation of the same kind.
Program shrink_violation(const Program& p, Violation::Kind kind, int max_depth,
                         int step_budget, const BorrowckOptions& opts);

} // namespace muspark
