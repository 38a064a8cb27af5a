#pragma once

#include "muspark/borrowck.hpp"
#include "muspark/diagnostics.hpp"
#include "muspark/interp.hpp"
#include "muspark/oracle.hpp"

#include <json.hpp>

#include <string>

namespace muspark {

/// Outcome of one `run` invocation, as reported by the CLI.
struct RunSummary {
    std::string outcome; // "completed", "null-dereference", ...
    std::string stop_path;
    std::size_t choices_consumed = 0;
    std::vector<std::string> trace; // canonical frame dumps, when requested

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

std::string outcome_name(const Outcome& o);

void to_json(nlohmann::json& j, const SourceLocation& loc);
void from_json(const nlohmann::json& j, SourceLocation& loc);

void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);

void to_json(nlohmann::json& j, const Violation& v);
void from_json(const nlohmann::json& j, Violation& v);

void to_json(nlohmann::json& j, const VerifyReport& r);
void from_json(const nlohmann::json& j, VerifyReport& r);

void to_json(nlohmann::json& j, const FuzzReport& r);
void from_json(const nlohmann::json& j, FuzzReport& r);

void to_json(nlohmann::json& j, const RunSummary& r);
void from_json(const nlohmann::json& j, RunSummary& r);

bool operator==(const Violation& a, const Violation& b);
bool operator==(const VerifyReport& a, const VerifyReport& b);
bool operator==(const FuzzReport& a, const FuzzReport& b);

} // namespace muspark
