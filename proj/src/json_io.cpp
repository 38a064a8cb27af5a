#include "muspark/json_io.hpp"

namespace muspark {

std::string outcome_name(const Outcome& o) {
    if (!o.stop) return "completed";
    switch (o.stop->kind) {
    case RuntimeStop::Kind::NullDereference: return "null-dereference";
    case RuntimeStop::Kind::StepBudgetExceeded: return "step-budget-exceeded";
    case RuntimeStop::Kind::ChoicesExhausted: return "choices-exhausted";
    }
    return "?";
}

namespace {

Violation::Kind kind_from_string(const std::string& s) {
    if (s == "crew") return Violation::Kind::Crew;
    if (s == "normalization") return Violation::Kind::Normalization;
    if (s == "readability") return Violation::Kind::Readability;
    if (s == "no-cycle") return Violation::Kind::NoCycle;
    return Violation::Kind::Coherence;
}

} // namespace

void to_json(nlohmann::json& j, const SourceLocation& loc) {
    j = {{"line", loc.line}, {"column", loc.column}, {"offset", loc.offset}};
}

void from_json(const nlohmann::json& j, SourceLocation& loc) {
    loc.line = j.at("line").get<int>();
    loc.column = j.at("column").get<int>();
    loc.offset = j.at("offset").get<std::size_t>();
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
    j = {{"rule", d.rule},         {"code", d.code},     {"path", d.path},
         {"required", d.required}, {"actual", d.actual}, {"location", d.location},
         {"message", d.message}};
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
    d.rule = j.at("rule").get<std::string>();
    d.code = j.at("code").get<std::string>();
    d.path = j.at("path").get<std::string>();
    d.required = j.at("required").get<std::vector<std::string>>();
    d.actual = j.at("actual").get<std::string>();
    d.location = j.at("location").get<SourceLocation>();
    d.message = j.at("message").get<std::string>();
}

void to_json(nlohmann::json& j, const Violation& v) {
    j = {{"kind", to_string(v.kind)},
         {"point", v.point},
         {"detail", v.detail},
         {"program", v.program_source},
         {"choices", v.choices}};
}

void from_json(const nlohmann::json& j, Violation& v) {
    v.kind = kind_from_string(j.at("kind").get<std::string>());
    v.point = j.at("point").get<std::string>();
    v.detail = j.at("detail").get<std::string>();
    v.program_source = j.at("program").get<std::string>();
    v.choices = j.at("choices").get<std::vector<bool>>();
}

void to_json(nlohmann::json& j, const VerifyReport& r) {
    j = {{"applicable", r.applicable},
         {"executions", r.executions},
         {"truncated", r.truncated},
         {"violations", r.violations}};
}

void from_json(const nlohmann::json& j, VerifyReport& r) {
    r.applicable = j.at("applicable").get<bool>();
    r.executions = j.at("executions").get<std::uint64_t>();
    r.truncated = j.at("truncated").get<std::uint64_t>();
    r.violations = j.at("violations").get<std::vector<Violation>>();
}

void to_json(nlohmann::json& j, const FuzzReport& r) {
    j = {{"generated", r.generated},   {"accepted", r.accepted},
         {"rejected", r.rejected},     {"executions", r.executions},
         {"truncated", r.truncated},   {"violations", r.violations}};
}

void from_json(const nlohmann::json& j, FuzzReport& r) {
    r.generated = j.at("generated").get<std::uint64_t>();
    r.accepted = j.at("accepted").get<std::uint64_t>();
    r.rejected = j.at("rejected").get<std::uint64_t>();
    r.executions = j.at("executions").get<std::uint64_t>();
    r.truncated = j.at("truncated").get<std::uint64_t>();
    r.violations = j.at("violations").get<std::vector<Violation>>();
}

void to_json(nlohmann::json& j, const RunSummary& r) {
    j = {{"outcome", r.outcome},
         {"stop_path", r.stop_path},
         {"choices_consumed", r.choices_consumed},
         {"trace", r.trace}};
}

void from_json(const nlohmann::json& j, RunSummary& r) {
    r.outcome = j.at("outcome").get<std::string>();
    r.stop_path = j.at("stop_path").get<std::string>();
    r.choices_consumed = j.at("choices_consumed").get<std::size_t>();
    r.trace = j.at("trace").get<std::vector<std::string>>();
}

bool operator==(const Violation& a, const Violation& b) {
    return a.kind == b.kind && a.point == b.point && a.detail == b.detail &&
           a.program_source == b.program_source && a.choices == b.choices;
}

bool operator==(const VerifyReport& a, const VerifyReport& b) {
    return a.applicable == b.applicable && a.executions == b.executions &&
           a.truncated == b.truncated && a.violations == b.violations;
}

bool operator==(const FuzzReport& a, const FuzzReport& b) {
    return a.generated == b.generated && a.accepted == b.accepted &&
           a.rejected == b.rejected && a.executions == b.executions &&
           a.truncated == b.truncated && a.violations == b.violations;
}

} // namespace muspark
