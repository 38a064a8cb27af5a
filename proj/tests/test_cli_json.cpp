#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <muspark/json_io.hpp>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using namespace muspark;
using nlohmann::json;

namespace {

std::string env_or_fail(const char* name) {
    const char* v = std::getenv(name);
    if (!v) FAIL("environment variable ", std::string(name), " not set");
    return v;
}

struct CmdResult {
    int exit_code = -1;
    std::string out;
};

/// Runs the CLI with the given arguments, capturing stdout and exit code.
CmdResult run_cli(const std::string& args) {
    const std::string cmd = "'" + env_or_fail("MUSPARK_CLI") + "' " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string corpus(const std::string& rel) {
    return "'" + env_or_fail("MUSPARK_CORPUS") + "/" + rel + "'";
}

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

// ---------------------------------------------------------------------------
// Exit codes: 0 accepted/completed, 1 rejected/violating, 2 usage errors
// ---------------------------------------------------------------------------

TEST_CASE("exit codes") {
    CHECK(run_cli("check " + corpus("accept/swap.msk")).exit_code == 0);
    CHECK(run_cli("check " + corpus("reject/cycle.msk")).exit_code == 1);
    CHECK(run_cli("check /no/such/file.msk").exit_code == 2);
    CHECK(run_cli("bogus-subcommand").exit_code == 2);
    CHECK(run_cli("check").exit_code == 2); // missing required file argument
    const std::string bad = write_temp("cli_bad_syntax.msk", "procedure ; nonsense");
    CHECK(run_cli("check " + bad).exit_code == 1);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

TEST_CASE("parse: pretty output and --json wrapper") {
    CmdResult text = run_cli("parse " + corpus("accept/swap.msk"));
    CHECK(text.exit_code == 0);
    CHECK(text.out.find("procedure Main") != std::string::npos);

    CmdResult j = run_cli("--json parse " + corpus("accept/swap.msk"));
    CHECK(j.exit_code == 0);
    const json parsed = json::parse(j.out);
    CHECK(parsed.at("ok") == true);
    CHECK(parsed.at("pretty").get<std::string>().find("Swap") != std::string::npos);
}

TEST_CASE("typecheck: clean and failing programs") {
    CHECK(run_cli("typecheck " + corpus("accept/assign_deep.msk")).exit_code == 0);
    const std::string bad = write_temp(
        "cli_type_error.msk",
        "procedure M is X : access integer; begin X := 7; end;");
    CmdResult r = run_cli("--json typecheck " + bad);
    CHECK(r.exit_code == 1);
    const json parsed = json::parse(r.out);
    CHECK(parsed.at("ok") == false);
    REQUIRE(!parsed.at("diagnostics").empty());
    CHECK(parsed.at("diagnostics")[0].at("code") == "type-mismatch");
}

TEST_CASE("check --json: diagnostics are structured") {
    CmdResult r = run_cli("--json check " + corpus("reject/double_borrow.msk"));
    CHECK(r.exit_code == 1);
    const json parsed = json::parse(r.out);
    CHECK(parsed.at("ok") == false);
    const json& d = parsed.at("diagnostics")[0];
    CHECK(d.at("rule") == "P-B-entryPointInOut");
    CHECK(d.at("code") == "borrow-requires-rw");
    CHECK(d.at("path") == "X");
}

TEST_CASE("check --dump-perms --json exposes snapshots") {
    CmdResult r = run_cli("--json check --dump-perms " + corpus("accept/swap.msk"));
    CHECK(r.exit_code == 0);
    const json parsed = json::parse(r.out);
    const json& perms = parsed.at("perms");
    CHECK(perms.contains("stmt:1:post"));
    CHECK(perms.contains("proc:1:exit"));
    const std::string snap = perms.at("stmt:1:post").get<std::string>();
    CHECK(snap.find("Y: W\n") != std::string::npos);
}

TEST_CASE("run --json: completion and runtime stops") {
    CmdResult ok = run_cli("--json run " + corpus("accept/fig6_run.msk"));
    CHECK(ok.exit_code == 0);
    RunSummary s = json::parse(ok.out).get<RunSummary>();
    CHECK(s.outcome == "completed");
    CHECK(s.stop_path.empty());
    REQUIRE(!s.trace.empty());
    CHECK(s.trace.back().find("ref#") != std::string::npos); // shared cell visible

    CmdResult stop = run_cli("--json run " + corpus("runtime/null_deref.msk"));
    CHECK(stop.exit_code == 1);
    RunSummary t = json::parse(stop.out).get<RunSummary>();
    CHECK(t.outcome == "null-dereference");
    CHECK(t.stop_path == "X");
}

TEST_CASE("run --choices selects branches") {
    const std::string prog = write_temp(
        "cli_branch.msk",
        "procedure Main is g : integer; begin begin if * then g := 1; else g := 2; "
        "end if; end; end;");
    RunSummary a = json::parse(run_cli("--json run --choices 1 " + prog).out).get<RunSummary>();
    CHECK(a.outcome == "completed");
    CHECK(a.choices_consumed == 1);
    CHECK(a.trace.back().find("=1") != std::string::npos);
    RunSummary b = json::parse(run_cli("--json run --choices 0 " + prog).out).get<RunSummary>();
    CHECK(b.trace.back().find("=2") != std::string::npos);
    RunSummary c = json::parse(run_cli("--json run " + prog).out).get<RunSummary>();
    CHECK(c.outcome == "choices-exhausted");
}

TEST_CASE("verify --json on an accepted branching program") {
    CmdResult r = run_cli("--json verify " + corpus("accept/tree_4_4_3.msk"));
    CHECK(r.exit_code == 0);
    VerifyReport report = json::parse(r.out).get<VerifyReport>();
    CHECK(report.applicable);
    CHECK(report.executions == 3);
    CHECK(report.violations.empty());
}

TEST_CASE("fuzz --json reports totals") {
    CmdResult r = run_cli("--json fuzz --count 20 --seed 0 --depth 8 --steps 2000");
    CHECK(r.exit_code == 0);
    FuzzReport report = json::parse(r.out).get<FuzzReport>();
    CHECK(report.generated == 20);
    CHECK(report.accepted + report.rejected == 20);
    CHECK(report.violations.empty());
}

// ---------------------------------------------------------------------------
// JSON round trips
// ---------------------------------------------------------------------------

TEST_CASE("to_json/from_json round trips") {
    Diagnostic d;
    d.rule = "P-assignDeepName";
    d.code = "assign-target-not-writable";
    d.path = "Tree.left.all";
    d.required = {"W", "RW"};
    d.actual = "NO";
    d.location = SourceLocation{4, 7};
    d.message = "target is not writable";
    CHECK(json(d).get<Diagnostic>() == d);

    Violation v;
    v.kind = Violation::Kind::Crew;
    v.point = "stmt:3:post";
    v.detail = "X.all(RW) Y.all(R)";
    v.program_source = "procedure Main is ...";
    v.choices = {true, false, true};
    CHECK(json(v).get<Violation>() == v);

    VerifyReport vr;
    vr.applicable = true;
    vr.executions = 17;
    vr.truncated = 2;
    vr.violations = {v};
    CHECK(json(vr).get<VerifyReport>() == vr);

    FuzzReport fr;
    fr.generated = 100;
    fr.accepted = 70;
    fr.rejected = 30;
    fr.executions = 250;
    fr.truncated = 3;
    fr.violations = {v};
    CHECK(json(fr).get<FuzzReport>() == fr);

    RunSummary rs;
    rs.outcome = "null-dereference";
    rs.stop_path = "X.all";
    rs.choices_consumed = 2;
    rs.trace = {"stmt:1:post\nX: acc#1->null\n"};
    CHECK(json(rs).get<RunSummary>() == rs);

    SourceLocation loc{12, 34};
    SourceLocation back = json(loc).get<SourceLocation>();
    CHECK(back.line == 12);
    CHECK(back.column == 34);
}
