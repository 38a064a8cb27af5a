// Acceptance gate: one TEST_CASE per criterion, each printing a single
// "criterion N: PASS|FAIL" line so the suite's verdict is scannable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <muspark/json_io.hpp>
#include <muspark/oracle.hpp>
#include <muspark/parser.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace muspark;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    std::string title;
    bool ok = true;
    std::string first_failure;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            first_failure = what;
        }
    }

    double elapsed_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }

    ~Criterion() {
        std::printf("criterion %d: %s  (%s, %.2fs)%s%s\n", number,
                    ok ? "PASS" : "FAIL", title.c_str(), elapsed_s(),
                    ok ? "" : " -- ", first_failure.c_str());
        std::fflush(stdout);
    }
};

std::string corpus_dir() {
    const char* v = std::getenv("MUSPARK_CORPUS");
    REQUIRE(v != nullptr);
    return v;
}

Program load(const std::string& rel) {
    std::ifstream in(corpus_dir() + "/" + rel);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    ParseResult r = parse_source(buf.str());
    if (!r.program) FAIL(rel, ": ", r.error->message);
    return std::move(*r.program);
}

Path mkpath(std::string base, std::initializer_list<Selector> sels = {}) {
    Path p;
    p.base = std::move(base);
    p.selectors = sels;
    return p;
}

Perm at(const PermSnapshot& snaps, const std::string& key, const Path& p) {
    const auto it = snaps.find(key);
    REQUIRE_MESSAGE(it != snaps.end(), "missing snapshot ", key);
    PermEnv env = it->second;
    return lookup(env, p);
}

const Perm kAll[4] = {Perm::No, Perm::R, Perm::W, Perm::Rw};

// Strict (fully enumerated, depth-truncated) permission model used as the
// reference implementation for the laziness-transparency check.
struct StrictModel {
    const Scope* scope = nullptr;
    std::map<std::string, Perm> perms;
    std::map<std::string, int> derefs;
    std::map<std::string, bool> deep;

    void add_var(const std::string& name, const Type& t, Perm kappa, int depth) {
        enumerate(name, t, kappa, depth, 0);
    }
    void enumerate(const std::string& path, const Type& t, Perm kappa, int depth,
                   int nd) {
        perms[path] = kappa;
        derefs[path] = nd;
        deep[path] = is_deep(t, *scope);
        if (depth == 0) return;
        if (t.kind == Type::Kind::Access)
            enumerate(path + ".all", *t.inner, kappa, depth - 1, nd + 1);
        if (t.kind == Type::Kind::Record)
            for (const auto& [fn, ft] : scope->records.at(t.record_name).fields)
                enumerate(path + "." + fn, ft, kappa, depth - 1, nd);
    }
    static bool ext_of(const std::string& prefix, const std::string& p) {
        return p.size() > prefix.size() && p.compare(0, prefix.size(), prefix) == 0 &&
               p[prefix.size()] == '.';
    }
    void set_subtree(const std::string& p, Perm kappa) {
        perms.at(p) = kappa;
        for (auto& [path, perm] : perms)
            if (ext_of(p, path)) perm = kappa;
    }
    void set_extensions(const std::string& p, Perm kappa, ExtFilter f) {
        const int base = derefs.at(p);
        for (auto& [path, perm] : perms) {
            if (!ext_of(p, path)) continue;
            const bool more = derefs.at(path) > base;
            const bool dp = deep.at(path);
            const bool hit = f == ExtFilter::AllStrict ||
                             (f == ExtFilter::MoreDerefs && more) ||
                             (f == ExtFilter::DeepSameDerefs && dp && !more) ||
                             (f == ExtFilter::ShallowSameDerefs && !dp && !more) ||
                             (f == ExtFilter::DeepAnyDerefs && dp) ||
                             (f == ExtFilter::ShallowAnyDerefs && !dp);
            if (hit) perm = kappa;
        }
    }
};

Path str_to_path(const std::string& s) {
    Path p;
    std::size_t i = s.find('.');
    p.base = s.substr(0, i);
    while (i != std::string::npos) {
        std::size_t j = s.find('.', i + 1);
        const std::string part = s.substr(i + 1, j == std::string::npos ? j : j - i - 1);
        p.selectors.push_back(part == "all" ? Selector::deref()
                                            : Selector::make_field(part));
        i = j;
    }
    return p;
}

} // namespace

TEST_CASE("criterion 1: swap permission trace") {
    Criterion c{1, "swap: per-statement trace and exit check"};
    CheckReport rep = analyze(load("accept/swap.msk"));
    c.expect(rep.accepted, "swap.msk rejected");

    struct Want {
        const char* key;
        const char* var;
        Perm perm;
    };
    const Want wants[] = {
        {"stmt:1:post", "X", Perm::Rw}, {"stmt:1:post", "Y", Perm::W},
        {"stmt:1:post", "Temp", Perm::Rw},
        {"stmt:2:post", "X", Perm::W},  {"stmt:2:post", "Y", Perm::Rw},
        {"stmt:2:post", "Temp", Perm::Rw},
        {"stmt:3:post", "X", Perm::Rw}, {"stmt:3:post", "Y", Perm::Rw},
        {"stmt:3:post", "Temp", Perm::W},
        {"proc:1:exit", "X", Perm::Rw}, {"proc:1:exit", "Y", Perm::Rw},
    };
    for (const Want& w : wants) {
        const Perm got = at(rep.snapshots, w.key, mkpath(w.var));
        c.expect(got == w.perm, std::string(w.key) + " " + w.var + ": expected " +
                                    to_string(w.perm) + ", got " + to_string(got));
        CHECK(got == w.perm);
    }
    c.expect(c.elapsed_s() < 1.0, "took longer than 1s");
    CHECK(c.ok);
}

TEST_CASE("criterion 2: deep assignment derivation") {
    Criterion c{2, "deep assignment through a pointer"};
    CheckReport rep = analyze(load("accept/assign_deep.msk"));
    c.expect(rep.accepted, "assign_deep.msk rejected");

    const char* key = "proc:0:exit";
    struct Want {
        Path path;
        Perm perm;
    };
    const Want wants[] = {
        {mkpath("My_Struct"), Perm::W},
        {mkpath("My_Struct", {Selector::make_field("a")}), Perm::Rw},
        {mkpath("My_Struct", {Selector::make_field("b")}), Perm::W},
        {mkpath("My_Struct", {Selector::make_field("b"), Selector::deref()}), Perm::No},
        {mkpath("My_Struct", {Selector::make_field("c")}), Perm::Rw},
        {mkpath("My_Var"), Perm::Rw},
    };
    for (const Want& w : wants) {
        const Perm got = at(rep.snapshots, key, w.path);
        c.expect(got == w.perm, w.path.to_string() + ": expected " + to_string(w.perm) +
                                    ", got " + to_string(got));
        CHECK(got == w.perm);
    }
    CHECK(c.ok);
}

TEST_CASE("criterion 3: cycle and double-borrow rejections") {
    Criterion c{3, "cycle prevention and duplicate in-out borrow"};

    CheckReport cyc = analyze(load("reject/cycle.msk"));
    c.expect(!cyc.accepted, "cycle.msk accepted");
    if (!cyc.diagnostics.empty()) {
        const Diagnostic& d = cyc.diagnostics.front();
        c.expect(d.rule == "P-assignDeepName", "cycle rule: " + d.rule);
        c.expect(d.code == "assign-target-not-writable", "cycle code: " + d.code);
        c.expect(d.path == "Tree.left.all", "cycle path: " + d.path);
    } else {
        c.expect(false, "cycle.msk produced no diagnostics");
    }

    CheckReport db = analyze(load("reject/double_borrow.msk"));
    c.expect(!db.accepted, "double_borrow.msk accepted");
    if (!db.diagnostics.empty()) {
        const Diagnostic& d = db.diagnostics.front();
        c.expect(d.rule == "P-B-entryPointInOut", "double-borrow rule: " + d.rule);
        c.expect(d.code == "borrow-requires-rw", "double-borrow code: " + d.code);
        c.expect(d.path == "X", "double-borrow path: " + d.path);
    } else {
        c.expect(false, "double_borrow.msk produced no diagnostics");
    }
    CHECK_MESSAGE(c.ok, c.first_failure);
}

TEST_CASE("criterion 4: lattice and operator properties") {
    Criterion c{4, "lattice laws, release, fusion, laziness transparency"};

    // Exhaustive lattice laws.
    for (Perm a : kAll)
        for (Perm b : kAll) {
            c.expect(glb(a, b) == glb(b, a), "glb not commutative");
            c.expect(lub(a, b) == lub(b, a), "lub not commutative");
            c.expect(glb(a, lub(a, b)) == a, "absorption fails");
            c.expect(lub(a, glb(a, b)) == a, "absorption fails");
            c.expect(perm_leq(a, b) == (glb(a, b) == a), "order/glb disagree");
            for (Perm d : kAll) {
                c.expect(glb(a, glb(b, d)) == glb(glb(a, b), d), "glb not associative");
                c.expect(lub(a, lub(b, d)) == lub(lub(a, b), d), "lub not associative");
            }
        }

    auto sc = std::make_shared<Scope>();
    RecordInfo list;
    list.fields.emplace_back("v", Type::integer());
    list.fields.emplace_back("next", Type::access(Type::record("List")));
    sc->records["List"] = std::move(list);
    RecordInfo s;
    s.fields.emplace_back("a", Type::integer());
    s.fields.emplace_back("b", Type::access(Type::integer()));
    sc->records["S"] = std::move(s);
    const Type list_t = Type::access(Type::record("List"));
    const Type s_t = Type::record("S");

    std::uint64_t state = 0xdeadbeefcafef00dull;
    auto rnd = [&](unsigned bound) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<unsigned>((state >> 33) % bound);
    };

    const int kDepth = 7;
    for (int trial = 0; trial < 30; ++trial) {
        PermEnv env;
        env.scope = sc;
        env.vars.emplace("L", std::make_pair(list_t, pfresh(list_t, *sc, Perm::Rw)));
        env.vars.emplace("V", std::make_pair(s_t, pfresh(s_t, *sc, Perm::Rw)));
        StrictModel model;
        model.scope = sc.get();
        model.add_var("L", list_t, Perm::Rw, kDepth);
        model.add_var("V", s_t, Perm::Rw, kDepth);

        std::vector<std::string> paths;
        for (const auto& [p, _] : model.perms) paths.push_back(p);

        for (int op = 0; op < 25; ++op) {
            const std::string& target = paths[rnd(static_cast<unsigned>(paths.size()))];
            const Path tp = str_to_path(target);
            if (static_cast<int>(tp.selectors.size()) > kDepth - 3) continue;
            const Perm kappa = kAll[rnd(4)];
            switch (rnd(3)) {
            case 0:
                set_node(env, tp, kappa);
                model.perms.at(target) = kappa;
                break;
            case 1:
                set_subtree(env, tp, kappa);
                model.set_subtree(target, kappa);
                break;
            default: {
                const ExtFilter f = static_cast<ExtFilter>(rnd(6));
                set_extensions(env, tp, kappa, f);
                model.set_extensions(target, kappa, f);
                break;
            }
            }
        }

        // Laziness transparency: the lazy trees agree with the strict model
        // on every enumerated path.
        for (const auto& [pstr, want] : model.perms)
            c.expect(lookup(env, str_to_path(pstr)) == want,
                     "lazy/strict disagree at " + pstr + " (trial " +
                         std::to_string(trial) + ")");

        // Release: idempotent, normalizing, non-decreasing at probed paths.
        PermEnv before = env;
        perm_release(env);
        PermEnv once = env;
        perm_release(env);
        c.expect(dump(env) == dump(once), "perm_release not idempotent");
        c.expect(is_normalized(once), "perm_release did not normalize");
        for (const char* probe : {"L", "L.all", "V", "V.b"})
            c.expect(perm_leq(lookup(before, str_to_path(probe)),
                              lookup(once, str_to_path(probe))),
                     std::string("perm_release decreased ") + probe);

        // Fusion: commutative and idempotent.
        c.expect(dump(fusion(before, once)) == dump(fusion(once, before)),
                 "fusion not commutative");
        c.expect(dump(fusion(before, before)) == dump(before), "fusion not idempotent");
    }

    c.expect(c.elapsed_s() < 5.0, "took longer than 5s");
    CHECK_MESSAGE(c.ok, c.first_failure);
}

TEST_CASE("criterion 5: lemma suite over the corpus") {
    Criterion c{5, "lemmas hold at every checkpoint of accepted corpus programs"};
    int verified = 0;
    for (const char* sub : {"accept", "reject", "runtime"}) {
        const fs::path dir = fs::path(corpus_dir()) / sub;
        REQUIRE(fs::exists(dir));
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() != ".msk") continue;
            std::ifstream in(entry.path());
            std::ostringstream buf;
            buf << in.rdbuf();
            ParseResult r = parse_source(buf.str());
            c.expect(r.program.has_value(),
                     entry.path().filename().string() + " does not parse");
            if (!r.program) continue;
            if (!analyze(*r.program).accepted) continue;
            VerifyReport rep = lockstep_verify(*r.program);
            c.expect(rep.applicable,
                     entry.path().filename().string() + " not applicable");
            c.expect(rep.violations.empty(),
                     entry.path().filename().string() + ": " +
                         (rep.violations.empty()
                              ? std::string()
                              : to_string(rep.violations.front().kind) + " at " +
                                    rep.violations.front().point));
            ++verified;
        }
    }
    c.expect(verified >= 4, "fewer than 4 accepted corpus programs verified");
    c.expect(c.elapsed_s() < 30.0, "took longer than 30s");
    CHECK_MESSAGE(c.ok, c.first_failure);
}

TEST_CASE("criterion 6: soundness fuzzing and mutation detection") {
    Criterion c{6, "1000-program fuzz clean; seeded rule defects detected"};

    FuzzReport clean = fuzz_soundness(1000, 0);
    c.expect(clean.generated == 1000, "did not generate 1000 programs");
    c.expect(clean.accepted > 0, "no generated program accepted");
    c.expect(clean.violations.empty(),
             "violations under the correct rules: " +
                 (clean.violations.empty()
                      ? std::string()
                      : to_string(clean.violations.front().kind) + " at " +
                            clean.violations.front().point));

    const RuleMutation mutations[] = {
        RuleMutation::AccessMoveAsPlainMove,  RuleMutation::BorrowKeepsExtensions,
        RuleMutation::MoveKeepsMoreDerefs,    RuleMutation::ObserveKeepsPerm,
        RuleMutation::AssignAccessKeepsExtensions, RuleMutation::FusionUsesLub,
    };
    int detected = 0;
    for (RuleMutation m : mutations) {
        BorrowckOptions opts;
        opts.mutation = m;
        FuzzReport r = fuzz_soundness(1000, 0, 12, 10000, opts);
        if (r.violations.empty()) continue;
        // The reported reproduction is shrunk: it must still exhibit the
        // violation under the mutated checker.
        const Violation& v = r.violations.front();
        ParseResult rp = parse_source(v.program_source);
        if (!rp.program) continue;
        VerifyReport re = lockstep_verify(*rp.program, 12, 10000, opts);
        bool reproduced = false;
        for (const Violation& w : re.violations)
            if (w.kind == v.kind) reproduced = true;
        if (reproduced) ++detected;
    }
    c.expect(detected >= 5,
             "only " + std::to_string(detected) + " of 6 seeded defects detected");
    c.expect(c.elapsed_s() < 600.0, "took longer than 10 minutes");
    CHECK_MESSAGE(c.ok, c.first_failure);
}

TEST_CASE("criterion 7: semantics goldens") {
    Criterion c{7, "shared-cell golden dump and branching builder"};

    Program fig6 = load("accept/fig6_run.msk");
    CheckedProgram cp = check_program(fig6);
    c.expect(cp.ok(), "fig6_run.msk fails typecheck");
    RunResult r = run(fig6, cp, ChoiceSource{}, {}, true);
    c.expect(r.outcome.completed(), "fig6_run.msk did not complete");
    const std::string want =
        "My_Var: acc#1->rec#2{a: int#3=21, b: acc#4->int#5=42, c: int#6=14}\n"
        "My_Struct: rec#7{a: int#8=21, b: acc#9->ref#5, c: int#10=14}\n";
    if (r.trace.empty() || r.trace.back().dump != want)
        c.expect(false, "golden dump mismatch:\n" +
                            (r.trace.empty() ? std::string("<empty trace>")
                                             : r.trace.back().dump));

    Program tree = load("accept/tree_4_4_3.msk");
    VerifyReport vr = lockstep_verify(tree, 4);
    c.expect(vr.applicable, "tree_4_4_3.msk rejected");
    c.expect(vr.executions == 3, "expected 3 executions, got " +
                                     std::to_string(vr.executions));
    c.expect(vr.violations.empty(), "tree_4_4_3.msk verification violations");
    CHECK_MESSAGE(c.ok, c.first_failure);
}
