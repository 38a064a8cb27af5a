#include "muspark/json_io.hpp"
#include "muspark/parser.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace muspark;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitError = 2;

struct Options {
    bool json = false;
    bool dump_perms = false;
    bool no_color = false;
};

std::string paint(const Options& opts, const std::string& text, const char* color) {
    if (opts.no_color) return text;
    return std::string("\033[") + color + "m" + text + "\033[0m";
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_diagnostics(const Options& opts, const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        std::cerr << paint(opts, "error", "31") << ": " << format_diagnostic(d) << "\n";
}

int emit_check_result(const Options& opts, const std::vector<Diagnostic>& diags,
                      const std::string& extra_key = {}, const nlohmann::json& extra = {}) {
    if (opts.json) {
        nlohmann::json j{{"ok", diags.empty()}, {"diagnostics", diags}};
        if (!extra_key.empty()) j[extra_key] = extra;
        std::cout << j.dump(2) << "\n";
    } else {
        print_diagnostics(opts, diags);
        if (diags.empty()) std::cout << "ok\n";
    }
    return diags.empty() ? kExitOk : kExitRejected;
}

std::optional<Program> load_program(const Options& opts, const std::string& file,
                                    int& exit_code) {
    const auto source = read_file(file);
    if (!source) {
        std::cerr << paint(opts, "error", "31") << ": cannot read " << file << "\n";
        exit_code = kExitError;
        return std::nullopt;
    }
    ParseResult parsed = parse_source(*source);
    if (!parsed.program) {
        std::vector<Diagnostic> diags;
        if (parsed.error) diags.push_back(*parsed.error);
        exit_code = emit_check_result(opts, diags);
        return std::nullopt;
    }
    return std::move(parsed.program);
}

std::vector<bool> parse_choices(const std::string& s) {
    std::vector<bool> out;
    for (const char c : s)
        if (c == '0' || c == '1') out.push_back(c == '1');
    return out;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("MUSPARK_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"muspark: anti-aliasing checker, interpreter and soundness oracle"};
    app.require_subcommand(1);

    Options opts;
    app.add_flag("--json", opts.json, "machine-readable output");
    app.add_flag("--no-color", opts.no_color, "disable ANSI colors");

    std::string file;
    std::string choices_str;
    int steps = 10000;
    int depth = 12;
    std::uint64_t count = 100;
    std::uint64_t seed = default_seed();

    auto* cmd_parse = app.add_subcommand("parse", "parse and echo the program");
    cmd_parse->add_option("file", file)->required();

    auto* cmd_typecheck = app.add_subcommand("typecheck", "legality and typing checks");
    cmd_typecheck->add_option("file", file)->required();

    auto* cmd_check = app.add_subcommand("check", "full anti-aliasing analysis");
    cmd_check->add_option("file", file)->required();
    cmd_check->add_flag("--dump-perms", opts.dump_perms,
                        "print the permission environment at every point");

    auto* cmd_run = app.add_subcommand("run", "execute with an explicit choice vector");
    cmd_run->add_option("file", file)->required();
    cmd_run->add_option("--choices", choices_str, "branch decisions, e.g. 1011");
    cmd_run->add_option("--steps", steps, "statement budget");

    auto* cmd_verify = app.add_subcommand("verify", "dynamic validation of the analysis");
    cmd_verify->add_option("file", file)->required();
    cmd_verify->add_option("--depth", depth, "maximum choice vector length");
    cmd_verify->add_option("--steps", steps, "statement budget per execution");

    auto* cmd_fuzz = app.add_subcommand("fuzz", "generate programs and verify each");
    cmd_fuzz->add_option("--count", count, "number of programs");
    cmd_fuzz->add_option("--seed", seed, "base seed (or MUSPARK_SEED)");
    cmd_fuzz->add_option("--depth", depth, "maximum choice vector length");
    cmd_fuzz->add_option("--steps", steps, "statement budget per execution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    int exit_code = kExitError;

    if (cmd_parse->parsed()) {
        const auto prog = load_program(opts, file, exit_code);
        if (!prog) return exit_code;
        if (opts.json)
            std::cout << nlohmann::json{{"ok", true}, {"pretty", pretty_print(*prog)}}.dump(2)
                      << "\n";
        else
            std::cout << pretty_print(*prog);
        return kExitOk;
    }

    if (cmd_typecheck->parsed()) {
        const auto prog = load_program(opts, file, exit_code);
        if (!prog) return exit_code;
        std::vector<Diagnostic> diags = check_legality(*prog);
        const CheckedProgram checked = check_program(*prog);
        diags.insert(diags.end(), checked.diagnostics.begin(), checked.diagnostics.end());
        return emit_check_result(opts, diags);
    }

    if (cmd_check->parsed()) {
        const auto prog = load_program(opts, file, exit_code);
        if (!prog) return exit_code;
        const CheckReport report = analyze(*prog);
        if (opts.dump_perms) {
            nlohmann::json perms = nlohmann::json::object();
            for (const auto& [point, env] : report.snapshots) {
                if (opts.json)
                    perms[point] = dump(env);
                else
                    std::cout << "-- " << point << "\n" << dump(env);
            }
            if (opts.json) return emit_check_result(opts, report.diagnostics, "perms", perms);
        }
        return emit_check_result(opts, report.diagnostics);
    }

    if (cmd_run->parsed()) {
        const auto prog = load_program(opts, file, exit_code);
        if (!prog) return exit_code;
        const CheckedProgram checked = check_program(*prog);
        std::vector<Diagnostic> diags = check_legality(*prog);
        diags.insert(diags.end(), checked.diagnostics.begin(), checked.diagnostics.end());
        if (!diags.empty()) return emit_check_result(opts, diags);

        ChoiceSource cs;
        cs.choices = parse_choices(choices_str);
        cs.step_budget = steps;
        const RunResult result = run(*prog, checked, std::move(cs), {}, true);

        RunSummary summary;
        summary.outcome = outcome_name(result.outcome);
        if (result.outcome.stop) summary.stop_path = result.outcome.stop->path;
        summary.choices_consumed = result.choices_consumed;
        for (const auto& entry : result.trace)
            summary.trace.push_back(entry.point + "\n" + entry.dump);
        if (opts.json) {
            std::cout << nlohmann::json(summary).dump(2) << "\n";
        } else {
            if (!result.trace.empty())
                std::cout << "-- final frame\n" << result.trace.back().dump;
            std::cout << "outcome: " << summary.outcome;
            if (!summary.stop_path.empty()) std::cout << " at " << summary.stop_path;
            std::cout << "\n";
        }
        return result.outcome.completed() ? kExitOk : kExitRejected;
    }

    if (cmd_verify->parsed()) {
        const auto prog = load_program(opts, file, exit_code);
        if (!prog) return exit_code;
        const VerifyReport report = lockstep_verify(*prog, depth, steps);
        if (opts.json) {
            std::cout << nlohmann::json(report).dump(2) << "\n";
        } else if (!report.applicable) {
            std::cout << "not applicable: the program is rejected by the checker\n";
        } else {
            std::cout << report.executions << " executions, " << report.truncated
                      << " truncated, " << report.violations.size() << " violations\n";
            for (const auto& v : report.violations)
                std::cout << paint(opts, to_string(v.kind), "31") << " at " << v.point << ": "
                          << v.detail << "\n";
        }
        return report.applicable && report.violations.empty() ? kExitOk : kExitRejected;
    }

    if (cmd_fuzz->parsed()) {
        const FuzzReport report = fuzz_soundness(count, seed, depth, steps);
        if (opts.json) {
            std::cout << nlohmann::json(report).dump(2) << "\n";
        } else {
            std::cout << report.generated << " generated, " << report.accepted
                      << " accepted, " << report.rejected << " rejected, "
                      << report.executions << " executions, " << report.violations.size()
                      << " violations\n";
            for (const auto& v : report.violations) {
                std::cout << paint(opts, to_string(v.kind), "31") << " at " << v.point << ": "
                          << v.detail << "\nreproduction:\n" << v.program_source << "\n";
            }
        }
        return report.violations.empty() ? kExitOk : kExitRejected;
    }

    return kExitError;
}
