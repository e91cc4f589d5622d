#include "dlvdb/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "dlvdb/analysis.hpp"
#include "dlvdb/backend.hpp"
#include "dlvdb/bench.hpp"
#include "dlvdb/executor.hpp"
#include "dlvdb/naive_eval.hpp"
#include "dlvdb/parser.hpp"
#include "dlvdb/sql_translator.hpp"
#include "dlvdb/storage.hpp"

namespace dlvdb {

namespace {

// Peak resident set of this process image in KiB (Linux), 0 when unknown.
long peak_rss_kib() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("VmHWM:", 0) == 0) return std::atol(line.c_str() + 6);
    return 0;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DiagnosticError(Diagnostic{Diagnostic::Severity::Error, {}, "cannot read '" + path + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunArgs {
    std::string program;
    std::string directives;
    std::vector<std::string> facts;
    std::optional<std::int64_t> maxint;
    std::string working;
    bool emit_sql = false;
    bool emit_plan = false;
    bool keep_temp = false;
    bool oracle_check = false;
    bool verify = false;
    bool tsv = false;
    bool answers = false;
    bool no_optimize = false;
    std::optional<double> timeout;
};

Program load_program(const std::string& path, std::optional<std::int64_t> maxint) {
    std::string text = read_file(path);
    // A later #maxint statement overrides an earlier one.
    if (maxint) text += "\n#maxint = " + std::to_string(*maxint) + ".\n";
    return parse_program(text, path);
}

std::vector<CsvSource> csv_sources(const std::vector<std::string>& specs) {
    std::vector<CsvSource> out;
    for (const auto& s : specs) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
            throw DiagnosticError(
                Diagnostic{Diagnostic::Severity::Error, {}, "--facts expects pred=file, got '" + s + "'"});
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

/// Oracle database from program facts and CSV files.
oracle::Database oracle_input(const Program& program, const std::vector<CsvSource>& csv) {
    oracle::Database edb;
    for (const auto& src : csv) {
        std::size_t arity = 0;
        for (const auto& r : program.rules) {
            auto visit = [&](const Atom& a) {
                if (a.predicate == src.predicate) arity = a.arity();
            };
            visit(r.head);
            for (const auto& l : r.body) {
                if (l.is_atom()) visit(l.atom());
                if (l.is_aggregate())
                    for (const auto& a : l.aggregate().set.conj) visit(a);
            }
        }
        for (const auto& f : program.facts)
            if (f.predicate == src.predicate) arity = f.arity();
        read_csv(src.path, arity, [&](const std::vector<Value>& row) { edb[src.predicate].insert(row); });
    }
    return edb;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    Program program = load_program(a.program, a.maxint);
    DirectiveSet directives;
    std::string base_dir = std::filesystem::path(a.program).parent_path().string();
    if (!a.directives.empty()) {
        directives = parse_directives(read_file(a.directives), a.directives);
        base_dir = std::filesystem::path(a.directives).parent_path().string();
    }
    if (base_dir.empty()) base_dir = ".";

    std::string working_path = a.working;
    if (working_path.empty() && !a.directives.empty()) working_path = resolve_connection(directives.working_db, base_dir);
    if (working_path.empty())
        if (const char* env = std::getenv("DLVDB_WORKING_DB")) working_path = env;
    if (working_path.empty()) working_path = ":memory:";

    if (a.emit_plan || a.emit_sql) {
        CompiledProgram compiled = compile(program, directives, !a.no_optimize);
        if (a.emit_plan) out << dump_plan(compiled.strata);
        if (a.emit_sql) {
            SqliteBackend working(working_path);
            BindingMap bindings = bind_tables(compiled.program, directives, working);
            SqlDialect dialect = working.probe_profile().dialect;
            if (directives.system_like)
                if (auto p = profile_for_system(*directives.system_like)) dialect = p->dialect;
            out << dump_sql(translate_program(compiled.strata, bindings,
                                              TranslatorOptions{dialect, compiled.program.maxint}));
        }
        return 0;
    }

    RunOptions options;
    options.verify = a.verify;
    options.timeout_seconds = a.timeout;
    options.keep_tables = a.keep_temp;
    options.optimize = !a.no_optimize;
    options.csv = csv_sources(a.facts);
    options.base_dir = base_dir;
    options.collect_answers = a.answers || a.oracle_check;
    options.collect_all = a.oracle_check;

    SqliteBackend working(working_path);
    EvaluationResult result = run(program, directives, working, options);
    out << (a.tsv ? result.render_tsv() : result.render_text());
    if (!a.tsv)
        if (const long kib = peak_rss_kib()) out << "peak memory " << kib << " KiB\n";
    if (a.answers)
        for (const auto& t : result.answers) {
            out << (a.tsv ? "" : "  (");
            for (std::size_t i = 0; i < t.size(); ++i) out << (i ? (a.tsv ? "\t" : ", ") : "") << to_string(t[i]);
            out << (a.tsv ? "\n" : ")\n");
        }
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    int status = result.violations.empty() ? 0 : 1;
    for (const auto& v : result.violations) err << "invariant violation: " << v << '\n';

    if (a.oracle_check) {
        if (!directives.tables.empty())
            err << "warning: the oracle sees program facts and CSV files only, not mapped tables\n";
        const oracle::Database expected = oracle::evaluate(program, oracle_input(program, options.csv));
        std::size_t mismatches = 0;
        for (const auto& [pred, rows] : result.extensions) {
            if (result.goal && pred == result.goal->predicate) continue;
            auto it = expected.find(pred);
            const oracle::Relation want = it == expected.end() ? oracle::Relation{} : it->second;
            if (want != rows) {
                ++mismatches;
                err << "oracle mismatch for " << pred << ": engine " << rows.size() << " rows, oracle " << want.size()
                    << '\n';
            }
        }
        if (result.goal) {
            const oracle::Relation want = oracle::select(expected, *result.goal);
            const oracle::Relation got(result.answers.begin(), result.answers.end());
            if (want != got) {
                ++mismatches;
                err << "oracle mismatch for goal " << to_string(*result.goal) << ": engine " << got.size()
                    << " rows, oracle " << want.size() << '\n';
            }
        }
        out << "oracle: " << (mismatches ? "mismatch" : "ok") << '\n';
        if (mismatches) status = 1;
    }
    return status;
}

int cmd_check(const std::string& path, const std::string& directives_path, std::ostream& out) {
    Program program = load_program(path, std::nullopt);
    if (!directives_path.empty()) parse_directives(read_file(directives_path), directives_path);
    StratumPlan plan = stratify(standardize_aggregates(program));
    out << "ok: " << program.rules.size() << " rules, " << program.facts.size() << " facts, "
        << plan.components.size() << " components\n"
        << dump_plan(plan);
    return 0;
}

struct BenchArgs {
    std::string problem = "reachability";
    std::string family = "tree";
    std::string regime = "Q0";
    std::vector<double> sizes;
    double delta = 0.2;
    double timeout = 300;
    std::uint64_t seed = 1;
    int repetitions = 1;
    bool oracle_check = false;
    bool no_optimize = false;
    bool verify = false;
    bool tsv = false;
    bool full_scale = false;
    std::string export_dir;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    auto problem = bench::parse_problem(a.problem);
    auto family = bench::parse_family(a.family);
    auto regime = bench::parse_regime(a.regime);
    if (!problem || !family || !regime) {
        err << "error: unknown " << (!problem ? "problem '" + a.problem : !family ? "family '" + a.family
                                                                                 : "regime '" + a.regime)
            << "'\n";
        return 2;
    }
    bench::SuiteSpec spec;
    spec.problem = *problem;
    spec.family = *family;
    spec.regime = *regime;
    spec.delta = a.delta;
    spec.timeout_seconds = a.timeout;
    spec.seed = a.seed;
    spec.repetitions = a.repetitions;
    spec.oracle_check = a.oracle_check;
    spec.optimize = !a.no_optimize;
    spec.verify = a.verify;
    spec.sizes = a.sizes;
    if (spec.sizes.empty()) {
        switch (*family) {
            case bench::Family::Tree: spec.sizes = a.full_scale ? std::vector<double>{14, 17, 19, 21}
                                                                 : std::vector<double>{7, 10, 14}; break;
            case bench::Family::AGraph:
            case bench::Family::CGraph: spec.sizes = a.full_scale ? std::vector<double>{500, 1000, 2000}
                                                                   : std::vector<double>{50, 200, 500}; break;
            case bench::Family::Cylinder: spec.sizes = a.full_scale ? std::vector<double>{64, 128, 256}
                                                                     : std::vector<double>{8, 16, 32}; break;
        }
    }
    if (!a.export_dir.empty()) {
        std::filesystem::create_directories(a.export_dir);
        for (double s : spec.sizes) {
            auto g = bench::make_instance(*family, s, a.delta, a.seed);
            std::string name = std::string(bench::to_string(*family)) + "-" + std::to_string(static_cast<long>(s));
            bench::write_csv(g, (std::filesystem::path(a.export_dir) / (name + ".csv")).string());
        }
    }
    const auto rows = bench::run_suite(spec);
    out << (a.tsv ? bench::render_tsv(rows) : bench::render_table(rows));
    int status = 0;
    for (const auto& r : rows) {
        if (r.oracle_status() == "mismatch") status = 1;
        for (const auto& v : r.violations) {
            err << "invariant violation (" << r.size << "): " << v << '\n';
            status = 1;
        }
    }
    return status;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stratified Datalog with aggregates, evaluated as SQL on SQLite", "dlvdb"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Evaluate a program and report predicate sizes");
    run_cmd->add_option("program", ra.program, "Program file")->required();
    run_cmd->add_option("--directives", ra.directives, "Auxiliary directive file");
    run_cmd->add_option("--facts", ra.facts, "CSV facts as pred=file (repeatable)");
    run_cmd->add_option("--maxint", ra.maxint, "Override #maxint");
    run_cmd->add_option("--working", ra.working, "Working database file (default: USEDB, $DLVDB_WORKING_DB, memory)");
    run_cmd->add_flag("--emit-sql", ra.emit_sql, "Print the SQL plan without executing it");
    run_cmd->add_flag("--emit-plan", ra.emit_plan, "Print the component order without executing");
    run_cmd->add_flag("--keep-temp", ra.keep_temp, "Keep generated tables in the working database");
    run_cmd->add_flag("--oracle-check", ra.oracle_check, "Compare against the in-memory evaluator");
    run_cmd->add_flag("--verify", ra.verify, "Check fixpoint invariants on every pass");
    run_cmd->add_flag("--tsv", ra.tsv, "Tab-separated report");
    run_cmd->add_flag("--answers", ra.answers, "Print the goal tuples");
    run_cmd->add_flag("--no-optimize", ra.no_optimize, "Disable the seed rewrite for bound goals");
    run_cmd->add_option("--timeout", ra.timeout, "Timeout in seconds");

    std::string check_program, check_directives;
    auto* check_cmd = app.add_subcommand("check", "Report safety and stratification verdicts");
    check_cmd->add_option("program", check_program, "Program file")->required();
    check_cmd->add_option("--directives", check_directives, "Auxiliary directive file to validate");

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark ladder");
    bench_cmd->add_option("--problem", ba.problem, "reachability | reachability-linear | samegen");
    bench_cmd->add_option("--family", ba.family, "tree | a-graph | c-graph | cylinder");
    bench_cmd->add_option("--regime", ba.regime, "Q0 | Q1 | Q2");
    bench_cmd->add_option("--sizes", ba.sizes, "Depths, node counts or widths")->delimiter(',');
    bench_cmd->add_option("--delta", ba.delta, "Graph density");
    bench_cmd->add_option("--timeout", ba.timeout, "Per-instance timeout in seconds");
    bench_cmd->add_option("--seed", ba.seed, "Generator seed");
    bench_cmd->add_option("--repetitions", ba.repetitions, "Runs per instance (best time is reported)");
    bench_cmd->add_flag("--oracle-check", ba.oracle_check, "Check every row against a direct graph computation");
    bench_cmd->add_flag("--no-optimize", ba.no_optimize, "Disable the seed rewrite");
    bench_cmd->add_flag("--verify", ba.verify, "Check fixpoint invariants on every pass");
    bench_cmd->add_flag("--tsv", ba.tsv, "Tab-separated report");
    bench_cmd->add_flag("--full-scale", ba.full_scale, "Use the large size ladder");
    bench_cmd->add_option("--export-dir", ba.export_dir, "Write each instance as a CSV file here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*run_cmd) return cmd_run(ra, out, err);
        if (*check_cmd) return cmd_check(check_program, check_directives, out);
        return cmd_bench(ba, out, err);
    } catch (const DiagnosticError& e) {
        for (const auto& d : e.diagnostics()) err << to_string(d) << '\n';
    } catch (const TimeoutError& e) {
        err << "timeout: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 1;
}

}  // namespace dlvdb
