#include <gtest/gtest.h>

#include <fstream>

#include "dlvdb/backend.hpp"
#include "dlvdb/executor.hpp"
#include "dlvdb/parser.hpp"
#include "dlvdb/storage.hpp"
#include "support/engine.hpp"
#include "support/golden.hpp"

using namespace dlvdb;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

std::vector<std::vector<Value>> rows_of(Backend& db, const std::string& sql) {
    std::vector<std::vector<Value>> out;
    db.for_each_row(sql, [&](const std::vector<Value>& r) { out.push_back(r); });
    return out;
}

}  // namespace

TEST(Csv, FieldsAreTypedByQuoting) {
    engine::ScratchDir dir("csv");
    write_file(dir.file("e.csv"), "1,abc\n\"2\",-7\n\"x,y\",\"say \"\"hi\"\"\"\n");
    std::vector<std::vector<Value>> rows;
    read_csv(dir.file("e.csv"), 2, [&](const std::vector<Value>& r) { rows.push_back(r); });
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], (std::vector<Value>{1, std::string("abc")}));
    EXPECT_EQ(rows[1], (std::vector<Value>{std::string("2"), -7}));
    EXPECT_EQ(rows[2], (std::vector<Value>{std::string("x,y"), std::string("say \"hi\"")}));
    EXPECT_EQ(csv_field(Value{std::string("x,y")}), "\"x,y\"");
    EXPECT_EQ(csv_field(Value{std::string("12")}), "\"12\"");
    EXPECT_EQ(csv_field(Value{12}), "12");
}

TEST(Csv, MalformedInputIsADiagnostic) {
    engine::ScratchDir dir("csvbad");
    write_file(dir.file("a.csv"), "1,2,3\n");
    write_file(dir.file("b.csv"), "1,\n");
    auto ignore = [](const std::vector<Value>&) {};
    EXPECT_THROW(read_csv(dir.file("a.csv"), 2, ignore), DiagnosticError);
    EXPECT_THROW(read_csv(dir.file("b.csv"), 2, ignore), DiagnosticError);
    EXPECT_THROW(read_csv(dir.file("missing.csv"), 2, ignore), DiagnosticError);
}

TEST(BindTables, FlightDirectives) {
    engine::ScratchDir dir("bind");
    engine::write_toy_instance(dir.str());
    const Program p = parse_program(golden::kFlightProgram);
    const DirectiveSet d = parse_directives(golden::kFlightDirectives);
    SqliteBackend working(":memory:");
    const BindingMap b = bind_tables(p, d, working);
    EXPECT_EQ(b.at("flight").table, "flight_rel");
    EXPECT_EQ(b.at("flight").source, RelationBinding::Source::External);
    EXPECT_EQ(b.at("flight").attributes, (std::vector<std::string>{"Id", "FromX", "ToY", "Company"}));
    EXPECT_TRUE(b.at("flight").is_integer(0));
    EXPECT_EQ(b.at("codeshare").table, "codeshare_rel");
    EXPECT_EQ(b.at("destinations").table, "destinations_rel");
    EXPECT_EQ(b.at("destinations").source, RelationBinding::Source::Generated);
    EXPECT_TRUE(b.at("destinations").keep);
    // Deterministic.
    SqliteBackend again(":memory:");
    const BindingMap b2 = bind_tables(p, d, again);
    EXPECT_EQ(b2.at("destinations").attributes, b.at("destinations").attributes);
}

TEST(BindTables, ImplicitUseAndCreate) {
    SqliteBackend working(":memory:");
    working.execute("CREATE TABLE edge (a, b)");
    working.execute("INSERT INTO edge VALUES (1, 2), (2, 3)");
    const Program p = parse_program("tmp(X,Y) :- edge(X,Y).");
    BindingMap b = bind_tables(p, {}, working);
    EXPECT_EQ(b.at("edge").source, RelationBinding::Source::Working);
    EXPECT_EQ(b.at("edge").attributes, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(b.at("tmp").source, RelationBinding::Source::Generated);
    EXPECT_EQ(b.at("tmp").attributes, (std::vector<std::string>{"att_1", "att_2"}));

    const auto r = run(p, {}, working, {});
    EXPECT_EQ(r.sizes.back().rows, 2);
    EXPECT_EQ(working.count_rows("edge"), 2);  // USE tables are never dropped
    EXPECT_FALSE(working.relation_exists("tmp"));
}

TEST(BindTables, Errors) {
    SqliteBackend working(":memory:");
    working.execute("CREATE TABLE r (a)");
    const Program p = parse_program("q(X) :- r(X,Y).");
    EXPECT_THROW(bind_tables(p, parse_directives("USEDB w::. USE missing (a) MAPTO r."), working), DiagnosticError);
    EXPECT_THROW(bind_tables(p, parse_directives("USEDB w::. USE r (a) MAPTO r (integer)."), working), DiagnosticError);
    EXPECT_THROW(bind_tables(p, parse_directives("USEDB w::. CREATE t (a) MAPTO q (integer, integer)."), working),
                 DiagnosticError);
}

TEST(Stage, AsQueryMaterializesViewRows) {
    SqliteBackend working(":memory:");
    working.execute("CREATE TABLE r (a, b)");
    working.execute("INSERT INTO r VALUES (1, 2), (-1, 5), (3, 4), (3, 4)");
    const Program p = parse_program("s(X) :- t(X,Y).");
    const DirectiveSet d = parse_directives("USEDB w::. USE t (a, b) AS (SELECT a, b FROM r WHERE a > 0) MAPTO t.");
    const auto res = run(p, d, working, {});
    EXPECT_EQ(res.sizes.back().rows, 2);
}

TEST(Stage, ProgramFactsAndCsvAreUnioned) {
    engine::ScratchDir dir("stage");
    write_file(dir.file("e.csv"), "1,2\n2,3\n2,3\n");
    const Program p = parse_program("e(1,2). e(5,6). r(X,Y) :- e(X,Y).");
    SqliteBackend working(":memory:");
    BindingMap b = bind_tables(p, {}, working);
    const auto report = stage_inputs(p, b, working, {{"e", dir.file("e.csv")}}, dir.str());
    EXPECT_EQ(report.facts_loaded, 3);
    EXPECT_EQ(working.count_rows(b.at("e").table), 3);
    EXPECT_THROW(stage_inputs(p, b, working, {{"r", dir.file("nope.csv")}}, dir.str()), DiagnosticError);
    EXPECT_THROW(stage_inputs(p, b, working, {{"zz", dir.file("e.csv")}}, dir.str()), DiagnosticError);
}

TEST(Stage, ZeroFactsIsANoOp) {
    const Program p = parse_program("r(X) :- e(X).");
    SqliteBackend working(":memory:");
    BindingMap b = bind_tables(p, {}, working);
    EXPECT_EQ(stage_inputs(p, b, working, {}, "").facts_loaded, 0);
}

TEST(Stage, RangeTableHoldsZeroToMaxint) {
    SqliteBackend working(":memory:");
    stage_range(working, 9);
    EXPECT_EQ(working.count_rows(kRangeTable), 10);
    EXPECT_EQ(working.scalar(std::string("SELECT MAX(att_1) FROM ") + kRangeTable), 9);
}

TEST(Execute, ExitStatementOnToyFlights) {
    engine::ScratchDir dir("exec");
    engine::write_toy_instance(dir.str());
    const Program p = parse_program(golden::kFlightProgram);
    const DirectiveSet d = parse_directives(golden::kFlightDirectives);
    SqliteBackend working(":memory:");
    BindingMap b = bind_tables(p, d, working);
    stage_inputs(p, b, working, {}, dir.str());
    const CompiledProgram c = compile(p, d, true);
    const auto plans = translate_program(c.strata, b, {});
    const SqlStatement* first = nullptr;
    for (const auto& plan : plans)
        if (!plan.exit_statements.empty() && !first) first = &plan.exit_statements.front();
    ASSERT_NE(first, nullptr);
    EXPECT_EQ(working.execute(first->text), 5);
    EXPECT_EQ(working.execute(first->text), 0);
    working.execute("DELETE FROM flight_rel");
    working.execute("DELETE FROM destinations_rel");
    EXPECT_EQ(working.execute(first->text), 0);
}

TEST(Execute, BackendErrorsCarryTheStatement) {
    SqliteBackend working(":memory:");
    try {
        working.execute("INSERT INTO nowhere SELECT 1");
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_EQ(e.statement(), "INSERT INTO nowhere SELECT 1");
        EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos);
    }
}

TEST(Export, OutputOverwriteAndAppend) {
    engine::ScratchDir dir("export");
    const Program p = parse_program("e(1,2). e(2,3). r(X,Y) :- e(X,Y).");
    const std::string base = "USEDB work::. ";
    {
        SqliteBackend target(dir.file("out.db"));
        target.execute("CREATE TABLE routes (att_1, att_2)");
        target.execute("INSERT INTO routes VALUES (1, 2), (9, 9)");
    }
    RunOptions o;
    o.base_dir = dir.str();
    {
        SqliteBackend w(dir.file("work.db"));
        run(p, parse_directives(base + "OUTPUT APPEND r AS routes IN out::."), w, o);
    }
    SqliteBackend target(dir.file("out.db"));
    EXPECT_EQ(target.count_rows("routes"), 4);  // duplicates permitted under APPEND
    {
        SqliteBackend w(dir.file("work.db"));
        run(p, parse_directives(base + "OUTPUT r AS routes IN out::."), w, o);
    }
    EXPECT_EQ(target.count_rows("routes"), 2);
    {
        SqliteBackend w(dir.file("work.db"));
        run(p, parse_directives(base + "DBOUTPUT all::."), w, o);
    }
    SqliteBackend all(dir.file("all.db"));
    EXPECT_EQ(all.count_rows("e"), 2);
    EXPECT_EQ(all.count_rows("r"), 2);
}

TEST(Cleanup, DropsTransientAndUnkeptTables) {
    SqliteBackend working(":memory:");
    const Program p = parse_program("e(1,2). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), e(Z,Y). s(X) :- e(X,_).");
    const auto d = parse_directives("USEDB w::. CREATE r_tab (a, b) MAPTO r KEEP_AFTER_EXECUTION.");
    run(p, d, working, {});
    EXPECT_TRUE(working.relation_exists("r_tab"));
    EXPECT_FALSE(working.relation_exists("s"));
    EXPECT_FALSE(working.relation_exists("e"));
    EXPECT_FALSE(working.relation_exists("d_r_tab"));
    EXPECT_FALSE(working.relation_exists("d1_r_tab"));
}

TEST(Cleanup, FailedRunIsCleanedToo) {
    SqliteBackend working(":memory:");
    RunOptions o;
    o.max_iterations = 1;
    const Program p = parse_program("e(1,2). e(2,3). e(3,4). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), e(Z,Y).");
    EXPECT_THROW(run(p, {}, working, o), std::runtime_error);
    EXPECT_FALSE(working.relation_exists("r"));
    EXPECT_FALSE(working.relation_exists("d_r"));
    EXPECT_FALSE(working.relation_exists("d1_r"));
}

TEST(Profile, LikeHintSelectsDialect) {
    ASSERT_TRUE(profile_for_system("MYSQL").has_value());
    EXPECT_EQ(profile_for_system("MYSQL")->dialect, SqlDialect::NoExcept);
    EXPECT_EQ(profile_for_system("POSTGRES")->dialect, SqlDialect::Generic);
    EXPECT_FALSE(profile_for_system("NOSUCH").has_value());
    SqliteBackend db(":memory:");
    EXPECT_EQ(db.probe_profile().dialect, SqlDialect::Generic);
    const auto r = engine::run_text("e(1,2). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), e(Z,Y).", "USEDB w:: LIKE MYSQL.");
    EXPECT_EQ(r.dialect, SqlDialect::NoExcept);
}

TEST(Connections, NamesResolveToFiles) {
    EXPECT_EQ(resolve_connection(ConnectionSpec{"db1", "u", "p", false}, "/tmp/x"), "/tmp/x/db1.db");
    EXPECT_EQ(resolve_connection(ConnectionSpec{":memory:", "", "", true}, "/tmp/x"), ":memory:");
}

TEST(Stage, LargeEdgeCsvLoadsCompletely) {
    engine::ScratchDir dir("bigcsv");
    const std::int64_t n = 4194302;  // tree of depth 21
    {
        std::ofstream out(dir.file("edge.csv"));
        for (std::int64_t i = 2; i <= n + 1; ++i) out << i / 2 << ',' << i << '\n';
    }
    const Program p = parse_program("r(X) :- edge(1,X).");
    SqliteBackend working(dir.file("w.db"));
    BindingMap b = bind_tables(p, {}, working);
    const auto report = stage_inputs(p, b, working, {{"edge", dir.file("edge.csv")}}, dir.str());
    EXPECT_EQ(report.facts_loaded, n);
    EXPECT_EQ(working.count_rows(b.at("edge").table), n);
}
