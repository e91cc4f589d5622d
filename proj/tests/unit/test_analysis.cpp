#include <gtest/gtest.h>

#include <algorithm>

#include "dlvdb/analysis.hpp"
#include "dlvdb/naive_eval.hpp"
#include "dlvdb/parser.hpp"
#include "support/random_program.hpp"

using namespace dlvdb;

namespace {

const char* kStratExample =
    "a(1,1). a(2,1). b(1). p(1).\n"
    "q(X) :- p(X), #count{Y : a(Y,X), b(X)} <= 2.\n"
    "p(X) :- q(X), b(X).\n";

std::vector<std::string> sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Checks both level-mapping definitions directly against the plan's levels.
std::string level_violation(const Program& program, const StratumPlan& plan) {
    const auto level = plan.levels();
    for (const auto& r : program.rules) {
        const int h = level.at(r.head.predicate);
        for (const auto& l : r.body) {
            if (l.is_atom()) {
                const int b = level.at(l.atom().predicate);
                if (l.negative ? b >= h : b > h) return to_string(r);
            } else if (l.is_aggregate()) {
                for (const auto& a : l.aggregate().set.conj)
                    if (level.at(a.predicate) >= h) return to_string(r);
            }
        }
    }
    return {};
}

}  // namespace

TEST(DependencyGraph, StratificationExampleEdges) {
    const auto g = build_dependency_graph(parse_program(kStratExample));
    EXPECT_TRUE(g.has_edge("a", "q", EdgeLabel::Aggregate));
    EXPECT_TRUE(g.has_edge("b", "q", EdgeLabel::Aggregate));
    EXPECT_TRUE(g.has_edge("p", "q", EdgeLabel::Positive));
    EXPECT_TRUE(g.has_edge("q", "p", EdgeLabel::Positive));
    EXPECT_TRUE(g.has_edge("b", "p", EdgeLabel::Positive));
    EXPECT_EQ(g.edges.size(), 5u);
}

TEST(DependencyGraph, SingleFactAndFlightProgram) {
    const auto one = build_dependency_graph(parse_program("e(1,2)."));
    EXPECT_EQ(one.nodes, std::vector<std::string>{"e"});
    EXPECT_TRUE(one.edges.empty());

    const auto g = build_dependency_graph(parse_program(
        "destinations(F,T,C) :- flight(I,F,T,C).\n"
        "destinations(F,T,C) :- flight(I,F,T,C2), codeshare(C2,C,I).\n"
        "destinations(F,T,C) :- destinations(F,T2,C), destinations(T2,T,C)."));
    EXPECT_TRUE(g.has_edge("flight", "destinations", EdgeLabel::Positive));
    EXPECT_TRUE(g.has_edge("codeshare", "destinations", EdgeLabel::Positive));
    EXPECT_TRUE(g.has_edge("destinations", "destinations", EdgeLabel::Positive));
}

TEST(Stratify, ExampleAcceptedWithBaseBeforeRecursivePair) {
    const Program p = parse_program(kStratExample);
    const StratumPlan plan = stratify(p);
    const auto lv = plan.levels();
    EXPECT_LT(lv.at("a"), lv.at("p"));
    EXPECT_LT(lv.at("b"), lv.at("p"));
    EXPECT_EQ(lv.at("p"), lv.at("q"));
    const auto& pq = plan.components.at(plan.component_of("p"));
    EXPECT_EQ(sorted(pq.predicates), (std::vector<std::string>{"p", "q"}));
    EXPECT_TRUE(pq.is_recursive());
    EXPECT_EQ(level_violation(p, plan), "");
}

TEST(Stratify, ExtensionThroughAggregateIsRejectedWithWitness) {
    try {
        stratify(parse_program(std::string(kStratExample) + "b(X) :- p(X)."));
        FAIL() << "accepted";
    } catch (const DiagnosticError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("aggregate"), std::string::npos) << msg;
        EXPECT_NE(msg.find("b -aggregate-> q"), std::string::npos) << msg;
    }
}

TEST(Stratify, NegativeSelfEdgeIsRejected) {
    try {
        stratify(parse_program("q(1). q(2). p(X) :- q(X), not p(X)."));
        FAIL() << "accepted";
    } catch (const DiagnosticError& e) {
        EXPECT_NE(std::string(e.what()).find("p -negative-> p"), std::string::npos) << e.what();
    }
}

TEST(Stratify, TopologicalTiesFollowFirstAppearance) {
    const StratumPlan plan = stratify(parse_program("c(1). b(1). a(1). x(X) :- a(X), b(X), c(X)."));
    ASSERT_EQ(plan.components.size(), 4u);
    EXPECT_EQ(plan.components[0].predicates, std::vector<std::string>{"c"});
    EXPECT_EQ(plan.components[1].predicates, std::vector<std::string>{"b"});
    EXPECT_EQ(plan.components[3].predicates, std::vector<std::string>{"x"});
}

TEST(Stratify, ExitAndRecursiveRulesAreSeparated) {
    const StratumPlan plan = stratify(parse_program("e(1,2). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), e(Z,Y)."));
    const auto& c = plan.components.at(plan.component_of("r"));
    EXPECT_EQ(c.exit_rules.size(), 1u);
    EXPECT_EQ(c.recursive_rules.size(), 1u);
    EXPECT_EQ(recursive_occurrences(c.recursive_rules[0], c), 1u);
    EXPECT_EQ(dump_plan(plan), "1: {e} exit=0 recursive=0\n2: {r} exit=1 recursive=1\n");
}

TEST(Stratify, RandomStratifiedProgramsSatisfyLevelMappings) {
    int checked = 0;
    for (std::uint64_t seed = 100; seed < 250; ++seed) {
        Program p;
        try {
            p = parse_program(randprog::generate(seed));
        } catch (const DiagnosticError&) {
            continue;
        }
        ++checked;
        const Program s = standardize_aggregates(p);
        EXPECT_EQ(level_violation(s, stratify(s)), "") << to_string(p);
    }
    EXPECT_GE(checked, 80);
}

TEST(Stratify, InjectedCyclesAreRejected) {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto inj = randprog::inject_cycle(seed);
        Program p;
        try {
            p = parse_program(inj.text);
        } catch (const DiagnosticError&) {
            continue;
        }
        ++checked;
        try {
            stratify(standardize_aggregates(p));
            ADD_FAILURE() << inj.text;
        } catch (const DiagnosticError& e) {
            EXPECT_NE(std::string(e.what()).find("in cycle"), std::string::npos) << e.what();
        }
    }
    EXPECT_GE(checked, 20);
}

TEST(Standardize, CostlyDepGetsAuxiliaryPredicate) {
    const Program p = parse_program(
        "costlyDep(Dep) :- department(Dep,_), #sum{Salary,Ename : employee(Ename,Salary,Dep,_)} > 100000.");
    const Program s = standardize_aggregates(p);
    ASSERT_EQ(s.rules.size(), 2u);
    EXPECT_EQ(s.rules[0].head.predicate, "aux__costlyDep__1");
    EXPECT_EQ(to_string(s.rules[0].head), "aux__costlyDep__1(Salary, Ename, Dep)");
    const auto& agg = s.rules[1].body[1].aggregate();
    ASSERT_EQ(agg.set.conj.size(), 1u);
    EXPECT_EQ(agg.set.conj[0].predicate, "aux__costlyDep__1");
    EXPECT_TRUE(s.rules[1].body[1].is_aggregate());  // payload kind preserved
}

TEST(Standardize, SingleAtomOverNeededVariablesIsUnchanged) {
    const Program p = parse_program("a(1,2). b(2). q(X) :- b(X), #count{Y : a(Y,X)} <= 2.");
    EXPECT_EQ(standardize_aggregates(p), p);
    const Program once = standardize_aggregates(parse_program(kStratExample));
    EXPECT_EQ(standardize_aggregates(once), once);
}

TEST(Standardize, StratificationExampleBindsOnlyLowerPredicates) {
    const Program s = standardize_aggregates(parse_program(kStratExample));
    EXPECT_EQ(to_string(s.rules[0]), "aux__q__1(Y, X) :- a(Y, X), b(X).");
    EXPECT_EQ(to_string(s.rules[1]), "q(X) :- p(X), #count{Y : aux__q__1(Y, X)} <= 2.");
}

TEST(Standardize, PreservesAnswersOnRandomPrograms) {
    int checked = 0;
    for (std::uint64_t seed = 300; seed < 400; ++seed) {
        Program p;
        try {
            p = parse_program(randprog::generate(seed));
        } catch (const DiagnosticError&) {
            continue;
        }
        ++checked;
        const auto before = oracle::evaluate(p);
        const auto after = oracle::evaluate(standardize_aggregates(p));
        for (const auto& [pred, rows] : before) EXPECT_EQ(after.at(pred), rows) << pred << "\n" << to_string(p);
    }
    EXPECT_GE(checked, 50);
}

TEST(Optimize, BoundLinearGoalGetsSeedRewrite) {
    const Program p = parse_program("e(1,2). e(2,3). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), e(Z,Y).");
    const Atom goal = *parse_program("r(1,Y)?").query;
    ASSERT_TRUE(seed_rewrite_applies(p, goal));
    const Program o = optimize(p, goal);
    EXPECT_EQ(to_string(o),
              "e(1, 2).\ne(2, 3).\nreached__r(Y) :- e(1, Y).\nreached__r(Y) :- reached__r(Z), e(Z, Y).\n"
              "r(1, Y) :- reached__r(Y).\n");
    const Atom both = *parse_program("r(1,3)?").query;
    EXPECT_EQ(to_string(optimize(p, both).rules.back()), "r(1, 3) :- reached__r(3).");
}

TEST(Optimize, UnboundOrNonLinearGoalIsUnchanged) {
    const Program p = parse_program("e(1,2). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), e(Z,Y).");
    EXPECT_EQ(optimize(p, std::nullopt), p);
    EXPECT_EQ(optimize(p, *parse_program("r(X,Y)?").query), p);
    const Program nl = parse_program("e(1,2). r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), r(Z,Y).");
    EXPECT_EQ(optimize(nl, *parse_program("r(1,Y)?").query), nl);
}

TEST(Optimize, PreservesGoalAnswers) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 rng(seed);
        std::string text;
        for (int i = 0; i < 25; ++i)
            text += "e(" + std::to_string(rng() % 8) + "," + std::to_string(rng() % 8) + ").\n";
        text += "r(X,Y) :- e(X,Y).\n";
        text += seed % 2 ? "r(X,Y) :- r(X,Z), e(Z,Y).\n" : "r(X,Y) :- e(X,Z), r(Z,Y).\n";
        const Program p = parse_program(text);
        for (const char* g : {"r(0,Y)?", "r(3,Y)?", "r(2,5)?", "r(X,4)?"}) {
            const Atom goal = *parse_program(g).query;
            EXPECT_EQ(oracle::select(oracle::evaluate(optimize(p, goal)), goal),
                      oracle::select(oracle::evaluate(p), goal))
                << g << "\n" << text;
        }
    }
}
