#pragma once

// Worked translation examples: program, directives, and the expected SQL
// transcribed into plain text (t.att_i notation, delta tables as d_ / d1_).

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dlvdb/analysis.hpp"
#include "dlvdb/backend.hpp"
#include "dlvdb/executor.hpp"
#include "dlvdb/parser.hpp"
#include "dlvdb/sql_translator.hpp"
#include "dlvdb/storage.hpp"
#include "support/sql_normalize.hpp"

namespace golden {

struct Case {
    std::string name;
    std::string program;
    std::string directives;  // empty: none
    std::vector<std::string> expected;
    std::map<std::string, std::string> renames;
};

inline void PrintTo(const Case& c, std::ostream* os) { *os << c.name; }

inline const char* kFlightProgram =
    "destinations(FromX, ToY, Comp) :- flight(Id, FromX, ToY, Comp).\n"
    "destinations(FromX, ToY, Comp) :- flight(Id, FromX, ToY, C2), codeshare(C2, Comp, Id).\n"
    "destinations(FromX, ToY, Comp) :- destinations(FromX, T2, Comp), destinations(T2, ToY, Comp).\n";

inline const char* kFlightDirectives =
    "USEDB dlvdb:myname:mypasswd.\n"
    "USE flight_rel (Id, FromX, ToY, Company) FROM dbAirports:airportUser:airportPasswd\n"
    "MAPTO flight (integer, varchar(255), varchar(255), varchar(255)).\n"
    "USE codeshare_rel (Company1, Company2, FlightId) FROM dbCommercial:commUser:commPasswd\n"
    "MAPTO codeshare (varchar(255), varchar(255), integer).\n"
    "CREATE destinations_rel (FromX, ToY, Company)\n"
    "MAPTO destinations (varchar(255), varchar(255), varchar(255)) KEEP_AFTER_EXECUTION.\n"
    "OUTPUT destinations AS composedCompanyRoutes IN dbTravelAgency:agencyName:agencyPasswd.\n";

inline std::vector<Case> cases() {
    return {
        {"q0 positive",
         "q0(Ename) :- employee(Ename, 100000, Dep, Boss), department(Dep, rossi).",
         "",
         {"INSERT INTO q0 ( SELECT employee.att1 FROM employee, department "
          "WHERE employee.att3 = department.att1 AND department.att2='rossi' "
          "AND employee.att2=100.000 EXCEPT (SELECT * FROM q0))"},
         {}},
        {"topEmployee negation",
         "topEmployee(Ename) :- employee(Ename,Salary,Dep,Boss), department(Dep,Boss), not otherBoss(Ename,Boss).\n"
         "otherBoss(Ename,Boss) :- employee(Ename,Salary,Dep,Boss), employee(Boss,Salary,Dep,Boss1).",
         "",
         {"INSERT INTO topEmployee ( SELECT employee.att1 FROM employee, department "
          "WHERE (employee.att3=department.att1) AND (employee.att4=department.att2) "
          "AND (employee.att1, employee.att4) NOT IN (SELECT otherBoss.att1, otherBoss.att2 FROM otherBoss ) "
          "EXCEPT (SELECT * FROM topEmployee))"},
         {}},
        {"q1 built-in",
         "q1(Ename) :- employee(Ename, Salary, Dep, Boss), Salary > 100000.",
         "",
         {"INSERT INTO q1 (SELECT employee.att1 FROM employee WHERE employee.att2 > 100.000 "
          "EXCEPT (SELECT * FROM q1))"},
         {}},
        {"costlyDep aggregate",
         "costlyDep(Dep) :- department(Dep,_), #sum{Salary,Ename : employee(Ename,Salary,Dep,_)} > 100000.",
         "",
         {"INSERT INTO aux_emp ( SELECT employee.att2, employee.att1, department.att1 "
          "FROM department, employee WHERE department.att1 = employee.att3 "
          "EXCEPT (SELECT * FROM aux_emp))",
          "CREATE VIEW aux_emp_supp AS ( SELECT aux_emp.att3, SUM (aux_emp.att1) FROM aux_emp "
          "GROUP BY aux_emp.att3)",
          "INSERT INTO costlyDep ( SELECT department.att1 FROM department, aux_emp_supp "
          "WHERE department.att1 = aux_emp_supp.att1 AND aux_emp_supp.att2 > 100000 "
          "EXCEPT (SELECT * FROM costlyDep))"},
         {{"aux_emp", "aux__costlyDep__1"}, {"aux_emp_supp", "aux__costlyDep__1_supp"}}},
        {"q2 recursive",
         "q2(E1,E2) :- employee(E1,Salary,Dep,E2).\n"
         "q2(E1,E3) :- q2(E1,E2), q2(E2,E3).",
         "",
         {"INSERT INTO q2 ( SELECT employee.att1, employee.att4 FROM employee EXCEPT (SELECT * FROM q2))",
          "INSERT INTO d_q2 ( "
          "SELECT q2.att1, d1_q2.att2 FROM q2, d1_q2 WHERE (q2.att2=d1_q2.att1) "
          "EXCEPT (SELECT * FROM d_q2) "
          "UNION "
          "SELECT d1_q2.att1, q2.att2 FROM d1_q2, q2 WHERE (d1_q2.att2=q2.att1) "
          "EXCEPT (SELECT * FROM d_q2) "
          "UNION "
          "SELECT d1_q2.att1, d1_q2_1.att2 FROM d1_q2, d1_q2 AS d1_q2_1 WHERE (d1_q2.att2=d1_q2_1.att1) "
          "EXCEPT (SELECT * FROM d_q2)) "
          "EXCEPT (SELECT * FROM d1_q2) "
          "EXCEPT (SELECT * FROM q2)"},
         {}},
        {"flight plan",
         kFlightProgram,
         kFlightDirectives,
         {// Statement (1) carries the duplicate-elimination guard like every exit statement.
          "INSERT INTO destinations_rel (SELECT f.FromX, f.ToY, f.Company FROM flight_rel AS f "
          "EXCEPT (SELECT * FROM destinations_rel))",
          "INSERT INTO destinations_rel (SELECT f.FromX, f.ToY, c.Company2 FROM flight_rel AS f, codeshare_rel AS c "
          "WHERE (f.Id=c.FlightId) AND (f.Company=c.Company1) EXCEPT (SELECT * FROM destinations_rel))",
          "INSERT INTO d_destinations_rel "
          "(SELECT d1.FromX, d2.ToY, d1.Company FROM d1_destinations_rel AS d1, destinations_rel AS d2 "
          "WHERE (d1.ToY=d2.FromX) AND (d1.Company=d2.Company) "
          "UNION "
          "SELECT d1.FromX, d2.ToY, d1.Company FROM destinations_rel AS d1, d1_destinations_rel AS d2 "
          "WHERE (d1.ToY=d2.FromX) AND (d1.Company=d2.Company) "
          "UNION "
          "SELECT d1.FromX, d2.ToY, d1.Company FROM d1_destinations_rel AS d1, d1_destinations_rel AS d2 "
          "WHERE (d1.ToY=d2.FromX)AND (d1.Company=d2.Company) "
          "EXCEPT (SELECT * FROM d1_destinations_rel) "
          "EXCEPT (SELECT * FROM destinations_rel) "
          "EXCEPT (SELECT * FROM d_destinations_rel))"},
         {}},
    };
}

/// Every statement of the plan, in execution order.
inline std::vector<dlvdb::SqlStatement> translate(const std::string& program_text, const std::string& directive_text,
                                                  dlvdb::SqlDialect dialect = dlvdb::SqlDialect::Generic) {
    using namespace dlvdb;
    Program program = parse_program(program_text);
    DirectiveSet directives;
    if (!directive_text.empty()) directives = parse_directives(directive_text);
    CompiledProgram compiled = compile(program, directives, true);
    SqliteBackend memory(":memory:");
    BindingMap bindings = bind_tables(compiled.program, directives, memory);
    std::vector<SqlStatement> out;
    for (const auto& plan :
         translate_program(compiled.strata, bindings, TranslatorOptions{dialect, compiled.program.maxint})) {
        out.insert(out.end(), plan.views.begin(), plan.views.end());
        out.insert(out.end(), plan.exit_statements.begin(), plan.exit_statements.end());
        out.insert(out.end(), plan.delta_statements.begin(), plan.delta_statements.end());
    }
    return out;
}

struct Outcome {
    bool ok = true;
    std::string detail;
};

/// Each expected statement must equal (canonically) one generated statement.
inline Outcome check(const Case& c) {
    Outcome o;
    std::vector<std::string> generated;
    for (const auto& s : translate(c.program, c.directives)) generated.push_back(sqlnorm::normalize(s.text));
    for (const auto& e : c.expected) {
        const std::string want = sqlnorm::normalize(e, c.renames);
        bool found = false;
        for (const auto& g : generated) found |= g == want;
        if (!found) {
            o.ok = false;
            o.detail += "expected: " + want + "\ngenerated:\n";
            for (const auto& g : generated) o.detail += "  " + g + "\n";
        }
    }
    return o;
}

}  // namespace golden
