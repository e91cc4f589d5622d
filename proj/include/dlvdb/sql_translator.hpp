#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dlvdb/analysis.hpp"
#include "dlvdb/ast.hpp"
#include "dlvdb/binding.hpp"

namespace dlvdb {

struct SqlStatement {
    enum class Kind { InsertSelect, CreateView, CreateTable, Delete };
    enum class Role { ExitRule, DeltaRule, AggregateView, Support };

    Kind kind = Kind::InsertSelect;
    Role role = Role::ExitRule;
    std::string text;
    std::string target;        // table written (or view created)
    std::size_t branches = 0;  // SELECT branches of an insert (1 for non-recursive rules)
};

const char* to_string(SqlStatement::Role r);

/// Statements of one component in execution order.
struct RulePlan {
    std::vector<std::string> predicates;
    std::vector<SqlStatement> views;             // aggregate support views
    std::vector<SqlStatement> exit_statements;   // run once
    std::vector<SqlStatement> delta_statements;  // run every pass
    /// Tables of component predicates that need delta tables.
    std::vector<std::string> recursive_tables;

    bool is_recursive() const { return !delta_statements.empty(); }
};

struct TranslatorOptions {
    SqlDialect dialect = SqlDialect::Generic;
    std::int64_t maxint = 0;
};

class SqlTranslator {
public:
    SqlTranslator(const BindingMap& bindings, TranslatorOptions options);

    /// Support views the rule needs, then its INSERT ... SELECT into the head table.
    std::vector<SqlStatement> translate_rule(const Rule& rule);

    /// Support views, then one INSERT into the head's delta table with 2^r - 1
    /// branches over accumulated and previous-delta tables of `component`.
    std::vector<SqlStatement> translate_recursive(const Rule& rule, const Component& component);

    RulePlan translate_component(const Component& component);

private:
    struct Query;

    const RelationBinding& binding(const std::string& predicate) const;
    Query build(const Rule& rule, const std::vector<std::string>& table_for_atom, std::vector<SqlStatement>& views);
    std::string aggregate_view(const AggregateAtom& agg, const std::vector<std::string>& group_vars,
                               std::vector<SqlStatement>& views);
    std::string render_insert(const RelationBinding& head, const std::string& target,
                              const std::vector<Query>& branches, const std::string& per_branch,
                              const std::vector<std::string>& trailing) const;

    const BindingMap& bindings_;
    TranslatorOptions options_;
    std::map<std::string, std::string> view_definitions_;  // name -> SELECT text
};

/// Whole program: one plan per component, in evaluation order.
std::vector<RulePlan> translate_program(const StratumPlan& plan, const BindingMap& bindings,
                                        TranslatorOptions options);

/// Every statement of `plans` in execution order, one per line.
std::string dump_sql(const std::vector<RulePlan>& plans);

}  // namespace dlvdb
