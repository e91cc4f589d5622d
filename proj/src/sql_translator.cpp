#include "dlvdb/sql_translator.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dlvdb/validate.hpp"

namespace dlvdb {

const char* to_string(SqlDialect d) { return d == SqlDialect::Generic ? "generic" : "no-except"; }

const char* to_string(SqlStatement::Role r) {
    switch (r) {
        case SqlStatement::Role::ExitRule: return "exit-rule";
        case SqlStatement::Role::DeltaRule: return "delta-rule";
        case SqlStatement::Role::AggregateView: return "aggregate-view";
        case SqlStatement::Role::Support: return "support";
    }
    return "?";
}

std::string delta_table(const std::string& table) { return "d_" + table; }
std::string prev_delta_table(const std::string& table) { return "d1_" + table; }

std::vector<std::string> default_attributes(std::size_t arity) {
    if (arity == 0) return {kFlagColumn};
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= arity; ++i) out.push_back("att_" + std::to_string(i));
    return out;
}

namespace {

const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words{
        "ABORT",    "ACTION",   "ADD",       "ALL",     "ALTER",      "AND",       "AS",       "ASC",
        "BETWEEN",  "BY",       "CASE",      "CAST",    "CHECK",      "COLLATE",   "COLUMN",   "COMMIT",
        "CONSTRAINT", "CREATE", "CROSS",     "CURRENT", "DEFAULT",    "DELETE",    "DESC",     "DISTINCT",
        "DROP",     "ELSE",     "END",       "ESCAPE",  "EXCEPT",     "EXISTS",    "FOREIGN",  "FROM",
        "FULL",     "GROUP",    "HAVING",    "IF",      "IN",         "INDEX",     "INNER",    "INSERT",
        "INTERSECT", "INTO",    "IS",        "ISNULL",  "JOIN",       "KEY",       "LEFT",     "LIKE",
        "LIMIT",    "NATURAL",  "NOT",       "NOTNULL", "NULL",       "OF",        "OFFSET",   "ON",
        "OR",       "ORDER",    "OUTER",     "PRIMARY", "REFERENCES", "RIGHT",     "ROLLBACK", "ROW",
        "SELECT",   "SET",      "TABLE",     "THEN",    "TO",         "TRANSACTION", "UNION",  "UNIQUE",
        "UPDATE",   "USING",    "VALUES",    "VIEW",    "WHEN",       "WHERE",     "WITH",
    };
    return words;
}

}  // namespace

std::string quote_ident(const std::string& name) {
    bool plain = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0])) &&
                 std::all_of(name.begin(), name.end(),
                             [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    if (plain) {
        std::string up = name;
        for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (!reserved_words().count(up)) return name;
    }
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string sql_literal(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    std::string out = "'";
    for (char c : std::get<std::string>(v)) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

// ---------------------------------------------------------------------------

struct SqlTranslator::Query {
    std::vector<std::string> from;    // rendered "table" or "table AS alias"
    std::vector<std::string> where;
    std::vector<std::string> select;  // one expression per head argument
};

namespace {

const char* sql_op(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "<>";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

[[noreturn]] void translation_error(const Rule& rule, const std::string& msg) {
    throw DiagnosticError(Diagnostic{Diagnostic::Severity::Error, rule.span, msg + " in rule: " + to_string(rule)});
}

/// Hands out `table`, `table_1`, `table_2`, ... per FROM clause.
class AliasPool {
public:
    std::pair<std::string, std::string> next(const std::string& table) {
        int n = uses_[table]++;
        if (n == 0) return {quote_ident(table), quote_ident(table)};
        std::string alias = quote_ident(table + "_" + std::to_string(n));
        return {quote_ident(table) + " AS " + alias, alias};
    }

private:
    std::map<std::string, int> uses_;
};

std::string column(const std::string& alias, const std::string& attr) { return alias + "." + quote_ident(attr); }

/// Variables of `rule` visible outside the aggregate at body index `li`.
std::vector<std::string> outside_variables(const Rule& rule, std::size_t li) {
    std::vector<std::string> out;
    collect_variables(rule.head, out);
    for (std::size_t lj = 0; lj < rule.body.size(); ++lj) {
        const Literal& l = rule.body[lj];
        if (l.is_aggregate()) collect_variables(std::vector<Term>{l.aggregate().guard}, out);
        else if (lj != li) collect_variables(l, out);
    }
    return out;
}

}  // namespace

SqlTranslator::SqlTranslator(const BindingMap& bindings, TranslatorOptions options)
    : bindings_(bindings), options_(options) {}

const RelationBinding& SqlTranslator::binding(const std::string& predicate) const {
    auto it = bindings_.find(predicate);
    if (it == bindings_.end()) throw std::logic_error("no relation bound to predicate '" + predicate + "'");
    return it->second;
}

std::string SqlTranslator::aggregate_view(const AggregateAtom& agg, const std::vector<std::string>& group_vars,
                                          std::vector<SqlStatement>& views) {
    const Atom& a = agg.set.conj.front();
    const RelationBinding& b = binding(a.predicate);
    const std::string t = quote_ident(b.table);
    auto position = [&](const std::string& var) {
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (a.args[i].is_variable() && a.args[i].text == var) return i;
        throw std::logic_error("aggregate variable '" + var + "' missing from " + to_string(a));
    };

    std::vector<std::string> groups;
    for (const auto& g : group_vars) groups.push_back(column(t, b.attributes[position(g)]));
    const std::string x = column(t, b.attributes[position(agg.set.vars.front().text)]);

    std::string select = "SELECT ";
    for (const auto& g : groups) select += g + ", ";
    switch (agg.func) {
        case AggregateFunction::Count: select += "COUNT(*)"; break;
        case AggregateFunction::Sum: select += "SUM(" + x + ")"; break;
        case AggregateFunction::Min: select += "MIN(" + x + ")"; break;
        case AggregateFunction::Max: select += "MAX(" + x + ")"; break;
        case AggregateFunction::Avg: select += "SUM(" + x + "), COUNT(*)"; break;
    }
    select += " FROM " + t;
    if (!groups.empty()) {
        select += " GROUP BY ";
        for (std::size_t i = 0; i < groups.size(); ++i) select += (i ? ", " : "") + groups[i];
    } else {
        // One constant group: an empty relation yields no row. SQLite before
        // 3.39 rejects HAVING without GROUP BY.
        select += " GROUP BY NULL";
    }

    std::string name = b.table + "_supp";
    for (int k = 2;; ++k) {
        auto it = view_definitions_.find(name);
        if (it == view_definitions_.end()) break;
        if (it->second == select) return name;
        name = b.table + "_supp_" + std::to_string(k);
    }
    view_definitions_[name] = select;

    const std::size_t columns = groups.size() + (agg.func == AggregateFunction::Avg ? 2 : 1);
    std::string cols;
    for (std::size_t i = 1; i <= columns; ++i) cols += (i > 1 ? ", " : "") + std::string("att_") + std::to_string(i);
    SqlStatement view;
    view.kind = SqlStatement::Kind::CreateView;
    view.role = SqlStatement::Role::AggregateView;
    view.target = name;
    view.text = "CREATE VIEW " + quote_ident(name) + " (" + cols + ") AS " + select;
    views.push_back(std::move(view));
    return name;
}

SqlTranslator::Query SqlTranslator::build(const Rule& rule, const std::vector<std::string>& table_for_atom,
                                          std::vector<SqlStatement>& views) {
    Query q;
    AliasPool aliases;
    std::map<std::string, std::string> expr;       // variable -> SQL expression
    std::set<std::string> varchar_vars;            // bound to a declared varchar attribute

    // Positive atoms: FROM entries, constant and join conditions.
    for (std::size_t li = 0; li < rule.body.size(); ++li) {
        const Literal& l = rule.body[li];
        if (!l.is_atom() || l.negative) continue;
        const Atom& a = l.atom();
        const RelationBinding& b = binding(a.predicate);
        const std::string& table = table_for_atom.empty() || table_for_atom[li].empty() ? b.table : table_for_atom[li];
        auto [from, alias] = aliases.next(table);
        q.from.push_back(from);
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            const Term& t = a.args[i];
            const std::string col = column(alias, b.attributes[i]);
            if (t.is_constant()) {
                q.where.push_back(col + " = " + sql_literal(t.value()));
            } else if (auto it = expr.find(t.text); it != expr.end()) {
                q.where.push_back(it->second + " = " + col);
            } else {
                expr[t.text] = col;
                if (b.is_varchar(i)) varchar_vars.insert(t.text);
            }
        }
    }

    auto term_sql = [&](const Term& t) -> std::string {
        if (t.is_constant()) return sql_literal(t.value());
        auto it = expr.find(t.text);
        if (it == expr.end()) translation_error(rule, "variable '" + t.text + "' is unbound");
        return it->second;
    };
    auto numeric = [&](const Term& t) {
        if (t.kind == Term::Kind::String || (t.is_variable() && varchar_vars.count(t.text)))
            translation_error(rule, "arithmetic over non-integer term '" + to_string(t) + "'");
    };

    // Built-ins.
    const BuiltinPlan plan = plan_builtins(rule, options_.maxint);
    if (!plan.errors.empty()) throw DiagnosticError(plan.errors);
    for (const auto& step : plan.steps) {
        if (step.kind == BuiltinStep::Kind::Range) {
            auto [from, alias] = aliases.next(kRangeTable);
            q.from.push_back(from);
            expr[step.variable] = column(alias, "att_1");
            continue;
        }
        const BuiltinAtom& b = rule.body[step.literal].builtin();
        if (is_arithmetic(b.op)) {
            numeric(b.args[0]);
            numeric(b.args[1]);
            const std::string e = "(" + term_sql(b.args[0]) + (b.op == BuiltinOp::Plus ? " + " : " * ") +
                                  term_sql(b.args[1]) + ")";
            if (step.kind == BuiltinStep::Kind::Check) {
                numeric(b.args[2]);
                q.where.push_back(term_sql(b.args[2]) + " = " + e);
            } else {
                expr[step.variable] = e;
                q.where.push_back(e + " >= 0");
                q.where.push_back(e + " <= " + std::to_string(options_.maxint));
            }
            continue;
        }
        if (step.kind == BuiltinStep::Kind::Check) {
            q.where.push_back(term_sql(b.args[0]) + " " + sql_op(to_compare(b.op)) + " " + term_sql(b.args[1]));
        } else {
            const bool left_is_target = b.args[0].is_variable() && b.args[0].text == step.variable;
            const Term& source = left_is_target ? b.args[1] : b.args[0];
            expr[step.variable] = term_sql(source);
            if (source.is_variable() && varchar_vars.count(source.text)) varchar_vars.insert(step.variable);
        }
    }

    // Negated atoms.
    for (const auto& l : rule.body) {
        if (!l.is_atom() || !l.negative) continue;
        const Atom& a = l.atom();
        const RelationBinding& b = binding(a.predicate);
        const std::string t = quote_ident(b.table);
        std::vector<std::string> outer, inner, conds;
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            const Term& arg = a.args[i];
            const std::string col = column(t, b.attributes[i]);
            if (arg.is_constant()) {
                conds.push_back(col + " = " + sql_literal(arg.value()));
            } else if (!arg.is_anonymous()) {
                outer.push_back(term_sql(arg));
                inner.push_back(col);
            }
        }
        std::string where;
        for (std::size_t i = 0; i < conds.size(); ++i) where += (i ? " AND " : " WHERE ") + conds[i];
        if (outer.empty()) {
            q.where.push_back("NOT EXISTS (SELECT 1 FROM " + t + where + ")");
            continue;
        }
        std::string lhs, sel;
        for (std::size_t i = 0; i < outer.size(); ++i) {
            lhs += (i ? ", " : "") + outer[i];
            sel += (i ? ", " : "") + inner[i];
        }
        if (outer.size() > 1) lhs = "(" + lhs + ")";
        q.where.push_back(lhs + " NOT IN (SELECT " + sel + " FROM " + t + where + ")");
    }

    // Aggregates: join the support view on the group variables, compare against the guard.
    for (std::size_t li = 0; li < rule.body.size(); ++li) {
        if (!rule.body[li].is_aggregate()) continue;
        const AggregateAtom& agg = rule.body[li].aggregate();
        if (agg.set.conj.size() != 1) translation_error(rule, "aggregate is not standardized");
        const std::vector<std::string> outside = outside_variables(rule, li);
        std::vector<std::string> groups;
        for (const auto& t : agg.set.conj.front().args) {
            if (!t.is_variable()) translation_error(rule, "aggregate is not standardized");
            if (std::find(outside.begin(), outside.end(), t.text) != outside.end() &&
                std::find(groups.begin(), groups.end(), t.text) == groups.end())
                groups.push_back(t.text);
        }
        const std::string view = aggregate_view(agg, groups, views);
        auto [from, alias] = aliases.next(view);
        q.from.push_back(from);
        for (std::size_t g = 0; g < groups.size(); ++g)
            q.where.push_back(column(alias, "att_" + std::to_string(g + 1)) + " = " + term_sql(Term::variable(groups[g])));
        const std::string value = column(alias, "att_" + std::to_string(groups.size() + 1));
        const std::string guard = term_sql(agg.guard);
        if (agg.func == AggregateFunction::Avg) {
            const std::string count = column(alias, "att_" + std::to_string(groups.size() + 2));
            q.where.push_back(value + " " + sql_op(agg.cmp) + " " + guard + " * " + count);
        } else {
            q.where.push_back(value + " " + sql_op(agg.cmp) + " " + guard);
        }
    }

    if (rule.head.args.empty()) q.select.push_back("1");
    for (const auto& t : rule.head.args) q.select.push_back(term_sql(t));
    return q;
}

namespace {

std::string render_select(const std::vector<std::string>& select, bool distinct) {
    std::string s = distinct ? "SELECT DISTINCT " : "SELECT ";
    for (std::size_t i = 0; i < select.size(); ++i) s += (i ? ", " : "") + select[i];
    return s;
}

std::string render_body(const std::vector<std::string>& from, const std::vector<std::string>& where) {
    std::string s;
    if (!from.empty()) {
        s += " FROM ";
        for (std::size_t i = 0; i < from.size(); ++i) s += (i ? ", " : "") + from[i];
    }
    for (std::size_t i = 0; i < where.size(); ++i) s += (i ? " AND " : " WHERE ") + where[i];
    return s;
}

std::string except_clause(const std::string& table) { return " EXCEPT SELECT * FROM " + quote_ident(table); }

}  // namespace

std::string SqlTranslator::render_insert(const RelationBinding& head, const std::string& target,
                                         const std::vector<Query>& branches, const std::string& per_branch,
                                         const std::vector<std::string>& trailing) const {
    std::string out = "INSERT INTO " + quote_ident(target) + " ";
    if (options_.dialect == SqlDialect::Generic) {
        for (std::size_t i = 0; i < branches.size(); ++i) {
            if (i) out += " UNION ";
            out += render_select(branches[i].select, false) + render_body(branches[i].from, branches[i].where);
            if (!per_branch.empty()) out += except_clause(per_branch);
        }
        for (const auto& t : trailing) out += except_clause(t);
        return out;
    }

    std::vector<std::string> excluded = trailing;
    if (!per_branch.empty()) excluded.insert(excluded.begin(), per_branch);
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const Query& q = branches[i];
        std::vector<std::string> where = q.where;
        for (const auto& t : excluded) {
            const std::string alias = quote_ident(t + "__ex");
            std::string cond = "NOT EXISTS (SELECT 1 FROM " + quote_ident(t) + " AS " + alias;
            for (std::size_t k = 0; k < head.arity; ++k)
                cond += (k ? " AND " : " WHERE ") + column(alias, head.attributes[k]) + " = " + q.select[k];
            where.push_back(cond + ")");
        }
        if (i) out += " UNION ";
        out += render_select(q.select, true) + render_body(q.from, where);
    }
    return out;
}

std::vector<SqlStatement> SqlTranslator::translate_rule(const Rule& rule) {
    std::vector<SqlStatement> out;
    Query q = build(rule, {}, out);
    const RelationBinding& head = binding(rule.head.predicate);
    SqlStatement s;
    s.kind = SqlStatement::Kind::InsertSelect;
    s.role = SqlStatement::Role::ExitRule;
    s.target = head.table;
    s.branches = 1;
    s.text = render_insert(head, head.table, {q}, "", {head.table});
    out.push_back(std::move(s));
    return out;
}

std::vector<SqlStatement> SqlTranslator::translate_recursive(const Rule& rule, const Component& component) {
    std::vector<std::size_t> occurrences;
    for (std::size_t li = 0; li < rule.body.size(); ++li) {
        const Literal& l = rule.body[li];
        if (l.is_atom() && !l.negative && component.contains(l.atom().predicate)) occurrences.push_back(li);
    }
    const std::size_t r = occurrences.size();
    if (r == 0) throw std::logic_error("translate_recursive called on a non-recursive rule");
    if (r > 16) translation_error(rule, "too many recursive body atoms (" + std::to_string(r) + ")");

    std::vector<SqlStatement> out;
    std::vector<Query> branches;
    for (std::size_t i = 1; i < (std::size_t{1} << r); ++i) {
        std::vector<std::string> tables(rule.body.size());
        for (std::size_t j = 0; j < r; ++j) {
            const RelationBinding& b = binding(rule.body[occurrences[j]].atom().predicate);
            // The first occurrence reads the highest bit.
            const bool delta = (i >> (r - 1 - j)) & 1U;
            tables[occurrences[j]] = delta ? prev_delta_table(b.table) : b.table;
        }
        branches.push_back(build(rule, tables, out));
    }

    const RelationBinding& head = binding(rule.head.predicate);
    SqlStatement s;
    s.kind = SqlStatement::Kind::InsertSelect;
    s.role = SqlStatement::Role::DeltaRule;
    s.target = delta_table(head.table);
    s.branches = branches.size();
    s.text = render_insert(head, s.target, branches, delta_table(head.table),
                           {prev_delta_table(head.table), head.table});
    out.push_back(std::move(s));
    return out;
}

RulePlan SqlTranslator::translate_component(const Component& component) {
    RulePlan plan;
    plan.predicates = component.predicates;
    auto split = [&](std::vector<SqlStatement> stmts, std::vector<SqlStatement>& dest) {
        for (auto& s : stmts)
            (s.kind == SqlStatement::Kind::CreateView ? plan.views : dest).push_back(std::move(s));
    };
    for (const auto& r : component.exit_rules) split(translate_rule(r), plan.exit_statements);
    for (const auto& r : component.recursive_rules) split(translate_recursive(r, component), plan.delta_statements);
    if (component.is_recursive())
        for (const auto& p : component.predicates) plan.recursive_tables.push_back(binding(p).table);
    return plan;
}

std::vector<RulePlan> translate_program(const StratumPlan& plan, const BindingMap& bindings,
                                        TranslatorOptions options) {
    SqlTranslator translator(bindings, options);
    std::vector<RulePlan> out;
    for (const auto& c : plan.components) out.push_back(translator.translate_component(c));
    return out;
}

std::string dump_sql(const std::vector<RulePlan>& plans) {
    std::ostringstream os;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& p = plans[i];
        if (p.views.empty() && p.exit_statements.empty() && p.delta_statements.empty()) continue;
        os << "-- component " << i + 1 << ": ";
        for (std::size_t j = 0; j < p.predicates.size(); ++j) os << (j ? ", " : "") << p.predicates[j];
        os << '\n';
        for (const auto& s : p.views) os << s.text << ";\n";
        for (const auto& s : p.exit_statements) os << s.text << ";\n";
        if (p.is_recursive()) os << "-- repeat until every delta is empty\n";
        for (const auto& s : p.delta_statements) os << s.text << ";\n";
    }
    return os.str();
}

}  // namespace dlvdb
