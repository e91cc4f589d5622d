#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dlvdb/diagnostic.hpp"

namespace dlvdb {

/// A ground value. Integers order before strings, strings compare bytewise,
/// which is the order SQLite uses for untyped columns.
using Value = std::variant<std::int64_t, std::string>;

std::string to_string(const Value& v);

/// Variable, integer constant or string constant.
struct Term {
    enum class Kind { Variable, Integer, String };

    Kind kind = Kind::Variable;
    std::string text;         // variable name or string constant
    std::int64_t number = 0;  // integer constant

    static Term variable(std::string name);
    static Term integer(std::int64_t v);
    static Term string(std::string s);
    static Term constant(const Value& v);

    bool is_variable() const { return kind == Kind::Variable; }
    bool is_constant() const { return kind != Kind::Variable; }
    /// Fresh variables introduced for `_` carry a name starting with '_'.
    bool is_anonymous() const { return is_variable() && !text.empty() && text[0] == '_'; }

    Value value() const;

    bool operator==(const Term&) const = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;
    SourceSpan span;

    std::size_t arity() const { return args.size(); }
    bool is_ground() const;

    bool operator==(const Atom& o) const { return predicate == o.predicate && args == o.args; }
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* to_string(CompareOp op);
CompareOp complement(CompareOp op);
/// `a op b` rewritten as `b flipped(op) a`.
CompareOp flipped(CompareOp op);

/// Comparison built-ins take two arguments; `Plus`/`Times` are relational
/// (`+(A,B,C)` holds iff A+B=C).
enum class BuiltinOp { Eq, Ne, Lt, Le, Gt, Ge, Plus, Times };

bool is_arithmetic(BuiltinOp op);
CompareOp to_compare(BuiltinOp op);
BuiltinOp to_builtin(CompareOp op);

struct BuiltinAtom {
    BuiltinOp op = BuiltinOp::Eq;
    std::vector<Term> args;

    bool operator==(const BuiltinAtom&) const = default;
};

enum class AggregateFunction { Count, Sum, Min, Max, Avg };

const char* to_string(AggregateFunction f);

/// `{Vars : Conj}`
struct SymbolicSet {
    std::vector<Term> vars;
    std::vector<Atom> conj;

    bool operator==(const SymbolicSet&) const = default;
};

/// `f{Vars : Conj} cmp guard`
struct AggregateAtom {
    AggregateFunction func = AggregateFunction::Count;
    SymbolicSet set;
    CompareOp cmp = CompareOp::Eq;
    Term guard;

    bool operator==(const AggregateAtom&) const = default;
};

struct Literal {
    bool negative = false;
    std::variant<Atom, BuiltinAtom, AggregateAtom> payload;

    bool is_atom() const { return std::holds_alternative<Atom>(payload); }
    bool is_builtin() const { return std::holds_alternative<BuiltinAtom>(payload); }
    bool is_aggregate() const { return std::holds_alternative<AggregateAtom>(payload); }

    const Atom& atom() const { return std::get<Atom>(payload); }
    Atom& atom() { return std::get<Atom>(payload); }
    const BuiltinAtom& builtin() const { return std::get<BuiltinAtom>(payload); }
    BuiltinAtom& builtin() { return std::get<BuiltinAtom>(payload); }
    const AggregateAtom& aggregate() const { return std::get<AggregateAtom>(payload); }
    AggregateAtom& aggregate() { return std::get<AggregateAtom>(payload); }

    static Literal positive(Atom a) { return Literal{false, std::move(a)}; }
    static Literal negated(Atom a) { return Literal{true, std::move(a)}; }
    static Literal of(BuiltinAtom b) { return Literal{false, std::move(b)}; }
    static Literal of(AggregateAtom a) { return Literal{false, std::move(a)}; }

    bool operator==(const Literal&) const = default;
};

struct Rule {
    Atom head;
    std::vector<Literal> body;
    SourceSpan span;

    bool operator==(const Rule& o) const { return head == o.head && body == o.body; }
};

struct Program {
    std::vector<Rule> rules;
    std::vector<Atom> facts;
    std::int64_t maxint = 0;
    std::optional<Atom> query;

    bool operator==(const Program&) const = default;

    /// Predicates in order of first appearance (facts, then rules, then query).
    std::vector<std::string> predicates() const;
};

/// Variables of a term list, in order, without duplicates.
void collect_variables(const std::vector<Term>& terms, std::vector<std::string>& out);
void collect_variables(const Atom& atom, std::vector<std::string>& out);
void collect_variables(const Literal& lit, std::vector<std::string>& out);

/// Variables that occur in a standard atom of the rule (head or body),
/// i.e. the rule's global variables.
std::vector<std::string> global_variables(const Rule& rule);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const BuiltinAtom& b);
std::string to_string(const AggregateAtom& a);
std::string to_string(const Literal& l);
std::string to_string(const Rule& r);
/// Re-parseable text of the whole program.
std::string to_string(const Program& p);

std::ostream& operator<<(std::ostream& os, const Term& t);
std::ostream& operator<<(std::ostream& os, const Atom& a);
std::ostream& operator<<(std::ostream& os, const Rule& r);
std::ostream& operator<<(std::ostream& os, const Program& p);

}  // namespace dlvdb
