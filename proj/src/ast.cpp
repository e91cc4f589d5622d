#include "dlvdb/ast.hpp"

#include <algorithm>
#include <sstream>

namespace dlvdb {

std::string to_string(const SourceSpan& span) {
    std::ostringstream os;
    os << (span.file.empty() ? "<input>" : span.file) << ':' << span.line << ':' << span.column;
    return os.str();
}

std::string to_string(const Diagnostic& diag) {
    std::string out = to_string(diag.span);
    out += diag.severity == Diagnostic::Severity::Error ? ": error: " : ": warning: ";
    out += diag.message;
    return out;
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& diag) { return os << to_string(diag); }

namespace {
std::string join_messages(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += '\n';
        out += to_string(d);
    }
    return out;
}
}  // namespace

DiagnosticError::DiagnosticError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_messages(diags)), diags_(std::move(diags)) {}

DiagnosticError::DiagnosticError(Diagnostic diag) : DiagnosticError(std::vector<Diagnostic>{std::move(diag)}) {}

// ---------------------------------------------------------------------------

Term Term::variable(std::string name) { return Term{Kind::Variable, std::move(name), 0}; }
Term Term::integer(std::int64_t v) { return Term{Kind::Integer, {}, v}; }
Term Term::string(std::string s) { return Term{Kind::String, std::move(s), 0}; }

Term Term::constant(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return integer(*i);
    return string(std::get<std::string>(v));
}

Value Term::value() const {
    if (kind == Kind::Integer) return number;
    return text;
}

bool Atom::is_ground() const {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
}

const char* to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

CompareOp complement(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return CompareOp::Ne;
        case CompareOp::Ne: return CompareOp::Eq;
        case CompareOp::Lt: return CompareOp::Ge;
        case CompareOp::Le: return CompareOp::Gt;
        case CompareOp::Gt: return CompareOp::Le;
        case CompareOp::Ge: return CompareOp::Lt;
    }
    return op;
}

CompareOp flipped(CompareOp op) {
    switch (op) {
        case CompareOp::Lt: return CompareOp::Gt;
        case CompareOp::Le: return CompareOp::Ge;
        case CompareOp::Gt: return CompareOp::Lt;
        case CompareOp::Ge: return CompareOp::Le;
        default: return op;
    }
}

bool is_arithmetic(BuiltinOp op) { return op == BuiltinOp::Plus || op == BuiltinOp::Times; }

CompareOp to_compare(BuiltinOp op) {
    switch (op) {
        case BuiltinOp::Eq: return CompareOp::Eq;
        case BuiltinOp::Ne: return CompareOp::Ne;
        case BuiltinOp::Lt: return CompareOp::Lt;
        case BuiltinOp::Le: return CompareOp::Le;
        case BuiltinOp::Gt: return CompareOp::Gt;
        case BuiltinOp::Ge: return CompareOp::Ge;
        default: break;
    }
    throw std::logic_error("arithmetic built-in has no comparison operator");
}

BuiltinOp to_builtin(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return BuiltinOp::Eq;
        case CompareOp::Ne: return BuiltinOp::Ne;
        case CompareOp::Lt: return BuiltinOp::Lt;
        case CompareOp::Le: return BuiltinOp::Le;
        case CompareOp::Gt: return BuiltinOp::Gt;
        case CompareOp::Ge: return BuiltinOp::Ge;
    }
    return BuiltinOp::Eq;
}

const char* to_string(AggregateFunction f) {
    switch (f) {
        case AggregateFunction::Count: return "#count";
        case AggregateFunction::Sum: return "#sum";
        case AggregateFunction::Min: return "#min";
        case AggregateFunction::Max: return "#max";
        case AggregateFunction::Avg: return "#avg";
    }
    return "#?";
}

// ---------------------------------------------------------------------------

std::vector<std::string> Program::predicates() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& p) {
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    };
    for (const auto& f : facts) add(f.predicate);
    for (const auto& r : rules) {
        add(r.head.predicate);
        for (const auto& l : r.body) {
            if (l.is_atom()) add(l.atom().predicate);
            if (l.is_aggregate())
                for (const auto& a : l.aggregate().set.conj) add(a.predicate);
        }
    }
    if (query) add(query->predicate);
    return out;
}

void collect_variables(const std::vector<Term>& terms, std::vector<std::string>& out) {
    for (const auto& t : terms)
        if (t.is_variable() && std::find(out.begin(), out.end(), t.text) == out.end()) out.push_back(t.text);
}

void collect_variables(const Atom& atom, std::vector<std::string>& out) { collect_variables(atom.args, out); }

void collect_variables(const Literal& lit, std::vector<std::string>& out) {
    if (lit.is_atom()) {
        collect_variables(lit.atom(), out);
    } else if (lit.is_builtin()) {
        collect_variables(lit.builtin().args, out);
    } else {
        const auto& agg = lit.aggregate();
        collect_variables(agg.set.vars, out);
        for (const auto& a : agg.set.conj) collect_variables(a, out);
        collect_variables(std::vector<Term>{agg.guard}, out);
    }
}

std::vector<std::string> global_variables(const Rule& rule) {
    std::vector<std::string> out;
    collect_variables(rule.head, out);
    for (const auto& l : rule.body)
        if (l.is_atom()) collect_variables(l.atom(), out);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_bare_symbol(const std::string& s) {
    if (s.empty() || !(s[0] >= 'a' && s[0] <= 'z')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    });
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_terms(const std::vector<Term>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) out += ", ";
        out += to_string(ts[i]);
    }
    return out;
}

}  // namespace

std::string to_string(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return std::get<std::string>(v);
}

std::string to_string(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Variable: return t.is_anonymous() ? "_" : t.text;
        case Term::Kind::Integer: return std::to_string(t.number);
        case Term::Kind::String: return is_bare_symbol(t.text) && t.text != "not" ? t.text : quote(t.text);
    }
    return "?";
}

std::string to_string(const Atom& a) {
    if (a.args.empty()) return a.predicate;
    return a.predicate + "(" + join_terms(a.args) + ")";
}

std::string to_string(const BuiltinAtom& b) {
    if (b.op == BuiltinOp::Plus) return "+(" + join_terms(b.args) + ")";
    if (b.op == BuiltinOp::Times) return "*(" + join_terms(b.args) + ")";
    return to_string(b.args.at(0)) + " " + to_string(to_compare(b.op)) + " " + to_string(b.args.at(1));
}

std::string to_string(const AggregateAtom& a) {
    std::string out = to_string(a.func);
    out += "{" + join_terms(a.set.vars) + " : ";
    for (std::size_t i = 0; i < a.set.conj.size(); ++i) {
        if (i) out += ", ";
        out += to_string(a.set.conj[i]);
    }
    out += "} ";
    out += to_string(a.cmp);
    out += " " + to_string(a.guard);
    return out;
}

std::string to_string(const Literal& l) {
    std::string out = l.negative ? "not " : "";
    std::visit([&](const auto& p) { out += to_string(p); }, l.payload);
    return out;
}

std::string to_string(const Rule& r) {
    std::string out = to_string(r.head);
    if (!r.body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            if (i) out += ", ";
            out += to_string(r.body[i]);
        }
    }
    out += ".";
    return out;
}

std::string to_string(const Program& p) {
    std::string out;
    if (p.maxint != 0) out += "#maxint = " + std::to_string(p.maxint) + ".\n";
    for (const auto& f : p.facts) out += to_string(f) + ".\n";
    for (const auto& r : p.rules) out += to_string(r) + "\n";
    if (p.query) out += to_string(*p.query) + "?\n";
    return out;
}

std::ostream& operator<<(std::ostream& os, const Term& t) { return os << to_string(t); }
std::ostream& operator<<(std::ostream& os, const Atom& a) { return os << to_string(a); }
std::ostream& operator<<(std::ostream& os, const Rule& r) { return os << to_string(r); }
std::ostream& operator<<(std::ostream& os, const Program& p) { return os << to_string(p); }

}  // namespace dlvdb
