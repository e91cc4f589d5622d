#include "dlvdb/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "dlvdb/validate.hpp"

namespace dlvdb {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

/// Character cursor with line/column tracking. `comment` starts a line comment.
class Cursor {
public:
    Cursor(std::string_view text, std::string file, std::string comment)
        : text_(text), file_(std::move(file)), comment_(std::move(comment)) {}

    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t k = 0) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }
    bool starts_with(std::string_view s) const { return text_.substr(pos_).substr(0, s.size()) == s; }

    char get() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip() {
        while (!eof()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                get();
            } else if (starts_with(comment_)) {
                while (!eof() && peek() != '\n') get();
            } else {
                break;
            }
        }
    }

    SourceSpan span() const { return SourceSpan{file_, line_, col_}; }

    struct Mark {
        std::size_t pos;
        int line, col;
    };
    Mark mark() const { return {pos_, line_, col_}; }
    void reset(const Mark& m) {
        pos_ = m.pos;
        line_ = m.line;
        col_ = m.col;
    }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(span(), msg); }
    [[noreturn]] static void fail_at(const SourceSpan& sp, const std::string& msg) {
        throw DiagnosticError(Diagnostic{Diagnostic::Severity::Error, sp, msg});
    }

    std::string describe_next() const {
        if (eof()) return "end of input";
        return "'" + std::string(1, peek()) + "'";
    }

    void expect(char c) {
        skip();
        if (peek() != c) fail(std::string("expected '") + c + "' but found " + describe_next());
        get();
    }

    bool accept(std::string_view s) {
        skip();
        if (!starts_with(s)) return false;
        for (std::size_t i = 0; i < s.size(); ++i) get();
        return true;
    }

    std::string ident() {
        std::string out;
        while (!eof() && ident_char(peek())) out += get();
        return out;
    }

    /// True if the next word is `kw` (case-insensitive when `fold`); consumes it.
    bool keyword(std::string_view kw, bool fold) {
        skip();
        auto m = mark();
        std::string w = ident();
        if (w.size() == kw.size() && (fold ? upper(w) == kw : w == kw)) return true;
        reset(m);
        return false;
    }

    std::string quoted_string() {
        std::string out;
        get();  // opening quote
        while (true) {
            if (eof()) fail("unterminated string");
            char c = get();
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated string");
                char e = get();
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += c;
            }
        }
        return out;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::string file_;
    std::string comment_;
};

std::optional<std::int64_t> to_int(std::string_view digits) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Program language

class ProgramParser {
public:
    ProgramParser(std::string_view text, const std::string& file) : c_(text, file, "%") {}

    Program run() {
        while (true) {
            c_.skip();
            if (c_.eof()) break;
            statement();
        }
        validate();
        return std::move(prog_);
    }

private:
    Cursor c_;
    Program prog_;
    int anon_ = 0;

    void statement() {
        const SourceSpan start = c_.span();
        if (c_.peek() == '#') {
            c_.get();
            std::string name = c_.ident();
            if (name != "maxint") c_.fail_at(start, "unknown directive '#" + name + "'");
            c_.expect('=');
            c_.skip();
            Term t = term();
            if (t.kind != Term::Kind::Integer || t.number < 0)
                c_.fail_at(start, "#maxint expects a nonnegative integer");
            prog_.maxint = t.number;
            c_.expect('.');
            return;
        }
        if (c_.starts_with(":-") || c_.starts_with(":~"))
            c_.fail("unsupported fragment: rules without a head (constraints) are not supported");

        Atom head = atom();
        c_.skip();
        if (c_.peek() == '|' || (c_.peek() == 'v' && !ident_char(c_.peek(1))))
            c_.fail("unsupported fragment: disjunctive heads are not supported");
        if (c_.peek() == '?') {
            c_.get();
            if (prog_.query) c_.fail_at(start, "more than one query");
            prog_.query = std::move(head);
            return;
        }
        if (c_.accept(":-")) {
            Rule r{std::move(head), {}, start};
            do {
                literal(r.body);
            } while (c_.accept(","));
            c_.expect('.');
            prog_.rules.push_back(std::move(r));
            return;
        }
        c_.skip();
        if (c_.peek() != '.') c_.fail("expected '.', ':-' or '?' but found " + c_.describe_next());
        c_.get();
        if (!head.is_ground()) c_.fail_at(start, "fact '" + to_string(head) + "' is not ground");
        prog_.facts.push_back(std::move(head));
    }

    Atom atom() {
        c_.skip();
        Atom a;
        a.span = c_.span();
        if (!is_lower(c_.peek())) c_.fail("expected a predicate name but found " + c_.describe_next());
        a.predicate = c_.ident();
        c_.skip();
        if (c_.peek() == '(') {
            c_.get();
            do {
                a.args.push_back(term());
            } while (c_.accept(","));
            c_.expect(')');
        }
        return a;
    }

    Term term() {
        c_.skip();
        const char ch = c_.peek();
        if (ch == '"') return Term::string(c_.quoted_string());
        if (is_digit(ch) || (ch == '-' && is_digit(c_.peek(1)))) {
            std::string digits;
            if (ch == '-') digits += c_.get();
            while (is_digit(c_.peek())) digits += c_.get();
            if (c_.peek() == '.' && is_digit(c_.peek(1)))
                c_.fail("'.' inside a numeral is not supported; write the integer without separators");
            auto v = to_int(digits);
            if (!v) c_.fail("integer constant " + digits + " out of range");
            return Term::integer(*v);
        }
        if (ch == '_') {
            if (ident_char(c_.peek(1))) c_.fail("identifiers may not start with '_'");
            c_.get();
            return Term::variable("_" + std::to_string(++anon_));
        }
        if (is_upper(ch)) return Term::variable(c_.ident());
        if (is_lower(ch)) return Term::string(c_.ident());
        c_.fail("expected a term but found " + c_.describe_next());
    }

    std::optional<CompareOp> compare_op() {
        c_.skip();
        if (c_.accept("<=")) return CompareOp::Le;
        if (c_.accept(">=")) return CompareOp::Ge;
        if (c_.accept("!=") || c_.accept("<>")) return CompareOp::Ne;
        if (c_.accept("==")) return CompareOp::Eq;
        if (c_.accept("=")) return CompareOp::Eq;
        if (c_.accept("<")) return CompareOp::Lt;
        if (c_.accept(">")) return CompareOp::Gt;
        return std::nullopt;
    }

    bool next_is_compare() {
        auto m = c_.mark();
        bool r = compare_op().has_value();
        c_.reset(m);
        return r;
    }

    // `#f{Vars : Conj}` without comparison.
    AggregateAtom aggregate_term() {
        c_.skip();
        c_.get();  // '#'
        std::string name = c_.ident();
        AggregateAtom agg;
        if (name == "count") agg.func = AggregateFunction::Count;
        else if (name == "sum") agg.func = AggregateFunction::Sum;
        else if (name == "min") agg.func = AggregateFunction::Min;
        else if (name == "max") agg.func = AggregateFunction::Max;
        else if (name == "avg") agg.func = AggregateFunction::Avg;
        else c_.fail("unknown aggregate function '#" + name + "'");
        c_.expect('{');
        do {
            agg.set.vars.push_back(term());
        } while (c_.accept(","));
        c_.expect(':');
        do {
            agg.set.conj.push_back(atom());
        } while (c_.accept(","));
        c_.expect('}');
        return agg;
    }

    void literal(std::vector<Literal>& body) {
        c_.skip();
        const SourceSpan start = c_.span();
        bool neg = c_.keyword("not", false);
        c_.skip();

        if (c_.peek() == '#') {
            AggregateAtom agg = aggregate_term();
            auto op = compare_op();
            if (!op) c_.fail("expected a comparison after the aggregate");
            agg.cmp = *op;
            agg.guard = term();
            if (neg) agg.cmp = complement(agg.cmp);
            body.push_back(Literal::of(std::move(agg)));
            return;
        }

        if ((c_.peek() == '+' || c_.peek() == '*')) {
            auto m = c_.mark();
            char opch = c_.get();
            c_.skip();
            if (c_.peek() == '(') {
                c_.get();
                BuiltinAtom b{opch == '+' ? BuiltinOp::Plus : BuiltinOp::Times, {}};
                do {
                    b.args.push_back(term());
                } while (c_.accept(","));
                c_.expect(')');
                if (b.args.size() != 3) c_.fail_at(start, "arithmetic built-ins take exactly 3 arguments");
                if (neg) c_.fail_at(start, "negated arithmetic built-ins are not supported");
                body.push_back(Literal::of(std::move(b)));
                return;
            }
            c_.reset(m);
        }

        if (is_lower(c_.peek())) {
            auto m = c_.mark();
            c_.ident();
            c_.skip();
            bool is_atom = c_.peek() == '(' || !next_is_compare();
            c_.reset(m);
            if (is_atom) {
                Atom a = atom();
                body.push_back(neg ? Literal::negated(std::move(a)) : Literal::positive(std::move(a)));
                return;
            }
        }

        Term lhs = term();
        auto op = compare_op();
        if (!op) c_.fail("expected a comparison operator but found " + c_.describe_next());
        c_.skip();
        if (c_.peek() == '#') {
            // guard op #f{...} [op2 guard2]
            AggregateAtom agg = aggregate_term();
            agg.cmp = flipped(*op);
            agg.guard = lhs;
            auto op2 = compare_op();
            if (op2) {
                if (neg) c_.fail_at(start, "negated aggregate ranges are not supported");
                AggregateAtom upper_bound = agg;
                upper_bound.cmp = *op2;
                upper_bound.guard = term();
                body.push_back(Literal::of(std::move(agg)));
                body.push_back(Literal::of(std::move(upper_bound)));
                return;
            }
            if (neg) agg.cmp = complement(agg.cmp);
            body.push_back(Literal::of(std::move(agg)));
            return;
        }
        Term rhs = term();
        c_.skip();
        if ((c_.peek() == '+' || c_.peek() == '*') && c_.peek(1) != '(') {
            char opch = c_.get();
            if (*op != CompareOp::Eq) c_.fail_at(start, "arithmetic is only supported as 'C = A + B' or 'C = A * B'");
            if (neg) c_.fail_at(start, "negated arithmetic built-ins are not supported");
            Term rhs2 = term();
            body.push_back(Literal::of(BuiltinAtom{opch == '+' ? BuiltinOp::Plus : BuiltinOp::Times,
                                                   {std::move(rhs), std::move(rhs2), std::move(lhs)}}));
            return;
        }
        CompareOp cmp = neg ? complement(*op) : *op;
        body.push_back(Literal::of(BuiltinAtom{to_builtin(cmp), {std::move(lhs), std::move(rhs)}}));
    }

    void validate() {
        std::vector<Diagnostic> diags;
        auto reserved = [&](const Atom& a) {
            if (a.predicate.rfind(kAuxPrefix, 0) == 0 || a.predicate.rfind(kSeedPrefix, 0) == 0)
                diags.push_back({Diagnostic::Severity::Error, a.span,
                                 "predicate name '" + a.predicate + "' uses a reserved prefix"});
        };
        for (const auto& f : prog_.facts) reserved(f);
        for (const auto& r : prog_.rules) {
            reserved(r.head);
            for (const auto& l : r.body) {
                if (l.is_atom()) reserved(l.atom());
                if (l.is_aggregate())
                    for (const auto& a : l.aggregate().set.conj) reserved(a);
            }
        }
        auto arity = arity_check(prog_);
        diags.insert(diags.end(), arity.begin(), arity.end());
        for (const auto& r : prog_.rules) {
            auto s = safety_check(r, prog_.maxint);
            diags.insert(diags.end(), s.begin(), s.end());
        }
        if (!diags.empty()) throw DiagnosticError(std::move(diags));
    }
};

// ---------------------------------------------------------------------------
// Directive language

class DirectiveParser {
public:
    DirectiveParser(std::string_view text, const std::string& file) : c_(text, file, "--") {}

    DirectiveSet run() {
        if (!kw("USEDB")) c_.fail("directives must start with USEDB");
        out_.working_db = connection();
        if (kw("LIKE")) {
            c_.skip();
            std::string sys = upper(c_.ident());
            static const std::set<std::string> known{"POSTGRES", "ORACLE", "DB2", "SQLSERVER", "MYSQL", "SQLITE"};
            if (!known.count(sys)) c_.fail("unknown system '" + sys + "' after LIKE");
            out_.system_like = sys;
        }
        c_.expect('.');

        enum class Section { Tables, Query, Final } section = Section::Tables;
        while (true) {
            c_.skip();
            if (c_.eof()) break;
            const SourceSpan at = c_.span();
            const bool use = kw("USE");
            if (use || kw("CREATE")) {
                if (section != Section::Tables) c_.fail_at(at, "table definitions must precede QUERY and OUTPUT");
                table_definition(at, use ? TableDefinition::Mode::Use : TableDefinition::Mode::Create);
            } else if (kw("QUERY")) {
                if (section != Section::Tables) c_.fail_at(at, "at most one QUERY, before the output section");
                section = Section::Query;
                query();
            } else if (kw("DBOUTPUT")) {
                section = Section::Final;
                OutputDirective o;
                o.kind = OutputDirective::Kind::DbOutput;
                o.target = connection();
                c_.expect('.');
                out_.outputs.push_back(std::move(o));
            } else if (kw("OUTPUT")) {
                section = Section::Final;
                output();
            } else if (kw("USEDB")) {
                c_.fail_at(at, "at most one USEDB section");
            } else {
                c_.fail("unexpected " + c_.describe_next());
            }
        }
        return std::move(out_);
    }

private:
    Cursor c_;
    DirectiveSet out_;

    // Keyword match is case-insensitive; a keyword must not run into the next word.
    bool kw(std::string_view k) { return c_.keyword(k, true); }

    std::string word(const char* what) {
        c_.skip();
        std::string w = c_.ident();
        if (w.empty()) c_.fail(std::string("expected ") + what + " but found " + c_.describe_next());
        return w;
    }

    ConnectionSpec connection() {
        c_.skip();
        ConnectionSpec spec;
        if (c_.peek() == '"') {
            spec.database = c_.quoted_string();
            spec.quoted = true;
            if (c_.peek() != ':') return spec;
        } else {
            spec.database = word("a database name");
            if (c_.peek() != ':') c_.fail("expected DatabaseName:UserName:Password");
        }
        c_.get();
        spec.user = c_.ident();
        if (c_.peek() != ':') c_.fail("expected DatabaseName:UserName:Password");
        c_.get();
        spec.password = c_.ident();
        return spec;
    }

    std::string raw_sql() {
        c_.expect('(');
        std::string out;
        int depth = 1;
        while (true) {
            if (c_.eof()) c_.fail("unterminated AS ( ... )");
            char ch = c_.get();
            if (ch == '\'' || ch == '"') {
                out += ch;
                while (true) {
                    if (c_.eof()) c_.fail("unterminated quoted text in SQL");
                    char q = c_.get();
                    out += q;
                    if (q == ch) break;
                }
                continue;
            }
            if (ch == '(') ++depth;
            if (ch == ')' && --depth == 0) break;
            out += ch;
        }
        auto first = out.find_first_not_of(" \t\r\n");
        auto last = out.find_last_not_of(" \t\r\n");
        if (first == std::string::npos) c_.fail("empty SQL statement after AS");
        return out.substr(first, last - first + 1);
    }

    SqlType sql_type() {
        std::string t = upper(word("a SQL type"));
        if (t == "INTEGER" || t == "INT") return SqlType::integer();
        if (t != "VARCHAR") c_.fail("unsupported SQL type '" + t + "'; expected integer or varchar(n)");
        if (!c_.accept("(")) return SqlType::varchar();
        c_.skip();
        std::string digits;
        while (is_digit(c_.peek())) digits += c_.get();
        auto n = to_int(digits);
        if (!n || *n < 1 || *n > 1'000'000'000) c_.fail("varchar length must be a positive integer");
        c_.expect(')');
        return SqlType::varchar(static_cast<int>(*n));
    }

    void table_definition(const SourceSpan& at, TableDefinition::Mode mode) {
        TableDefinition t;
        t.span = at;
        t.mode = mode;
        t.table = word("a table name");
        if (c_.accept("(")) {
            do {
                t.attributes.push_back(word("an attribute name"));
            } while (c_.accept(","));
            c_.expect(')');
        }
        if (t.mode == TableDefinition::Mode::Use) {
            if (kw("AS")) t.as_query = raw_sql();
            if (kw("FROM")) t.from = connection();
        } else if (kw("FROM") || kw("AS")) {
            c_.fail_at(at, "CREATE does not accept AS or FROM");
        }
        if (kw("MAPTO")) {
            PredicateMapping m;
            c_.skip();
            if (!is_lower(c_.peek())) c_.fail("expected a predicate name after MAPTO");
            m.predicate = c_.ident();
            if (c_.accept("(")) {
                do {
                    m.types.push_back(sql_type());
                } while (c_.accept(","));
                c_.expect(')');
            }
            if (!t.attributes.empty() && !m.types.empty() && t.attributes.size() != m.types.size())
                c_.fail_at(at, "MAPTO lists " + std::to_string(m.types.size()) + " types for " +
                                   std::to_string(t.attributes.size()) + " attributes");
            t.mapto = std::move(m);
        }
        if (kw("KEEP_AFTER_EXECUTION")) {
            if (t.mode == TableDefinition::Mode::Use) c_.fail_at(at, "KEEP_AFTER_EXECUTION applies to CREATE only");
            t.keep_after_execution = true;
        }
        c_.expect('.');
        for (const auto& other : out_.tables)
            if (other.predicate() == t.predicate())
                c_.fail_at(at, "predicate '" + t.predicate() + "' is mapped more than once");
        out_.tables.push_back(std::move(t));
    }

    Term query_term() {
        c_.skip();
        const char ch = c_.peek();
        if (ch == '"') return Term::string(c_.quoted_string());
        if (is_digit(ch) || ch == '-') {
            std::string digits;
            if (ch == '-') digits += c_.get();
            while (is_digit(c_.peek())) digits += c_.get();
            auto v = to_int(digits);
            if (!v) c_.fail("invalid integer in QUERY");
            return Term::integer(*v);
        }
        std::string w = word("a term");
        if (w == "_") return Term::variable("_" + std::to_string(++anon_));
        if (is_upper(w[0])) return Term::variable(w);
        if (is_lower(w[0])) return Term::string(w);
        c_.fail("invalid term '" + w + "' in QUERY");
    }

    void query() {
        QueryDirective q;
        q.name = word("a table or predicate name");
        if (c_.accept("(")) {
            q.has_args = true;
            do {
                q.args.push_back(query_term());
            } while (c_.accept(","));
            c_.expect(')');
        }
        c_.expect('.');
        out_.query = std::move(q);
    }

    void output() {
        OutputDirective o;
        if (kw("APPEND")) o.write_mode = OutputDirective::WriteMode::Append;
        else if (kw("OVERWRITE")) o.write_mode = OutputDirective::WriteMode::Overwrite;
        o.predicate = word("a predicate name");
        if (kw("AS")) o.alias = word("an alias");
        if (kw("IN")) o.target = connection();
        c_.expect('.');
        out_.outputs.push_back(std::move(o));
    }

    int anon_ = 0;
};

}  // namespace

Program parse_program(std::string_view text, const std::string& file) { return ProgramParser(text, file).run(); }

DirectiveSet parse_directives(std::string_view text, const std::string& file) {
    return DirectiveParser(text, file).run();
}

}  // namespace dlvdb
