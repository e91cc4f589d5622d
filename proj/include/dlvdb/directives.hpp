#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dlvdb/ast.hpp"

namespace dlvdb {

/// `DatabaseName:UserName:Password`. User and password may be empty.
struct ConnectionSpec {
    std::string database;
    std::string user;
    std::string password;
    /// The database name was written as a quoted string (a literal path).
    bool quoted = false;

    bool operator==(const ConnectionSpec&) const = default;
};

std::string to_string(const ConnectionSpec& c);

struct SqlType {
    enum class Base { Integer, Varchar };

    Base base = Base::Varchar;
    int length = 255;  // varchar only, >= 1

    static SqlType integer() { return {Base::Integer, 0}; }
    static SqlType varchar(int n = 255) { return {Base::Varchar, n}; }

    bool is_integer() const { return base == Base::Integer; }
    bool operator==(const SqlType&) const = default;
};

std::string to_string(const SqlType& t);

struct PredicateMapping {
    std::string predicate;
    std::vector<SqlType> types;  // empty when not declared

    bool operator==(const PredicateMapping&) const = default;
};

struct TableDefinition {
    enum class Mode { Use, Create };

    Mode mode = Mode::Use;
    std::string table;
    std::vector<std::string> attributes;  // empty when not declared
    std::optional<std::string> as_query;  // USE ... AS ( SQL )
    std::optional<ConnectionSpec> from;   // USE ... FROM db:user:pw
    std::optional<PredicateMapping> mapto;
    bool keep_after_execution = false;    // CREATE only
    SourceSpan span;

    /// Predicate this table is mapped to: the MAPTO target, else the table name.
    const std::string& predicate() const { return mapto ? mapto->predicate : table; }

    bool operator==(const TableDefinition& o) const {
        return mode == o.mode && table == o.table && attributes == o.attributes && as_query == o.as_query &&
               from == o.from && mapto == o.mapto && keep_after_execution == o.keep_after_execution;
    }
};

/// `QUERY TableName.` or the extended `QUERY pred(t1, ..., tn).` naming a goal
/// whose constant arguments bind the query.
struct QueryDirective {
    std::string name;
    std::vector<Term> args;
    bool has_args = false;

    bool operator==(const QueryDirective&) const = default;
};

struct OutputDirective {
    enum class Kind { DbOutput, Output };
    enum class WriteMode { Default, Append, Overwrite };

    Kind kind = Kind::Output;
    WriteMode write_mode = WriteMode::Default;
    std::string predicate;                // OUTPUT only
    std::optional<std::string> alias;     // OUTPUT only
    std::optional<ConnectionSpec> target; // DBOUTPUT: required; OUTPUT: optional

    bool append() const { return write_mode == WriteMode::Append; }
    bool operator==(const OutputDirective&) const = default;
};

struct DirectiveSet {
    ConnectionSpec working_db;
    std::optional<std::string> system_like;  // upper-cased LIKE hint
    std::vector<TableDefinition> tables;
    std::optional<QueryDirective> query;
    std::vector<OutputDirective> outputs;

    bool operator==(const DirectiveSet&) const = default;

    /// Table definition mapped to `predicate`, if any.
    const TableDefinition* definition_for(const std::string& predicate) const;
};

/// Re-parseable directive text.
std::string to_string(const DirectiveSet& d);
std::ostream& operator<<(std::ostream& os, const DirectiveSet& d);

}  // namespace dlvdb
