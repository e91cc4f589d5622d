#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlvdb/directives.hpp"

namespace dlvdb {

/// SQL rendering profile. `NoExcept` replaces EXCEPT by NOT EXISTS.
enum class SqlDialect { Generic, NoExcept };

const char* to_string(SqlDialect d);

/// Predicate <-> table correspondence: argument i is attribute i.
struct RelationBinding {
    enum class Source { Working, External, Generated };

    std::string predicate;
    std::size_t arity = 0;
    std::string table;
    /// One name per argument; arity-0 predicates use the single column `flag`.
    std::vector<std::string> attributes;
    /// nullopt: untyped column (values keep their own type).
    std::vector<std::optional<SqlType>> types;
    Source source = Source::Generated;
    std::optional<ConnectionSpec> connection;  // External
    std::optional<std::string> as_query;       // USE ... AS (SQL)
    bool created = false;  // table created by this run
    bool keep = false;     // KEEP_AFTER_EXECUTION

    bool is_integer(std::size_t i) const { return types.at(i) && types.at(i)->is_integer(); }
    bool is_varchar(std::size_t i) const { return types.at(i) && !types.at(i)->is_integer(); }
};

using BindingMap = std::map<std::string, RelationBinding>;

/// Column name used by tables of arity-0 predicates.
inline constexpr const char* kFlagColumn = "flag";
/// Single-column table holding 0..maxint.
inline constexpr const char* kRangeTable = "dlvdb_range";

std::string delta_table(const std::string& table);       // d_<table>
std::string prev_delta_table(const std::string& table);  // d1_<table>

/// Default attribute names att_1..att_n.
std::vector<std::string> default_attributes(std::size_t arity);

/// Identifier as it must appear in SQL: bare when a plain word that is not a
/// reserved keyword, double-quoted otherwise.
std::string quote_ident(const std::string& name);

/// SQL literal for a value: integers bare, strings single-quoted with '' doubling.
std::string sql_literal(const Value& v);

}  // namespace dlvdb
