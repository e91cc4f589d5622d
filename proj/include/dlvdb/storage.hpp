#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dlvdb/ast.hpp"
#include "dlvdb/backend.hpp"
#include "dlvdb/binding.hpp"
#include "dlvdb/directives.hpp"

namespace dlvdb {

/// Facts for `predicate` read from a CSV file: no header, comma-separated,
/// optional double quotes. A quoted field is a string; an unquoted field is an
/// integer when it matches -?[0-9]+, a string otherwise. Empty fields are errors.
struct CsvSource {
    std::string predicate;
    std::string path;
};

/// Calls `row` for every record; throws DiagnosticError on malformed input.
void read_csv(const std::string& path, std::size_t arity, const std::function<void(const std::vector<Value>&)>& row);

/// Writes values in the format read_csv accepts.
std::string csv_field(const Value& v);

/// Resolves every program predicate to a table. Explicit MAPTO mappings win;
/// otherwise a same-named table of matching arity in the working database is
/// used; otherwise a table is created. Throws DiagnosticError.
BindingMap bind_tables(const Program& program, const DirectiveSet& directives, Backend& working);

struct StageReport {
    std::int64_t facts_loaded = 0;  // rows actually added (duplicates excluded)
};

/// Creates generated tables, copies external inputs and AS views into the
/// working database, loads program facts and CSV files. Throws
/// DiagnosticError or BackendError.
StageReport stage_inputs(const Program& program, BindingMap& bindings, Backend& working,
                         const std::vector<CsvSource>& csv, const std::string& base_dir);

/// Creates the table holding 0..maxint.
void stage_range(Backend& working, std::int64_t maxint);

/// Applies OUTPUT / DBOUTPUT. Returns the working-database tables the
/// directives ask to keep.
std::set<std::string> export_outputs(const DirectiveSet& directives, const BindingMap& bindings, Backend& working,
                                     const std::string& base_dir);

/// Drops transient views and tables (aggregate views, deltas) and generated
/// tables without KEEP_AFTER_EXECUTION that are not in `keep`. Best effort:
/// returns the failures instead of throwing.
std::vector<std::string> cleanup(const BindingMap& bindings, Backend& working, const std::vector<std::string>& views,
                                 const std::vector<std::string>& tables, const std::set<std::string>& keep);

/// Column definitions for CREATE TABLE from a binding.
std::string column_definitions(const RelationBinding& b);

}  // namespace dlvdb
