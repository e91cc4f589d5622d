#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dlvdb/ast.hpp"

namespace dlvdb::oracle {

using Tuple = std::vector<Value>;
using Relation = std::set<Tuple>;
using Database = std::map<std::string, Relation>;

/// Naive bottom-up evaluation in memory, stratum by stratum. Shares no code
/// with the SQL path: it has its own stratification, join, built-in and
/// aggregate evaluation. Aggregates over an empty set are false. Variables
/// bound only by built-ins range over [0, maxint]; arithmetic results outside
/// that range derive nothing. Throws DiagnosticError for unstratified input.
///
/// `edb` adds facts to those of the program. The result holds every predicate
/// of the program (possibly empty).
Database evaluate(const Program& program, const Database& edb = {});

/// Tuples of `goal`'s predicate matching its constants and repeated variables.
Relation select(const Database& db, const Atom& goal);

}  // namespace dlvdb::oracle
