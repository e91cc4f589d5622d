#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlvdb/ast.hpp"
#include "dlvdb/diagnostic.hpp"

namespace dlvdb {

/// Empty when every predicate is used with a single arity.
std::vector<Diagnostic> arity_check(const Program& program);

/// Empty when the rule is safe. `maxint` > 0 enables bounding variables that
/// occur only in built-ins by the range [0, maxint].
std::vector<Diagnostic> safety_check(const Rule& rule, std::int64_t maxint);

/// How the built-ins of a rule bind variables that no positive atom binds.
/// Steps are in evaluation order; every step's inputs are bound by the
/// positive atoms or by an earlier step.
struct BuiltinStep {
    enum class Kind {
        Check,   // every argument bound: a filter
        Assign,  // `X = t` with t bound, or arithmetic defining its result
        Range,   // variable ranges over [0, maxint]
    };
    Kind kind = Kind::Check;
    std::size_t literal = 0;  // body index of the built-in (Check/Assign)
    std::string variable;     // Assign/Range target
};

struct BuiltinPlan {
    std::vector<BuiltinStep> steps;
    std::vector<Diagnostic> errors;
};

BuiltinPlan plan_builtins(const Rule& rule, std::int64_t maxint);

/// Reserved prefixes for generated predicates.
inline constexpr const char* kAuxPrefix = "aux__";
inline constexpr const char* kSeedPrefix = "reached__";

}  // namespace dlvdb
