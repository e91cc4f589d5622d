#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dlvdb/analysis.hpp"
#include "dlvdb/backend.hpp"
#include "dlvdb/binding.hpp"
#include "dlvdb/directives.hpp"
#include "dlvdb/sql_translator.hpp"
#include "dlvdb/storage.hpp"

namespace dlvdb {

/// Counts observed after one pass of a recursive component.
struct IterationRecord {
    std::size_t component = 0;
    std::size_t pass = 0;                         // 1-based
    std::map<std::string, std::int64_t> delta;    // |D_i| per table after the pass
    std::map<std::string, std::int64_t> size;     // |P_i| per table after P_i := P_i ∪ D1_i
};

/// Accumulated table P_i is the predicate's table; D1_i = d1_<table>, D_i = d_<table>.
struct FixpointState {
    std::size_t component = 0;
    std::vector<std::string> tables;
    std::size_t pass = 0;
    /// D1 was initialised as a copy of P, so the first union is a no-op.
    bool first_pass = true;
    std::map<std::string, std::int64_t> size;
    std::map<std::string, std::int64_t> inserted;  // rows added to P_i by unions
    std::vector<IterationRecord> history;
    /// Invariant violations found in verify mode.
    std::vector<std::string> violations;
};

/// Runs the exit statements once. Returns rows inserted per target table.
std::map<std::string, std::int64_t> eval_nonrecursive(const RulePlan& plan, Backend& backend);

/// Creates the delta tables: D1_i := P_i, D_i := empty.
FixpointState init_recursive(const RulePlan& plan, const BindingMap& bindings, Backend& backend,
                             std::size_t component = 0);

/// One pass of the differential loop. Returns true when every new delta is
/// empty. With `verify`, re-checks delta disjointness and table monotonicity.
bool iterate(FixpointState& state, const RulePlan& plan, const BindingMap& bindings, Backend& backend, bool verify);

struct RunOptions {
    std::optional<SqlDialect> dialect;  // default: LIKE hint, else probe
    std::size_t max_iterations = 1'000'000;
    bool verify = false;
    std::optional<double> timeout_seconds;
    bool keep_tables = false;      // skip dropping generated tables
    bool collect_answers = false;  // fill EvaluationResult::answers
    bool collect_all = false;      // fill EvaluationResult::extensions
    bool optimize = true;          // seed rewrite for bound goals
    std::vector<CsvSource> csv;
    std::string base_dir;          // where unquoted connection names live
};

struct PredicateSize {
    std::string predicate;
    std::string table;
    std::int64_t rows = 0;
    std::size_t component = 0;
};

struct ComponentStats {
    std::vector<std::string> predicates;
    std::size_t passes = 0;
    double millis = 0;
};

using Tuple = std::vector<Value>;

struct EvaluationResult {
    std::vector<PredicateSize> sizes;  // user predicates, program order
    std::vector<ComponentStats> components;
    std::vector<IterationRecord> iterations;
    /// Rows present after staging, and rows added by evaluation, per predicate.
    std::map<std::string, std::int64_t> initial_rows;
    std::map<std::string, std::int64_t> inserted_rows;
    std::map<std::string, double> phase_millis;
    std::optional<Atom> goal;
    bool seed_rewrite = false;
    std::int64_t answer_count = 0;  // rows of the goal (after binding filters)
    std::vector<Tuple> answers;     // sorted; RunOptions::collect_answers
    std::map<std::string, std::set<Tuple>> extensions;  // RunOptions::collect_all
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    SqlDialect dialect = SqlDialect::Generic;

    std::size_t total_passes() const;
    std::int64_t total_delta_rows() const;
    std::string render_text() const;
    /// Tab-separated rows: predicate, size, iterations, millis.
    std::string render_tsv() const;
};

/// The compiled form of a program, before any backend work.
struct CompiledProgram {
    Program program;  // standardized and optimized
    std::optional<Atom> goal;
    bool seed_rewrite = false;
    StratumPlan strata;
};

/// Goal from the directives (QUERY) or the program (`atom?`).
std::optional<Atom> goal_of(const Program& program, const DirectiveSet& directives);

CompiledProgram compile(const Program& program, const DirectiveSet& directives, bool optimize_goal = true);

/// Parses nothing; runs every phase after analysis against `working`.
EvaluationResult run(const Program& program, const DirectiveSet& directives, Backend& working,
                     const RunOptions& options = {});

}  // namespace dlvdb
