#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlvdb/ast.hpp"

namespace dlvdb {

enum class EdgeLabel { Positive, Negative, Aggregate };

const char* to_string(EdgeLabel l);

/// Edge from a body predicate to the head predicate of a rule.
struct DependencyEdge {
    std::string from;
    std::string to;
    EdgeLabel label = EdgeLabel::Positive;

    bool operator==(const DependencyEdge&) const = default;
};

struct DependencyGraph {
    std::vector<std::string> nodes;  // first-appearance order
    std::vector<DependencyEdge> edges;  // deduplicated, insertion order

    bool has_edge(const std::string& from, const std::string& to, EdgeLabel label) const;
};

DependencyGraph build_dependency_graph(const Program& program);

struct Component {
    std::vector<std::string> predicates;
    std::vector<Rule> exit_rules;       // define a component predicate, mention none in the body
    std::vector<Rule> recursive_rules;  // mention a component predicate in the body

    bool contains(const std::string& predicate) const;
    bool is_recursive() const { return !recursive_rules.empty(); }
};

/// Components in evaluation order.
struct StratumPlan {
    std::vector<Component> components;

    /// Index of the component holding `predicate`, or npos.
    std::size_t component_of(const std::string& predicate) const;
    /// Level of each predicate: its component index plus one.
    std::map<std::string, int> levels() const;
};

/// SCCs in topological order (ties by first appearance). Throws DiagnosticError
/// with a cycle witness when a negative or aggregate edge lies inside an SCC.
StratumPlan stratify(const Program& program, const DependencyGraph& graph);
StratumPlan stratify(const Program& program);

/// One line per component, in evaluation order.
std::string dump_plan(const StratumPlan& plan);

/// Number of positive body occurrences of component predicates.
std::size_t recursive_occurrences(const Rule& rule, const Component& component);

/// Replaces every aggregate whose set is not already a single atom over exactly
/// the needed variables by an atom of a fresh `aux__<head>__<n>` predicate,
/// defined by a new rule placed before the rewritten one.
Program standardize_aggregates(const Program& program);

/// Specializes a linear-recursive goal predicate to the bound arguments the
/// recursion carries unchanged, computing only the tuples reachable from the
/// bound constants into `reached__<goal>`. Returns the program unchanged when
/// the goal is unbound or the rewrite does not apply.
Program optimize(const Program& program, const std::optional<Atom>& goal);

/// True when optimize() would rewrite the program for `goal`.
bool seed_rewrite_applies(const Program& program, const Atom& goal);

}  // namespace dlvdb
