#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dlvdb/ast.hpp"
#include "dlvdb/directives.hpp"

namespace dlvdb::bench {

enum class Family { Tree, AGraph, CGraph, Cylinder };
enum class Problem { Reachability, ReachabilityLinear, SameGen };
enum class Regime { Q0, Q1, Q2 };

const char* to_string(Family f);
const char* to_string(Problem p);
const char* to_string(Regime r);
std::optional<Family> parse_family(const std::string& s);
std::optional<Problem> parse_problem(const std::string& s);
std::optional<Regime> parse_regime(const std::string& s);

using Edge = std::pair<std::int64_t, std::int64_t>;

struct GraphInstance {
    Family family = Family::Tree;
    std::string label;  // e.g. "d=7", "n=50 delta=0.2", "w=8 h=8"
    std::int64_t nodes = 0;  // ids are 1..nodes
    std::vector<Edge> edges;
    std::int64_t b1 = 1;
    std::int64_t b2 = 1;
};

/// Full binary tree of depth d, heap numbering: node i has children 2i, 2i+1.
GraphInstance gen_tree(int depth);

/// floor(delta * possible) distinct arcs chosen uniformly (selection
/// sampling). Acyclic graphs only have arcs from lower to higher ids, so
/// possible = n(n-1)/2; cyclic graphs allow every arc, possible = n(n-1), and
/// are redrawn until a cycle exists. Throws std::invalid_argument.
GraphInstance gen_graph(std::int64_t n, double delta, bool cyclic, std::uint64_t seed);

/// Layers 0..h-1 of w nodes; (i,j) -> (i+1,j) and (i+1,(j+1) mod w).
GraphInstance gen_cylinder(std::int64_t w, std::int64_t h);

/// b2: node reachable from b1 at maximal BFS distance, smallest id on ties.
/// Falls back to the smallest id other than b1 when nothing is reachable.
void choose_bound_nodes(GraphInstance& g, std::int64_t b1 = 1);

/// Structural checks of the family; returns a description of each failure.
std::vector<std::string> check_structure(const GraphInstance& g, int depth_or_width = 0, std::int64_t height = 0);

bool is_acyclic(std::int64_t nodes, const std::vector<Edge>& edges);

struct Encoding {
    Program program;
    DirectiveSet directives;
    std::string goal_predicate;
};

/// Reachability reads `edge/2`, same-generation reads `parent/2` (parent
/// first). The rules do not depend on the regime; Q1 binds b1 and Q2 binds
/// b1 and b2 through the QUERY directive.
Encoding encode(Problem problem, Regime regime, const GraphInstance& g);

/// Goal rows computed directly on the graph (BFS, or a pairwise fixpoint for
/// same-generation).
std::int64_t oracle_count(Problem problem, Regime regime, const GraphInstance& g);

/// Writes the instance's facts as CSV (one arc per line).
void write_csv(const GraphInstance& g, const std::string& path);

struct SuiteSpec {
    Problem problem = Problem::Reachability;
    Family family = Family::Tree;
    Regime regime = Regime::Q0;
    std::vector<double> sizes;  // depth, node count, or width (= height)
    double delta = 0.2;
    double timeout_seconds = 300;
    std::uint64_t seed = 1;
    int repetitions = 1;
    bool oracle_check = false;  // always check; otherwise only up to kOracleEdgeLimit
    bool optimize = true;
    bool verify = false;
    std::string work_dir;  // empty: the system temp directory
};

inline constexpr std::size_t kOracleEdgeLimit = 2000;

struct ReportRow {
    std::string problem;
    std::string family;
    std::string size;
    std::string regime;
    std::size_t edges = 0;
    double millis = 0;  // best of the repetitions
    std::int64_t output_rows = 0;
    std::size_t iterations = 0;
    bool timed_out = false;
    std::optional<std::int64_t> oracle_rows;
    std::vector<std::string> violations;

    /// "ok", "mismatch", or "-" when not checked.
    std::string oracle_status() const;
};

/// Instances run in order; a timeout ends the ladder.
std::vector<ReportRow> run_suite(const SuiteSpec& spec);

GraphInstance make_instance(Family family, double size, double delta, std::uint64_t seed);

std::string render_tsv(const std::vector<ReportRow>& rows);
std::string render_table(const std::vector<ReportRow>& rows);

}  // namespace dlvdb::bench
