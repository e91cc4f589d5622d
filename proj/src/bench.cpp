#include "dlvdb/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "dlvdb/backend.hpp"
#include "dlvdb/executor.hpp"
#include "dlvdb/parser.hpp"

namespace dlvdb::bench {

const char* to_string(Family f) {
    switch (f) {
        case Family::Tree: return "tree";
        case Family::AGraph: return "a-graph";
        case Family::CGraph: return "c-graph";
        case Family::Cylinder: return "cylinder";
    }
    return "?";
}

const char* to_string(Problem p) {
    switch (p) {
        case Problem::Reachability: return "reachability";
        case Problem::ReachabilityLinear: return "reachability-linear";
        case Problem::SameGen: return "samegen";
    }
    return "?";
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::Q0: return "Q0";
        case Regime::Q1: return "Q1";
        case Regime::Q2: return "Q2";
    }
    return "?";
}

std::optional<Family> parse_family(const std::string& s) {
    for (auto f : {Family::Tree, Family::AGraph, Family::CGraph, Family::Cylinder})
        if (s == to_string(f)) return f;
    return std::nullopt;
}

std::optional<Problem> parse_problem(const std::string& s) {
    for (auto p : {Problem::Reachability, Problem::ReachabilityLinear, Problem::SameGen})
        if (s == to_string(p)) return p;
    return std::nullopt;
}

std::optional<Regime> parse_regime(const std::string& s) {
    for (auto r : {Regime::Q0, Regime::Q1, Regime::Q2})
        if (s == to_string(r)) return r;
    return std::nullopt;
}

namespace {

std::vector<std::vector<std::int64_t>> adjacency(std::int64_t nodes, const std::vector<Edge>& edges) {
    std::vector<std::vector<std::int64_t>> adj(nodes + 1);
    for (const auto& [a, b] : edges) adj[a].push_back(b);
    return adj;
}

/// Nodes reachable from `from` by a path of at least one arc.
std::vector<bool> reach_from(const std::vector<std::vector<std::int64_t>>& adj, std::int64_t from) {
    std::vector<bool> seen(adj.size(), false);
    std::deque<std::int64_t> queue{from};
    while (!queue.empty()) {
        auto x = queue.front();
        queue.pop_front();
        for (auto y : adj[x])
            if (!seen[y]) {
                seen[y] = true;
                queue.push_back(y);
            }
    }
    return seen;
}

}  // namespace

GraphInstance gen_tree(int depth) {
    if (depth < 0) throw std::invalid_argument("tree depth must be >= 0");
    GraphInstance g;
    g.family = Family::Tree;
    g.label = "d=" + std::to_string(depth);
    g.nodes = (std::int64_t{1} << (depth + 1)) - 1;
    for (std::int64_t i = 1; 2 * i + 1 <= g.nodes; ++i) {
        g.edges.emplace_back(i, 2 * i);
        g.edges.emplace_back(i, 2 * i + 1);
    }
    choose_bound_nodes(g);
    return g;
}

GraphInstance gen_graph(std::int64_t n, double delta, bool cyclic, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("graph needs at least 2 nodes");
    if (!(delta > 0 && delta <= 1)) throw std::invalid_argument("density must be in (0, 1]");
    const std::int64_t possible = cyclic ? n * (n - 1) : n * (n - 1) / 2;
    const auto m = static_cast<std::int64_t>(std::floor(delta * static_cast<double>(possible) + 1e-9));
    if (m < 1 || (cyclic && m < 2)) throw std::invalid_argument("density too low for a graph of this size");

    GraphInstance g;
    g.family = cyclic ? Family::CGraph : Family::AGraph;
    std::ostringstream label;
    label << "n=" << n << " delta=" << delta;
    g.label = label.str();
    g.nodes = n;

    std::mt19937_64 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    do {
        g.edges.clear();
        // Selection sampling over arcs in lexicographic order.
        std::int64_t seen = 0;
        std::int64_t chosen = 0;
        for (std::int64_t a = 1; a <= n && chosen < m; ++a) {
            for (std::int64_t b = cyclic ? 1 : a + 1; b <= n && chosen < m; ++b) {
                if (a == b) continue;
                if (static_cast<double>(possible - seen) * uniform() < static_cast<double>(m - chosen)) {
                    g.edges.emplace_back(a, b);
                    ++chosen;
                }
                ++seen;
            }
        }
    } while (cyclic && is_acyclic(n, g.edges));
    choose_bound_nodes(g);
    return g;
}

GraphInstance gen_cylinder(std::int64_t w, std::int64_t h) {
    if (w < 2 || h < 2) throw std::invalid_argument("cylinder needs w >= 2 and h >= 2");
    GraphInstance g;
    g.family = Family::Cylinder;
    g.label = "w=" + std::to_string(w) + " h=" + std::to_string(h);
    g.nodes = w * h;
    auto id = [w](std::int64_t i, std::int64_t j) { return i * w + j + 1; };
    for (std::int64_t i = 0; i + 1 < h; ++i)
        for (std::int64_t j = 0; j < w; ++j) {
            g.edges.emplace_back(id(i, j), id(i + 1, j));
            g.edges.emplace_back(id(i, j), id(i + 1, (j + 1) % w));
        }
    choose_bound_nodes(g);
    return g;
}

void choose_bound_nodes(GraphInstance& g, std::int64_t b1) {
    g.b1 = b1;
    const auto adj = adjacency(g.nodes, g.edges);
    std::vector<std::int64_t> dist(g.nodes + 1, -1);
    dist[b1] = 0;
    std::deque<std::int64_t> queue{b1};
    std::int64_t best = -1;
    std::int64_t best_dist = 0;
    while (!queue.empty()) {
        auto x = queue.front();
        queue.pop_front();
        for (auto y : adj[x])
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
                if (dist[y] > best_dist || (dist[y] == best_dist && y < best)) {
                    best = y;
                    best_dist = dist[y];
                }
            }
    }
    g.b2 = best > 0 ? best : (b1 == 1 ? 2 : 1);
}

bool is_acyclic(std::int64_t nodes, const std::vector<Edge>& edges) {
    std::vector<std::int64_t> indegree(nodes + 1, 0);
    for (const auto& e : edges) ++indegree[e.second];
    const auto adj = adjacency(nodes, edges);
    std::vector<std::int64_t> ready;
    for (std::int64_t v = 1; v <= nodes; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    std::int64_t done = 0;
    while (!ready.empty()) {
        auto v = ready.back();
        ready.pop_back();
        ++done;
        for (auto y : adj[v])
            if (--indegree[y] == 0) ready.push_back(y);
    }
    return done == nodes;
}

std::vector<std::string> check_structure(const GraphInstance& g, int depth_or_width, std::int64_t height) {
    std::vector<std::string> problems;
    std::set<Edge> distinct(g.edges.begin(), g.edges.end());
    if (distinct.size() != g.edges.size()) problems.push_back("duplicate arcs");
    std::vector<int> in(g.nodes + 1, 0), out(g.nodes + 1, 0);
    for (const auto& [a, b] : g.edges) {
        if (a < 1 || a > g.nodes || b < 1 || b > g.nodes) problems.push_back("arc endpoint out of range");
        if (a == b) problems.push_back("self loop");
        ++out[a];
        ++in[b];
    }
    switch (g.family) {
        case Family::Tree: {
            const std::int64_t expected = (std::int64_t{2} << depth_or_width) - 2;
            if (static_cast<std::int64_t>(g.edges.size()) != expected) problems.push_back("tree arc count");
            for (std::int64_t v = 1; v <= g.nodes; ++v) {
                if (out[v] != 0 && out[v] != 2) problems.push_back("tree node without two children");
                if (in[v] != (v == 1 ? 0 : 1)) problems.push_back("tree node with wrong parent count");
            }
            break;
        }
        case Family::AGraph:
            if (!is_acyclic(g.nodes, g.edges)) problems.push_back("a-graph has a cycle");
            break;
        case Family::CGraph:
            if (is_acyclic(g.nodes, g.edges)) problems.push_back("c-graph has no cycle");
            break;
        case Family::Cylinder: {
            const std::int64_t w = depth_or_width;
            for (std::int64_t v = 1; v <= g.nodes; ++v) {
                const std::int64_t layer = (v - 1) / w;
                const int want_in = layer == 0 ? 0 : 2;
                const int want_out = layer == height - 1 ? 0 : 2;
                if (in[v] != want_in || out[v] != want_out) problems.push_back("cylinder degree");
            }
            break;
        }
    }
    return problems;
}

// ---------------------------------------------------------------------------

namespace {

const char* kReachNonLinear =
    "reachable(X,Y) :- edge(X,Y).\n"
    "reachable(X,Y) :- reachable(X,Z), reachable(Z,Y).\n";
const char* kReachLinear =
    "reachable(X,Y) :- edge(X,Y).\n"
    "reachable(X,Y) :- reachable(X,Z), edge(Z,Y).\n";
const char* kSameGen =
    "samegen(X,Y) :- parent(P,X), parent(P,Y), X != Y.\n"
    "samegen(X,Y) :- parent(P1,X), parent(P2,Y), samegen(P1,P2).\n";

}  // namespace

Encoding encode(Problem problem, Regime regime, const GraphInstance& g) {
    Encoding e;
    const bool samegen = problem == Problem::SameGen;
    e.goal_predicate = samegen ? "samegen" : "reachable";
    e.program = parse_program(problem == Problem::Reachability ? kReachNonLinear
                              : samegen                         ? kSameGen
                                                                : kReachLinear);
    const std::string edb = samegen ? "parent" : "edge";
    e.program.facts.reserve(g.edges.size());
    for (const auto& [a, b] : g.edges) e.program.facts.push_back(Atom{edb, {Term::integer(a), Term::integer(b)}, {}});

    QueryDirective q;
    q.name = e.goal_predicate;
    q.has_args = true;
    q.args = {regime == Regime::Q0 ? Term::variable("X") : Term::integer(g.b1),
              regime == Regime::Q2 ? Term::integer(g.b2) : Term::variable("Y")};
    e.directives.query = q;
    return e;
}

std::int64_t oracle_count(Problem problem, Regime regime, const GraphInstance& g) {
    const auto adj = adjacency(g.nodes, g.edges);
    if (problem != Problem::SameGen) {
        if (regime != Regime::Q0) {
            const auto seen = reach_from(adj, g.b1);
            if (regime == Regime::Q2) return seen[g.b2] ? 1 : 0;
            return std::count(seen.begin(), seen.end(), true);
        }
        std::int64_t total = 0;
        for (std::int64_t v = 1; v <= g.nodes; ++v) {
            const auto seen = reach_from(adj, v);
            total += std::count(seen.begin(), seen.end(), true);
        }
        return total;
    }

    // samegen: pairs (x,y), x != y with a common parent, closed under
    // "parents are in samegen".
    std::set<Edge> sg;
    std::vector<Edge> frontier;
    for (std::int64_t p = 1; p <= g.nodes; ++p)
        for (auto x : adj[p])
            for (auto y : adj[p])
                if (x != y && sg.emplace(x, y).second) frontier.emplace_back(x, y);
    while (!frontier.empty()) {
        std::vector<Edge> next;
        for (const auto& [p1, p2] : frontier)
            for (auto x : adj[p1])
                for (auto y : adj[p2])
                    if (sg.emplace(x, y).second) next.emplace_back(x, y);
        frontier = std::move(next);
    }
    if (regime == Regime::Q0) return static_cast<std::int64_t>(sg.size());
    std::int64_t n = 0;
    for (const auto& [x, y] : sg)
        if (x == g.b1 && (regime == Regime::Q1 || y == g.b2)) ++n;
    return n;
}

void write_csv(const GraphInstance& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& [a, b] : g.edges) out << a << ',' << b << '\n';
}

GraphInstance make_instance(Family family, double size, double delta, std::uint64_t seed) {
    const auto s = static_cast<std::int64_t>(size);
    switch (family) {
        case Family::Tree: return gen_tree(static_cast<int>(s));
        case Family::AGraph: return gen_graph(s, delta, false, seed);
        case Family::CGraph: return gen_graph(s, delta, true, seed);
        case Family::Cylinder: return gen_cylinder(s, s);
    }
    throw std::invalid_argument("unknown family");
}

std::string ReportRow::oracle_status() const {
    if (!oracle_rows || timed_out) return "-";
    return *oracle_rows == output_rows ? "ok" : "mismatch";
}

std::vector<ReportRow> run_suite(const SuiteSpec& spec) {
    std::vector<ReportRow> rows;
    const std::filesystem::path dir =
        spec.work_dir.empty() ? std::filesystem::temp_directory_path() : std::filesystem::path(spec.work_dir);
    for (double size : spec.sizes) {
        const GraphInstance g = make_instance(spec.family, size, spec.delta, spec.seed);
        const Encoding enc = encode(spec.problem, spec.regime, g);
        ReportRow row;
        row.problem = to_string(spec.problem);
        row.family = to_string(spec.family);
        row.size = g.label;
        row.regime = to_string(spec.regime);
        row.edges = g.edges.size();

        RunOptions options;
        options.timeout_seconds = spec.timeout_seconds;
        options.optimize = spec.optimize;
        options.verify = spec.verify;
        for (int rep = 0; rep < std::max(1, spec.repetitions) && !row.timed_out; ++rep) {
            const auto db = dir / ("dlvdb-bench-" + std::to_string(::getpid()) + ".db");
            std::filesystem::remove(db);
            try {
                SqliteBackend working(db.string());
                const auto start = std::chrono::steady_clock::now();
                const EvaluationResult r = run(enc.program, enc.directives, working, options);
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                row.millis = rep == 0 ? ms : std::min(row.millis, ms);
                row.output_rows = r.answer_count;
                row.iterations = r.total_passes();
                row.violations = r.violations;
            } catch (const TimeoutError&) {
                row.timed_out = true;
                row.millis = spec.timeout_seconds * 1000;
            }
            std::filesystem::remove(db);
        }
        if (!row.timed_out && (spec.oracle_check || g.edges.size() <= kOracleEdgeLimit))
            row.oracle_rows = oracle_count(spec.problem, spec.regime, g);
        rows.push_back(std::move(row));
        if (rows.back().timed_out) break;
    }
    return rows;
}

std::string render_tsv(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "problem\tfamily\tsize\tregime\tedges\tmillis\toutput_rows\titerations\ttimeout\toracle\n";
    for (const auto& r : rows)
        os << r.problem << '\t' << r.family << '\t' << r.size << '\t' << r.regime << '\t' << r.edges << '\t'
           << std::fixed << std::setprecision(1) << r.millis << '\t' << r.output_rows << '\t' << r.iterations << '\t'
           << (r.timed_out ? "yes" : "no") << '\t' << r.oracle_status() << '\n';
    return os.str();
}

std::string render_table(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(20) << "problem" << std::setw(10) << "family" << std::setw(20) << "size"
       << std::setw(7) << "regime" << std::right << std::setw(9) << "edges" << std::setw(12) << "millis"
       << std::setw(12) << "rows" << std::setw(6) << "iter" << "  oracle\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(20) << r.problem << std::setw(10) << r.family << std::setw(20) << r.size
           << std::setw(7) << r.regime << std::right << std::setw(9) << r.edges << std::setw(12);
        if (r.timed_out)
            os << "timeout" << std::setw(12) << "-" << std::setw(6) << "-";
        else
            os << std::fixed << std::setprecision(1) << r.millis << std::setw(12) << r.output_rows << std::setw(6)
               << r.iterations;
        os << "  " << r.oracle_status() << '\n';
    }
    return os.str();
}

}  // namespace dlvdb::bench
