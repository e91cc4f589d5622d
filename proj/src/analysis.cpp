#include "dlvdb/analysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

#include "dlvdb/validate.hpp"

namespace dlvdb {

const char* to_string(EdgeLabel l) {
    switch (l) {
        case EdgeLabel::Positive: return "positive";
        case EdgeLabel::Negative: return "negative";
        case EdgeLabel::Aggregate: return "aggregate";
    }
    return "?";
}

bool DependencyGraph::has_edge(const std::string& from, const std::string& to, EdgeLabel label) const {
    return std::find(edges.begin(), edges.end(), DependencyEdge{from, to, label}) != edges.end();
}

DependencyGraph build_dependency_graph(const Program& program) {
    DependencyGraph g;
    g.nodes = program.predicates();
    auto add = [&](const std::string& from, const std::string& to, EdgeLabel label) {
        if (!g.has_edge(from, to, label)) g.edges.push_back({from, to, label});
    };
    for (const auto& r : program.rules) {
        for (const auto& l : r.body) {
            if (l.is_atom()) {
                add(l.atom().predicate, r.head.predicate, l.negative ? EdgeLabel::Negative : EdgeLabel::Positive);
            } else if (l.is_aggregate()) {
                for (const auto& a : l.aggregate().set.conj) add(a.predicate, r.head.predicate, EdgeLabel::Aggregate);
            }
        }
    }
    return g;
}

bool Component::contains(const std::string& predicate) const {
    return std::find(predicates.begin(), predicates.end(), predicate) != predicates.end();
}

std::size_t StratumPlan::component_of(const std::string& predicate) const {
    for (std::size_t i = 0; i < components.size(); ++i)
        if (components[i].contains(predicate)) return i;
    return std::string::npos;
}

std::map<std::string, int> StratumPlan::levels() const {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < components.size(); ++i)
        for (const auto& p : components[i].predicates) out[p] = static_cast<int>(i) + 1;
    return out;
}

namespace {

bool mentions_any(const Rule& r, const Component& c) {
    for (const auto& l : r.body) {
        if (l.is_atom() && c.contains(l.atom().predicate)) return true;
        if (l.is_aggregate())
            for (const auto& a : l.aggregate().set.conj)
                if (c.contains(a.predicate)) return true;
    }
    return false;
}

}  // namespace

std::size_t recursive_occurrences(const Rule& rule, const Component& component) {
    std::size_t n = 0;
    for (const auto& l : rule.body)
        if (l.is_atom() && !l.negative && component.contains(l.atom().predicate)) ++n;
    return n;
}

StratumPlan stratify(const Program& program, const DependencyGraph& graph) {
    const std::size_t n = graph.nodes.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[graph.nodes[i]] = i;
    std::vector<std::vector<std::size_t>> succ(n);
    for (const auto& e : graph.edges) succ[index.at(e.from)].push_back(index.at(e.to));

    // Tarjan
    std::vector<int> order(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::size_t> comp_of(n, 0);
    std::vector<std::vector<std::size_t>> sccs;
    int counter = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        order[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w : succ[v]) {
            if (order[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], order[w]);
            }
        }
        if (low[v] == order[v]) {
            std::vector<std::size_t> scc;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp_of[w] = sccs.size();
                scc.push_back(w);
            } while (w != v);
            std::sort(scc.begin(), scc.end());
            sccs.push_back(std::move(scc));
        }
    };
    for (std::size_t v = 0; v < n; ++v)
        if (order[v] < 0) visit(v);

    // Stratification: no negative/aggregate edge inside an SCC.
    std::vector<Diagnostic> diags;
    for (const auto& e : graph.edges) {
        if (e.label == EdgeLabel::Positive) continue;
        const std::size_t u = index.at(e.from), v = index.at(e.to);
        if (comp_of[u] != comp_of[v]) continue;
        // Path v -> ... -> u inside the SCC closes the cycle.
        std::vector<std::size_t> parent(n, n);
        std::deque<std::size_t> queue{v};
        parent[v] = v;
        while (!queue.empty() && parent[u] == n) {
            std::size_t x = queue.front();
            queue.pop_front();
            for (std::size_t y : succ[x])
                if (comp_of[y] == comp_of[v] && parent[y] == n) {
                    parent[y] = x;
                    queue.push_back(y);
                }
        }
        std::vector<std::size_t> path;
        for (std::size_t x = u; x != v; x = parent[x]) path.push_back(x);
        path.push_back(v);
        std::reverse(path.begin(), path.end());  // v ... u
        std::string cycle = e.from + " -" + to_string(e.label) + "-> " + e.to;
        if (u != v)
            for (std::size_t i = 1; i < path.size(); ++i) cycle += " -> " + graph.nodes[path[i]];
        diags.push_back({Diagnostic::Severity::Error, SourceSpan{},
                         std::string("program is not stratified: recursion through ") +
                             (e.label == EdgeLabel::Negative ? "negation" : "an aggregate") + " in cycle " + cycle});
    }
    if (!diags.empty()) throw DiagnosticError(std::move(diags));

    // Kahn over the condensation; ties by smallest first-appearance index.
    const std::size_t m = sccs.size();
    std::vector<std::set<std::size_t>> dag(m);
    std::vector<std::size_t> indegree(m, 0);
    for (const auto& e : graph.edges) {
        std::size_t a = comp_of[index.at(e.from)], b = comp_of[index.at(e.to)];
        if (a != b && dag[a].insert(b).second) ++indegree[b];
    }
    auto key = [&](std::size_t c) { return sccs[c].front(); };
    auto cmp = [&](std::size_t a, std::size_t b) { return key(a) > key(b); };
    std::vector<std::size_t> ready;
    for (std::size_t c = 0; c < m; ++c)
        if (indegree[c] == 0) ready.push_back(c);

    StratumPlan plan;
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), cmp);
        std::size_t c = ready.back();
        ready.pop_back();
        Component comp;
        for (std::size_t v : sccs[c]) comp.predicates.push_back(graph.nodes[v]);
        plan.components.push_back(std::move(comp));
        for (std::size_t d : dag[c])
            if (--indegree[d] == 0) ready.push_back(d);
    }

    for (const auto& r : program.rules) {
        Component& comp = plan.components[plan.component_of(r.head.predicate)];
        (mentions_any(r, comp) ? comp.recursive_rules : comp.exit_rules).push_back(r);
    }
    return plan;
}

StratumPlan stratify(const Program& program) { return stratify(program, build_dependency_graph(program)); }

std::string dump_plan(const StratumPlan& plan) {
    std::ostringstream os;
    for (std::size_t i = 0; i < plan.components.size(); ++i) {
        const auto& c = plan.components[i];
        os << i + 1 << ": {";
        for (std::size_t j = 0; j < c.predicates.size(); ++j) os << (j ? ", " : "") << c.predicates[j];
        os << "} exit=" << c.exit_rules.size() << " recursive=" << c.recursive_rules.size() << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Aggregate standardization

Program standardize_aggregates(const Program& program) {
    const StratumPlan plan = stratify(program);
    Program out = program;
    out.rules.clear();
    std::map<std::string, int> counter;

    for (const auto& rule : program.rules) {
        const std::size_t head_comp = plan.component_of(rule.head.predicate);
        Rule rewritten = rule;
        std::vector<Rule> aux_rules;

        for (std::size_t li = 0; li < rewritten.body.size(); ++li) {
            if (!rewritten.body[li].is_aggregate()) continue;
            AggregateAtom& agg = rewritten.body[li].aggregate();

            // Variables visible outside this aggregate.
            std::vector<std::string> outside;
            collect_variables(rule.head, outside);
            for (std::size_t lj = 0; lj < rule.body.size(); ++lj) {
                const Literal& l = rule.body[lj];
                if (lj == li) continue;
                if (l.is_aggregate()) collect_variables(std::vector<Term>{l.aggregate().guard}, outside);
                else collect_variables(l, outside);
            }
            collect_variables(std::vector<Term>{agg.guard}, outside);

            std::vector<std::string> conj_vars;
            for (const auto& a : agg.set.conj) collect_variables(a, conj_vars);
            std::vector<std::string> needed;
            collect_variables(agg.set.vars, needed);
            std::vector<std::string> shared;
            for (const auto& v : conj_vars)
                if (std::find(outside.begin(), outside.end(), v) != outside.end()) {
                    shared.push_back(v);
                    if (std::find(needed.begin(), needed.end(), v) == needed.end()) needed.push_back(v);
                }

            if (agg.set.conj.size() == 1) {
                const Atom& only = agg.set.conj.front();
                std::vector<std::string> args;
                bool distinct_vars = true;
                for (const auto& t : only.args) {
                    if (!t.is_variable() || std::find(args.begin(), args.end(), t.text) != args.end())
                        distinct_vars = false;
                    else
                        args.push_back(t.text);
                }
                if (distinct_vars && std::set<std::string>(args.begin(), args.end()) ==
                                         std::set<std::string>(needed.begin(), needed.end()))
                    continue;
            }

            Atom aux;
            aux.predicate = std::string(kAuxPrefix) + rule.head.predicate + "__" +
                            std::to_string(++counter[rule.head.predicate]);
            aux.span = rule.span;
            for (const auto& v : needed) aux.args.push_back(Term::variable(v));

            Rule def{aux, {}, rule.span};
            for (const auto& a : agg.set.conj) def.body.push_back(Literal::positive(a));
            // Binding atoms: positive body atoms from strictly lower components that share a variable.
            for (const auto& l : rule.body) {
                if (!l.is_atom() || l.negative) continue;
                const Atom& a = l.atom();
                if (plan.component_of(a.predicate) >= head_comp) continue;
                bool shares = std::any_of(a.args.begin(), a.args.end(), [&](const Term& t) {
                    return t.is_variable() && std::find(shared.begin(), shared.end(), t.text) != shared.end();
                });
                if (shares) def.body.push_back(l);
            }
            aux_rules.push_back(std::move(def));
            agg.set.conj = {aux};
        }
        for (auto& r : aux_rules) out.rules.push_back(std::move(r));
        out.rules.push_back(std::move(rewritten));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Seed rewrite

namespace {

struct SeedAnalysis {
    std::string predicate;
    std::vector<std::size_t> invariant;  // bound positions carried unchanged by every recursive rule
};

std::optional<SeedAnalysis> analyse_seed(const Program& program, const Atom& goal) {
    if (!std::any_of(goal.args.begin(), goal.args.end(), [](const Term& t) { return t.is_constant(); }))
        return std::nullopt;
    StratumPlan plan;
    try {
        plan = stratify(program);
    } catch (const DiagnosticError&) {
        return std::nullopt;
    }
    const std::size_t ci = plan.component_of(goal.predicate);
    if (ci == std::string::npos) return std::nullopt;
    const Component& comp = plan.components[ci];
    if (comp.predicates.size() != 1 || !comp.is_recursive()) return std::nullopt;
    for (const auto& f : program.facts)
        if (f.predicate == goal.predicate) return std::nullopt;

    // No other rule may consume the goal predicate.
    for (const auto& r : program.rules) {
        if (r.head.predicate == goal.predicate) continue;
        for (const auto& l : r.body) {
            if (l.is_atom() && l.atom().predicate == goal.predicate) return std::nullopt;
            if (l.is_aggregate())
                for (const auto& a : l.aggregate().set.conj)
                    if (a.predicate == goal.predicate) return std::nullopt;
        }
    }

    SeedAnalysis out{goal.predicate, {}};
    for (std::size_t i = 0; i < goal.args.size(); ++i) {
        if (!goal.args[i].is_constant()) continue;
        bool invariant = true;
        for (const auto& r : comp.recursive_rules) {
            if (recursive_occurrences(r, comp) != 1) return std::nullopt;
            const Term& h = r.head.args[i];
            if (!h.is_variable()) {
                invariant = false;
                break;
            }
            for (const auto& l : r.body)
                if (l.is_atom() && l.atom().predicate == goal.predicate && !(l.atom().args[i] == h)) invariant = false;
        }
        if (invariant) out.invariant.push_back(i);
    }
    if (out.invariant.empty()) return std::nullopt;
    return out;
}

Term substitute(const Term& t, const std::map<std::string, Term>& sub) {
    if (!t.is_variable()) return t;
    auto it = sub.find(t.text);
    return it == sub.end() ? t : it->second;
}

Atom substitute(const Atom& a, const std::map<std::string, Term>& sub) {
    Atom out = a;
    for (auto& t : out.args) t = substitute(t, sub);
    return out;
}

Literal substitute(const Literal& l, const std::map<std::string, Term>& sub) {
    Literal out = l;
    if (out.is_atom()) {
        out.atom() = substitute(out.atom(), sub);
    } else if (out.is_builtin()) {
        for (auto& t : out.builtin().args) t = substitute(t, sub);
    } else {
        auto& agg = out.aggregate();
        for (auto& a : agg.set.conj) a = substitute(a, sub);
        agg.guard = substitute(agg.guard, sub);
    }
    return out;
}

}  // namespace

bool seed_rewrite_applies(const Program& program, const Atom& goal) { return analyse_seed(program, goal).has_value(); }

Program optimize(const Program& program, const std::optional<Atom>& goal) {
    if (!goal) return program;
    auto seed = analyse_seed(program, *goal);
    if (!seed) return program;
    const auto& inv = seed->invariant;
    const std::string reached = std::string(kSeedPrefix) + seed->predicate;
    auto is_inv = [&](std::size_t i) { return std::find(inv.begin(), inv.end(), i) != inv.end(); };
    auto project = [&](const Atom& a) {
        Atom r{reached, {}, a.span};
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!is_inv(i)) r.args.push_back(a.args[i]);
        return r;
    };

    Program out = program;
    out.rules.clear();
    std::optional<Rule> final_rule;
    for (const auto& r : program.rules) {
        if (r.head.predicate != seed->predicate) {
            out.rules.push_back(r);
            continue;
        }
        std::map<std::string, Term> sub;
        bool feasible = true;
        for (std::size_t i : inv) {
            const Term& h = r.head.args[i];
            const Term& c = goal->args[i];
            if (h.is_variable()) {
                auto [it, inserted] = sub.emplace(h.text, c);
                if (!inserted && !(it->second == c)) feasible = false;
            } else if (!(h == c)) {
                feasible = false;
            }
        }
        if (feasible) {
            Rule s{project(substitute(r.head, sub)), {}, r.span};
            for (const auto& l : r.body) {
                Literal sl = substitute(l, sub);
                if (sl.is_atom() && sl.atom().predicate == seed->predicate) sl.atom() = project(sl.atom());
                s.body.push_back(std::move(sl));
            }
            out.rules.push_back(std::move(s));
        }
        if (!final_rule) {
            // goal(c..., X...) :- reached__goal(X...), with non-invariant constants kept as filters.
            Atom head = *goal;
            Atom body{reached, {}, goal->span};
            int fresh = 0;
            for (std::size_t i = 0; i < goal->args.size(); ++i) {
                if (is_inv(i)) continue;
                Term t = goal->args[i];
                if (t.is_variable() && t.is_anonymous()) t = Term::variable("V_" + std::to_string(++fresh));
                if (t.is_variable()) head.args[i] = t;
                body.args.push_back(t);
            }
            // Repeated variables in the goal act as equality filters through the shared variable.
            final_rule = Rule{head, {Literal::positive(body)}, goal->span};
        }
    }
    out.rules.push_back(*final_rule);
    return out;
}

}  // namespace dlvdb
