#include "dlvdb/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dlvdb {

namespace {

Diagnostic error_at(const SourceSpan& span, std::string msg) {
    return Diagnostic{Diagnostic::Severity::Error, span, std::move(msg)};
}

}  // namespace

std::vector<Diagnostic> arity_check(const Program& program) {
    std::vector<Diagnostic> out;
    std::map<std::string, std::size_t> arity;
    std::set<std::string> reported;
    auto visit = [&](const Atom& a) {
        auto [it, inserted] = arity.emplace(a.predicate, a.arity());
        if (!inserted && it->second != a.arity() && reported.insert(a.predicate).second) {
            out.push_back(error_at(a.span, "predicate '" + a.predicate + "' used with arity " +
                                               std::to_string(it->second) + " and arity " +
                                               std::to_string(a.arity())));
        }
    };
    for (const auto& f : program.facts) visit(f);
    for (const auto& r : program.rules) {
        visit(r.head);
        for (const auto& l : r.body) {
            if (l.is_atom()) visit(l.atom());
            if (l.is_aggregate())
                for (const auto& a : l.aggregate().set.conj) visit(a);
        }
    }
    if (program.query) visit(*program.query);
    return out;
}

BuiltinPlan plan_builtins(const Rule& rule, std::int64_t maxint) {
    BuiltinPlan plan;
    std::set<std::string> bound;
    for (const auto& l : rule.body)
        if (l.is_atom() && !l.negative)
            for (const auto& t : l.atom().args)
                if (t.is_variable()) bound.insert(t.text);

    auto is_bound = [&](const Term& t) { return t.is_constant() || bound.count(t.text) > 0; };

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < rule.body.size(); ++i)
        if (rule.body[i].is_builtin()) pending.push_back(i);

    while (!pending.empty()) {
        bool progressed = false;
        for (auto it = pending.begin(); it != pending.end();) {
            const auto& b = rule.body[*it].builtin();
            const bool all_bound = std::all_of(b.args.begin(), b.args.end(), is_bound);
            if (all_bound) {
                plan.steps.push_back({BuiltinStep::Kind::Check, *it, {}});
            } else if (b.op == BuiltinOp::Eq && (is_bound(b.args[0]) || is_bound(b.args[1]))) {
                const Term& target = is_bound(b.args[0]) ? b.args[1] : b.args[0];
                plan.steps.push_back({BuiltinStep::Kind::Assign, *it, target.text});
                bound.insert(target.text);
            } else if (is_arithmetic(b.op) && is_bound(b.args[0]) && is_bound(b.args[1])) {
                if (maxint <= 0) {
                    plan.errors.push_back(error_at(rule.span, "arithmetic defining variable '" + b.args[2].text +
                                                                  "' requires #maxint > 0"));
                }
                plan.steps.push_back({BuiltinStep::Kind::Assign, *it, b.args[2].text});
                bound.insert(b.args[2].text);
            } else {
                ++it;
                continue;
            }
            it = pending.erase(it);
            progressed = true;
        }
        if (progressed || pending.empty()) continue;

        // Stuck: bound the first unbound built-in variable by the integer range.
        std::string var;
        for (std::size_t idx : pending) {
            for (const auto& t : rule.body[idx].builtin().args)
                if (!is_bound(t)) {
                    var = t.text;
                    break;
                }
            if (!var.empty()) break;
        }
        if (maxint <= 0) {
            plan.errors.push_back(error_at(rule.span, "variable '" + var +
                                                          "' occurs only in built-ins; it is unbound unless "
                                                          "#maxint > 0 bounds it"));
        }
        plan.steps.push_back({BuiltinStep::Kind::Range, 0, var});
        bound.insert(var);
    }
    return plan;
}

std::vector<Diagnostic> safety_check(const Rule& rule, std::int64_t maxint) {
    std::vector<Diagnostic> out;
    const BuiltinPlan plan = plan_builtins(rule, maxint);
    out.insert(out.end(), plan.errors.begin(), plan.errors.end());

    std::set<std::string> bound;
    for (const auto& l : rule.body)
        if (l.is_atom() && !l.negative)
            for (const auto& t : l.atom().args)
                if (t.is_variable()) bound.insert(t.text);
    for (const auto& s : plan.steps)
        if (s.kind != BuiltinStep::Kind::Check) bound.insert(s.variable);

    std::set<std::string> reported;
    auto require = [&](const Term& t, const SourceSpan& span, const std::string& where) {
        if (!t.is_variable() || bound.count(t.text) || !reported.insert(t.text).second) return;
        out.push_back(error_at(span, "unsafe rule: variable '" + t.text + "' in " + where +
                                         " does not occur in a positive body atom"));
    };

    for (const auto& t : rule.head.args) require(t, rule.head.span, "the head");
    for (const auto& l : rule.body) {
        if (l.is_atom() && l.negative) {
            for (const auto& t : l.atom().args)
                if (!t.is_anonymous()) require(t, l.atom().span, "negated atom '" + l.atom().predicate + "'");
        }
        if (l.is_aggregate()) {
            const auto& agg = l.aggregate();
            std::vector<std::string> conj_vars;
            for (const auto& a : agg.set.conj) collect_variables(a, conj_vars);
            for (const auto& v : agg.set.vars) {
                if (!v.is_variable()) {
                    out.push_back(error_at(rule.span, "aggregate set lists constant '" + to_string(v) +
                                                          "'; only variables are allowed"));
                } else if (std::find(conj_vars.begin(), conj_vars.end(), v.text) == conj_vars.end()) {
                    out.push_back(error_at(rule.span, "unsafe rule: variable '" + v.text +
                                                          "' of an aggregate set does not occur in its conjunction"));
                }
            }
            if (agg.guard.is_variable() && !bound.count(agg.guard.text)) {
                out.push_back(error_at(rule.span, "unsafe rule: aggregate guard '" + agg.guard.text +
                                                      "' must be a constant or a variable bound in the body"));
            }
        }
    }
    return out;
}

}  // namespace dlvdb
