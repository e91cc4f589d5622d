#include "dlvdb/naive_eval.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <unordered_map>

namespace dlvdb::oracle {

namespace {

struct Slot {
    bool is_var = false;
    bool wildcard = false;  // anonymous variable in a negated atom
    int var = -1;
    Value constant;
};

struct CAtom {
    std::string predicate;
    std::vector<Slot> slots;
};

struct CBuiltin {
    BuiltinOp op;
    std::vector<Slot> slots;
};

struct CAggregate {
    AggregateFunction func;
    std::vector<int> set_vars;
    std::vector<CAtom> conj;
    CompareOp cmp;
    Slot guard;
};

struct CRule {
    std::vector<Slot> head;
    std::string head_predicate;
    std::vector<CAtom> positive;
    std::vector<CAtom> negative;
    std::vector<CBuiltin> builtins;
    std::vector<CAggregate> aggregates;
    std::size_t var_count = 0;
};

using Subst = std::vector<std::optional<Value>>;

CRule compile_rule(const Rule& r) {
    CRule c;
    std::map<std::string, int> vars;
    auto slot = [&](const Term& t) {
        Slot s;
        if (t.is_constant()) {
            s.constant = t.value();
            return s;
        }
        s.is_var = true;
        auto [it, _] = vars.emplace(t.text, static_cast<int>(vars.size()));
        s.var = it->second;
        return s;
    };
    auto catom = [&](const Atom& a) {
        CAtom ca{a.predicate, {}};
        for (const auto& t : a.args) ca.slots.push_back(slot(t));
        return ca;
    };
    c.head_predicate = r.head.predicate;
    for (const auto& t : r.head.args) c.head.push_back(slot(t));
    for (const auto& l : r.body) {
        if (l.is_atom()) {
            CAtom a = catom(l.atom());
            if (l.negative) {
                for (std::size_t i = 0; i < a.slots.size(); ++i)
                    if (l.atom().args[i].is_anonymous()) a.slots[i].wildcard = true;
                c.negative.push_back(std::move(a));
            } else {
                c.positive.push_back(std::move(a));
            }
        } else if (l.is_builtin()) {
            CBuiltin b{l.builtin().op, {}};
            for (const auto& t : l.builtin().args) b.slots.push_back(slot(t));
            c.builtins.push_back(std::move(b));
        } else {
            const auto& agg = l.aggregate();
            CAggregate ca{agg.func, {}, {}, agg.cmp, slot(agg.guard)};
            for (const auto& v : agg.set.vars) ca.set_vars.push_back(slot(v).var);
            for (const auto& a : agg.set.conj) ca.conj.push_back(catom(a));
            c.aggregates.push_back(std::move(ca));
        }
    }
    c.var_count = vars.size();
    return c;
}

struct TupleHash {
    std::size_t operator()(const Tuple& t) const {
        std::size_t h = 1469598103934665603ULL;
        for (const auto& v : t) {
            std::size_t x = std::holds_alternative<std::int64_t>(v)
                                ? std::hash<std::int64_t>{}(std::get<std::int64_t>(v))
                                : std::hash<std::string>{}(std::get<std::string>(v)) * 31 + 7;
            h = (h ^ x) * 1099511628211ULL;
        }
        return h;
    }
};

using Index = std::unordered_map<Tuple, std::vector<const Tuple*>, TupleHash>;

class Engine {
public:
    Engine(const Database& db, std::int64_t maxint) : db_(db), maxint_(maxint) {}

    void derive(const CRule& rule, const std::function<void(const Tuple&)>& emit) {
        Subst s(rule.var_count);
        join(rule.positive, s, [&](Subst& bound) {
            std::vector<std::size_t> pending(rule.builtins.size());
            for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = i;
            builtins(rule, pending, bound, [&](const Subst& full) {
                for (const auto& n : rule.negative)
                    if (matches_any(n, full)) return;
                for (const auto& a : rule.aggregates)
                    if (!aggregate_holds(a, full)) return;
                Tuple head;
                for (const auto& sl : rule.head) head.push_back(sl.is_var ? *full[sl.var] : sl.constant);
                emit(head);
            });
        });
    }

private:
    const Database& db_;
    std::int64_t maxint_;
    std::map<std::pair<std::string, std::uint64_t>, Index> indexes_;
    static const Relation empty_;

    const Relation& relation(const std::string& p) const {
        auto it = db_.find(p);
        return it == db_.end() ? empty_ : it->second;
    }

    const Index& index(const std::string& p, std::uint64_t mask, const std::vector<std::size_t>& positions) {
        auto key = std::make_pair(p, mask);
        auto it = indexes_.find(key);
        if (it != indexes_.end()) return it->second;
        Index idx;
        for (const auto& t : relation(p)) {
            Tuple k;
            for (std::size_t i : positions) k.push_back(t[i]);
            idx[k].push_back(&t);
        }
        return indexes_.emplace(key, std::move(idx)).first->second;
    }

    static bool bound(const Slot& sl, const Subst& s) { return !sl.is_var || s[sl.var].has_value(); }
    static const Value& value(const Slot& sl, const Subst& s) { return sl.is_var ? *s[sl.var] : sl.constant; }

    void join(const std::vector<CAtom>& atoms, Subst& s, const std::function<void(Subst&)>& k) {
        std::vector<bool> used(atoms.size(), false);
        join_rec(atoms, used, atoms.size(), s, k);
    }

    void join_rec(const std::vector<CAtom>& atoms, std::vector<bool>& used, std::size_t left, Subst& s,
                  const std::function<void(Subst&)>& k) {
        if (left == 0) {
            k(s);
            return;
        }
        // Greedy: the atom with the most bound arguments.
        std::size_t best = atoms.size();
        std::size_t best_bound = 0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (used[i]) continue;
            std::size_t b = 0;
            for (const auto& sl : atoms[i].slots) b += bound(sl, s);
            if (best == atoms.size() || b > best_bound) {
                best = i;
                best_bound = b;
            }
        }
        const CAtom& a = atoms[best];
        std::vector<std::size_t> positions;
        std::uint64_t mask = 0;
        Tuple key;
        for (std::size_t i = 0; i < a.slots.size(); ++i)
            if (bound(a.slots[i], s)) {
                positions.push_back(i);
                mask |= std::uint64_t{1} << i;
                key.push_back(value(a.slots[i], s));
            }
        const Index& idx = index(a.predicate, mask, positions);
        auto it = idx.find(key);
        if (it == idx.end()) return;
        used[best] = true;
        for (const Tuple* t : it->second) {
            std::vector<int> assigned;
            bool ok = true;
            for (std::size_t i = 0; i < a.slots.size() && ok; ++i) {
                const Slot& sl = a.slots[i];
                if (!sl.is_var) continue;
                if (s[sl.var]) {
                    ok = *s[sl.var] == (*t)[i];
                } else {
                    s[sl.var] = (*t)[i];
                    assigned.push_back(sl.var);
                }
            }
            if (ok) join_rec(atoms, used, left - 1, s, k);
            for (int v : assigned) s[v].reset();
        }
        used[best] = false;
    }

    static bool compare(const Value& a, CompareOp op, const Value& b) {
        switch (op) {
            case CompareOp::Eq: return a == b;
            case CompareOp::Ne: return a != b;
            case CompareOp::Lt: return a < b;
            case CompareOp::Le: return a <= b;
            case CompareOp::Gt: return a > b;
            case CompareOp::Ge: return a >= b;
        }
        return false;
    }

    static std::optional<std::int64_t> arith(BuiltinOp op, const Value& a, const Value& b) {
        const auto* x = std::get_if<std::int64_t>(&a);
        const auto* y = std::get_if<std::int64_t>(&b);
        if (!x || !y) return std::nullopt;
        return op == BuiltinOp::Plus ? *x + *y : *x * *y;
    }

    void builtins(const CRule& rule, std::vector<std::size_t> pending, Subst s,
                  const std::function<void(const Subst&)>& k) {
        while (!pending.empty()) {
            bool progress = false;
            for (auto it = pending.begin(); it != pending.end();) {
                const CBuiltin& b = rule.builtins[*it];
                const bool all = std::all_of(b.slots.begin(), b.slots.end(), [&](const Slot& sl) { return bound(sl, s); });
                if (all) {
                    if (is_arithmetic(b.op)) {
                        auto r = arith(b.op, value(b.slots[0], s), value(b.slots[1], s));
                        if (!r || Value(*r) != value(b.slots[2], s)) return;
                    } else if (!compare(value(b.slots[0], s), to_compare(b.op), value(b.slots[1], s))) {
                        return;
                    }
                } else if (b.op == BuiltinOp::Eq && (bound(b.slots[0], s) || bound(b.slots[1], s))) {
                    const bool left = bound(b.slots[0], s);
                    s[(left ? b.slots[1] : b.slots[0]).var] = value(left ? b.slots[0] : b.slots[1], s);
                } else if (is_arithmetic(b.op) && bound(b.slots[0], s) && bound(b.slots[1], s)) {
                    auto r = arith(b.op, value(b.slots[0], s), value(b.slots[1], s));
                    if (!r || *r < 0 || *r > maxint_) return;
                    s[b.slots[2].var] = *r;
                } else {
                    ++it;
                    continue;
                }
                it = pending.erase(it);
                progress = true;
            }
            if (progress) continue;
            if (pending.empty()) break;
            // Nothing determined: enumerate the first unbound variable over [0, maxint].
            int var = -1;
            for (std::size_t i : pending) {
                for (const auto& sl : rule.builtins[i].slots)
                    if (!bound(sl, s)) {
                        var = sl.var;
                        break;
                    }
                if (var >= 0) break;
            }
            for (std::int64_t v = 0; v <= maxint_; ++v) {
                Subst next = s;
                next[var] = v;
                builtins(rule, pending, next, k);
            }
            return;
        }
        k(s);
    }

    bool matches_any(const CAtom& a, const Subst& s) {
        std::vector<std::size_t> positions;
        std::uint64_t mask = 0;
        Tuple key;
        for (std::size_t i = 0; i < a.slots.size(); ++i) {
            if (a.slots[i].wildcard) continue;
            positions.push_back(i);
            mask |= std::uint64_t{1} << i;
            key.push_back(value(a.slots[i], s));
        }
        const Index& idx = index(a.predicate, mask, positions);
        return idx.count(key) > 0;
    }

    bool aggregate_holds(const CAggregate& a, const Subst& s) {
        std::set<Tuple> set;
        Subst local = s;
        join(a.conj, local, [&](Subst& full) {
            Tuple t;
            for (int v : a.set_vars) t.push_back(*full[v]);
            set.insert(std::move(t));
        });
        if (set.empty()) return false;
        const Value guard = value(a.guard, s);
        auto as_int = [](const Value& v) -> std::int64_t {
            const auto* i = std::get_if<std::int64_t>(&v);
            return i ? *i : 0;
        };
        switch (a.func) {
            case AggregateFunction::Count:
                return compare(static_cast<std::int64_t>(set.size()), a.cmp, guard);
            case AggregateFunction::Sum: {
                std::int64_t sum = 0;
                for (const auto& t : set) sum += as_int(t[0]);
                return compare(sum, a.cmp, guard);
            }
            case AggregateFunction::Min: {
                Value m = set.begin()->at(0);
                for (const auto& t : set) m = std::min(m, t[0]);
                return compare(m, a.cmp, guard);
            }
            case AggregateFunction::Max: {
                Value m = set.begin()->at(0);
                for (const auto& t : set) m = std::max(m, t[0]);
                return compare(m, a.cmp, guard);
            }
            case AggregateFunction::Avg: {
                std::int64_t sum = 0;
                for (const auto& t : set) sum += as_int(t[0]);
                const auto* g = std::get_if<std::int64_t>(&guard);
                if (!g) return compare(sum, a.cmp, guard);
                return compare(sum, a.cmp, *g * static_cast<std::int64_t>(set.size()));
            }
        }
        return false;
    }
};

const Relation Engine::empty_{};

[[noreturn]] void unstratified(const std::string& pred) {
    throw DiagnosticError(Diagnostic{Diagnostic::Severity::Error, {},
                                     "program is not stratified (level of '" + pred + "' is unbounded)"});
}

}  // namespace

Database evaluate(const Program& program, const Database& edb) {
    Database db = edb;
    for (const auto& p : program.predicates()) db[p];
    for (const auto& f : program.facts) {
        Tuple t;
        for (const auto& a : f.args) t.push_back(a.value());
        db[f.predicate].insert(std::move(t));
    }

    // Levels: positive dependencies keep the level, negative and aggregate ones raise it.
    std::map<std::string, int> level;
    for (const auto& [p, _] : db) level[p] = 0;
    const int limit = static_cast<int>(level.size()) + 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : program.rules) {
            int& h = level[r.head.predicate];
            auto need = [&](const std::string& q, int plus) {
                if (level[q] + plus > h) {
                    h = level[q] + plus;
                    changed = true;
                    if (h > limit) unstratified(r.head.predicate);
                }
            };
            for (const auto& l : r.body) {
                if (l.is_atom()) need(l.atom().predicate, l.negative ? 1 : 0);
                if (l.is_aggregate())
                    for (const auto& a : l.aggregate().set.conj) need(a.predicate, 1);
            }
        }
    }

    int top = 0;
    for (const auto& [_, l] : level) top = std::max(top, l);
    std::vector<CRule> compiled;
    for (const auto& r : program.rules) compiled.push_back(compile_rule(r));

    for (int lv = 0; lv <= top; ++lv) {
        while (true) {
            Database fresh;
            {
                Engine engine(db, program.maxint);
                for (const auto& c : compiled) {
                    if (level[c.head_predicate] != lv) continue;
                    const Relation& current = db[c.head_predicate];
                    engine.derive(c, [&](const Tuple& t) {
                        if (!current.count(t)) fresh[c.head_predicate].insert(t);
                    });
                }
            }
            if (fresh.empty()) break;
            for (auto& [p, rel] : fresh) db[p].insert(rel.begin(), rel.end());
        }
    }
    return db;
}

Relation select(const Database& db, const Atom& goal) {
    Relation out;
    auto it = db.find(goal.predicate);
    if (it == db.end()) return out;
    for (const auto& t : it->second) {
        std::map<std::string, Value> seen;
        bool ok = t.size() == goal.args.size();
        for (std::size_t i = 0; ok && i < goal.args.size(); ++i) {
            const Term& a = goal.args[i];
            if (a.is_constant()) {
                ok = t[i] == a.value();
            } else if (!a.is_anonymous()) {
                auto [pos, inserted] = seen.emplace(a.text, t[i]);
                ok = inserted || pos->second == t[i];
            }
        }
        if (ok) out.insert(t);
    }
    return out;
}

}  // namespace dlvdb::oracle
