#include "dlvdb/executor.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "dlvdb/validate.hpp"

namespace dlvdb {

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_generated(const std::string& predicate) {
    return predicate.rfind(kAuxPrefix, 0) == 0 || predicate.rfind(kSeedPrefix, 0) == 0;
}

void create_like(Backend& backend, const RelationBinding& b, const std::string& name) {
    RelationBinding shape = b;
    shape.table = name;
    backend.execute("DROP TABLE IF EXISTS " + quote_ident(name));
    backend.execute("CREATE TABLE " + quote_ident(name) + " (" + column_definitions(shape) + ")");
}

const RelationBinding& binding_for_table(const BindingMap& bindings, const std::string& table) {
    for (const auto& [_, b] : bindings)
        if (b.table == table) return b;
    throw std::logic_error("no binding for table '" + table + "'");
}

std::int64_t count_common(Backend& backend, const std::string& a, const std::string& b) {
    return backend.scalar("SELECT COUNT(*) FROM (SELECT * FROM " + quote_ident(a) + " INTERSECT SELECT * FROM " +
                          quote_ident(b) + ")");
}

}  // namespace

std::map<std::string, std::int64_t> eval_nonrecursive(const RulePlan& plan, Backend& backend) {
    std::map<std::string, std::int64_t> out;
    for (const auto& s : plan.exit_statements) out[s.target] += backend.execute(s.text);
    return out;
}

FixpointState init_recursive(const RulePlan& plan, const BindingMap& bindings, Backend& backend,
                             std::size_t component) {
    FixpointState state;
    state.component = component;
    state.tables = plan.recursive_tables;
    for (const auto& t : state.tables) {
        const RelationBinding& b = binding_for_table(bindings, t);
        create_like(backend, b, delta_table(t));
        create_like(backend, b, prev_delta_table(t));
        backend.execute("INSERT INTO " + quote_ident(prev_delta_table(t)) + " SELECT * FROM " + quote_ident(t));
        state.size[t] = backend.count_rows(t);
        state.inserted[t] = 0;
    }
    return state;
}

bool iterate(FixpointState& state, const RulePlan& plan, const BindingMap& bindings, Backend& backend, bool verify) {
    ++state.pass;
    IterationRecord rec;
    rec.component = state.component;
    rec.pass = state.pass;

    // (4) new deltas from accumulated tables and previous deltas.
    for (const auto& s : plan.delta_statements) backend.execute(s.text);

    bool converged = true;
    for (const auto& t : state.tables) {
        const std::int64_t d = backend.count_rows(delta_table(t));
        rec.delta[t] = d;
        if (d != 0) converged = false;
        // (5) cleanup is built into the statements; verify it.
        if (verify) {
            if (count_common(backend, delta_table(t), t) != 0)
                state.violations.push_back("pass " + std::to_string(state.pass) + ": d_" + t + " overlaps " + t);
            if (count_common(backend, delta_table(t), prev_delta_table(t)) != 0)
                state.violations.push_back("pass " + std::to_string(state.pass) + ": d_" + t + " overlaps d1_" + t);
        }
    }

    for (const auto& t : state.tables) {
        // (6) P := P ∪ D1. D1 starts as a copy of P, and later deltas exclude P.
        if (!state.first_pass) {
            const std::int64_t added = backend.execute("INSERT INTO " + quote_ident(t) + " SELECT * FROM " +
                                                       quote_ident(prev_delta_table(t)));
            state.inserted[t] += added;
            state.size[t] += added;
        }
        if (verify) {
            const std::int64_t actual = backend.count_rows(t);
            if (actual != state.size[t] || (!state.history.empty() && actual < state.history.back().size.at(t)))
                state.violations.push_back("pass " + std::to_string(state.pass) + ": size of " + t +
                                           " is not monotone");
            state.size[t] = actual;
        }
        rec.size[t] = state.size[t];
        // (7) D1 := D; D := empty.
        const RelationBinding& b = binding_for_table(bindings, t);
        backend.execute("DROP TABLE " + quote_ident(prev_delta_table(t)));
        backend.execute("ALTER TABLE " + quote_ident(delta_table(t)) + " RENAME TO " +
                        quote_ident(prev_delta_table(t)));
        create_like(backend, b, delta_table(t));
    }
    state.first_pass = false;
    state.history.push_back(std::move(rec));
    return converged;
}

// ---------------------------------------------------------------------------

std::optional<Atom> goal_of(const Program& program, const DirectiveSet& directives) {
    if (directives.query) {
        const QueryDirective& q = *directives.query;
        std::string predicate = q.name;
        for (const auto& t : directives.tables)
            if (t.table == q.name) predicate = t.predicate();
        Atom goal{predicate, q.args, {}};
        if (!q.has_args) {
            std::optional<std::size_t> arity;
            for (const auto& p : program.rules)
                if (p.head.predicate == predicate) arity = p.head.arity();
            for (const auto& f : program.facts)
                if (f.predicate == predicate) arity = f.arity();
            for (std::size_t i = 0; arity && i < *arity; ++i) goal.args.push_back(Term::variable("_Q" + std::to_string(i)));
        }
        return goal;
    }
    return program.query;
}

CompiledProgram compile(const Program& program, const DirectiveSet& directives, bool optimize_goal) {
    CompiledProgram out;
    out.goal = goal_of(program, directives);
    Program p = standardize_aggregates(program);
    if (optimize_goal && out.goal && seed_rewrite_applies(p, *out.goal)) {
        p = optimize(p, out.goal);
        out.seed_rewrite = true;
    }
    p.query = std::nullopt;
    out.strata = stratify(p);
    out.program = std::move(p);
    return out;
}

namespace {

/// WHERE clause selecting the goal's tuples from its table (empty: all rows).
std::string goal_filter(const Atom& goal, const RelationBinding& b) {
    std::vector<std::string> conds;
    std::map<std::string, std::size_t> first;
    for (std::size_t i = 0; i < goal.args.size(); ++i) {
        const Term& t = goal.args[i];
        const std::string col = quote_ident(b.attributes[i]);
        if (t.is_constant()) {
            conds.push_back(col + " = " + sql_literal(t.value()));
        } else if (!t.is_anonymous()) {
            auto [it, inserted] = first.emplace(t.text, i);
            if (!inserted) conds.push_back(quote_ident(b.attributes[it->second]) + " = " + col);
        }
    }
    std::string out;
    for (std::size_t i = 0; i < conds.size(); ++i) out += (i ? " AND " : "") + conds[i];
    return out;
}

std::set<Tuple> read_table(Backend& backend, const RelationBinding& b, const std::string& where = {}) {
    std::set<Tuple> out;
    std::string sql = "SELECT * FROM " + quote_ident(b.table);
    if (!where.empty()) sql += " WHERE " + where;
    backend.for_each_row(sql, [&](const std::vector<Value>& row) {
        if (b.arity == 0) out.insert(Tuple{});
        else out.insert(row);
    });
    return out;
}

}  // namespace

EvaluationResult run(const Program& program, const DirectiveSet& directives, Backend& working,
                     const RunOptions& options) {
    EvaluationResult result;
    const auto t_start = Clock::now();

    auto t0 = Clock::now();
    CompiledProgram compiled = compile(program, directives, options.optimize);
    result.goal = compiled.goal;
    result.seed_rewrite = compiled.seed_rewrite;
    result.phase_millis["analyze"] = millis_since(t0);

    BindingMap bindings = bind_tables(compiled.program, directives, working);

    if (options.dialect) {
        result.dialect = *options.dialect;
    } else if (directives.system_like) {
        auto profile = profile_for_system(*directives.system_like);
        result.dialect = profile ? profile->dialect : working.probe_profile().dialect;
    } else {
        result.dialect = working.probe_profile().dialect;
    }

    t0 = Clock::now();
    std::vector<RulePlan> plans =
        translate_program(compiled.strata, bindings, TranslatorOptions{result.dialect, compiled.program.maxint});
    result.phase_millis["translate"] = millis_since(t0);

    std::vector<std::string> transient_views;
    std::vector<std::string> transient_tables;
    for (const auto& p : plans) {
        for (const auto& v : p.views) transient_views.push_back(v.target);
        for (const auto& t : p.recursive_tables) {
            transient_tables.push_back(delta_table(t));
            transient_tables.push_back(prev_delta_table(t));
        }
    }
    std::set<std::string> keep;

    auto finish = [&]() {
        working.set_deadline(std::nullopt);
        if (options.keep_tables) {
            for (const auto& [_, b] : bindings) keep.insert(b.table);
        }
        auto failures = cleanup(bindings, working, transient_views, transient_tables, keep);
        result.warnings.insert(result.warnings.end(), failures.begin(), failures.end());
    };

    try {
        if (options.timeout_seconds)
            working.set_deadline(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                    std::chrono::duration<double>(*options.timeout_seconds)));

        t0 = Clock::now();
        stage_inputs(compiled.program, bindings, working, options.csv, options.base_dir);
        bool needs_range = false;
        for (const auto& p : plans)
            for (const auto* group : {&p.exit_statements, &p.delta_statements})
                for (const auto& s : *group)
                    if (s.text.find(kRangeTable) != std::string::npos) needs_range = true;
        if (needs_range) stage_range(working, compiled.program.maxint);
        for (const auto& [pred, b] : bindings) {
            result.initial_rows[pred] = working.count_rows(b.table);
            result.inserted_rows[pred] = 0;
        }
        result.phase_millis["stage"] = millis_since(t0);

        t0 = Clock::now();
        std::map<std::string, std::string> pred_of_table;
        for (const auto& [pred, b] : bindings) pred_of_table[b.table] = pred;

        for (std::size_t ci = 0; ci < plans.size(); ++ci) {
            const RulePlan& plan = plans[ci];
            const auto tc = Clock::now();
            ComponentStats stats;
            stats.predicates = plan.predicates;
            for (const auto& v : plan.views) {
                working.execute("DROP VIEW IF EXISTS " + quote_ident(v.target));
                working.execute(v.text);
            }
            for (const auto& [table, n] : eval_nonrecursive(plan, working)) result.inserted_rows[pred_of_table[table]] += n;
            if (plan.is_recursive()) {
                FixpointState state = init_recursive(plan, bindings, working, ci);
                while (!iterate(state, plan, bindings, working, options.verify)) {
                    if (state.pass >= options.max_iterations)
                        throw std::runtime_error("iteration budget of " + std::to_string(options.max_iterations) +
                                                 " passes exceeded");
                }
                for (const auto& [t, n] : state.inserted) result.inserted_rows[pred_of_table[t]] += n;
                stats.passes = state.pass;
                result.iterations.insert(result.iterations.end(), state.history.begin(), state.history.end());
                result.violations.insert(result.violations.end(), state.violations.begin(), state.violations.end());
            }
            stats.millis = millis_since(tc);
            result.components.push_back(std::move(stats));
        }
        result.phase_millis["evaluate"] = millis_since(t0);

        // Extensions as computed, before the goal filter below.
        for (const auto& pred : compiled.program.predicates()) {
            if (is_generated(pred)) continue;
            const RelationBinding& b = bindings.at(pred);
            PredicateSize ps{pred, b.table, working.count_rows(b.table), compiled.strata.component_of(pred)};
            result.sizes.push_back(ps);
            if (options.collect_all) result.extensions[pred] = read_table(working, b);
        }

        // Bound goal without the seed rewrite: keep only matching tuples.
        if (compiled.goal) {
            const RelationBinding& gb = bindings.at(compiled.goal->predicate);
            const std::string where = goal_filter(*compiled.goal, gb);
            if (!where.empty() && gb.created)
                working.execute("DELETE FROM " + quote_ident(gb.table) + " WHERE NOT (" + where + ")");
            result.answer_count = working.scalar("SELECT COUNT(*) FROM " + quote_ident(gb.table) +
                                                 (where.empty() ? "" : " WHERE " + where));
            if (options.collect_answers) {
                auto rows = read_table(working, gb, where);
                result.answers.assign(rows.begin(), rows.end());
            }
        }

        t0 = Clock::now();
        keep = export_outputs(directives, bindings, working, options.base_dir);
        result.phase_millis["export"] = millis_since(t0);
    } catch (...) {
        finish();
        throw;
    }
    finish();
    result.phase_millis["total"] = millis_since(t_start);
    return result;
}

std::size_t EvaluationResult::total_passes() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.passes;
    return n;
}

std::int64_t EvaluationResult::total_delta_rows() const {
    std::int64_t n = 0;
    for (const auto& r : iterations)
        for (const auto& [_, d] : r.delta) n += d;
    return n;
}

std::string EvaluationResult::render_text() const {
    std::ostringstream os;
    std::size_t width = 9;
    for (const auto& s : sizes) width = std::max(width, s.predicate.size());
    os << std::left << std::setw(static_cast<int>(width) + 2) << "predicate" << "rows\n";
    for (const auto& s : sizes) os << std::left << std::setw(static_cast<int>(width) + 2) << s.predicate << s.rows << '\n';
    if (goal) os << "goal " << to_string(*goal) << ": " << answer_count << " answers"
                 << (seed_rewrite ? " (seed rewrite)" : "") << '\n';
    os << "components " << components.size() << ", passes " << total_passes() << ", " << std::fixed
       << std::setprecision(1) << (phase_millis.count("total") ? phase_millis.at("total") : 0.0) << " ms\n";
    return os.str();
}

std::string EvaluationResult::render_tsv() const {
    std::ostringstream os;
    os << "predicate\tsize\titerations\tmillis\n";
    for (const auto& s : sizes) {
        const ComponentStats& c = components.at(s.component);
        os << s.predicate << '\t' << s.rows << '\t' << c.passes << '\t' << std::fixed << std::setprecision(3)
           << c.millis << '\n';
    }
    return os.str();
}

}  // namespace dlvdb
