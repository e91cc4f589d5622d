#include "dlvdb/storage.hpp"

#include <cctype>
#include <fstream>
#include <map>

#include "dlvdb/validate.hpp"

namespace dlvdb {

namespace {

[[noreturn]] void storage_error(const std::string& msg, const SourceSpan& span = {}) {
    throw DiagnosticError(Diagnostic{Diagnostic::Severity::Error, span, msg});
}

std::map<std::string, std::size_t> predicate_arities(const Program& p) {
    std::map<std::string, std::size_t> out;
    auto visit = [&](const Atom& a) { out.emplace(a.predicate, a.arity()); };
    for (const auto& f : p.facts) visit(f);
    for (const auto& r : p.rules) {
        visit(r.head);
        for (const auto& l : r.body) {
            if (l.is_atom()) visit(l.atom());
            if (l.is_aggregate())
                for (const auto& a : l.aggregate().set.conj) visit(a);
        }
    }
    if (p.query) visit(*p.query);
    return out;
}

bool is_generated(const std::string& predicate) {
    return predicate.rfind(kAuxPrefix, 0) == 0 || predicate.rfind(kSeedPrefix, 0) == 0;
}

std::string select_columns(const RelationBinding& b) {
    std::string out;
    for (std::size_t i = 0; i < b.attributes.size(); ++i) out += (i ? ", " : "") + quote_ident(b.attributes[i]);
    return out;
}

void check_no_nulls(Backend& backend, const RelationBinding& b) {
    std::string cond;
    for (std::size_t i = 0; i < b.attributes.size(); ++i)
        cond += (i ? " OR " : "") + quote_ident(b.attributes[i]) + " IS NULL";
    if (backend.scalar("SELECT COUNT(*) FROM " + quote_ident(b.table) + " WHERE " + cond) > 0)
        storage_error("table '" + b.table + "' for predicate '" + b.predicate + "' contains NULL values");
}

void create_table(Backend& backend, const RelationBinding& b) {
    backend.execute("DROP TABLE IF EXISTS " + quote_ident(b.table));
    backend.execute("CREATE TABLE " + quote_ident(b.table) + " (" + column_definitions(b) + ")");
}

/// Loads rows through a staging table so that duplicates and rows already
/// present are skipped. Returns rows added.
std::int64_t load_rows(Backend& backend, const RelationBinding& b,
                       const std::function<void(BulkInserter&)>& produce) {
    static const std::string stage = "dlvdb_stage";
    backend.execute("DROP TABLE IF EXISTS " + stage);
    std::string cols;
    for (std::size_t i = 0; i < b.attributes.size(); ++i) cols += (i ? ", " : "") + quote_ident(b.attributes[i]);
    backend.execute("CREATE TABLE " + stage + " (" + cols + ")");
    auto inserter = backend.bulk_insert(stage, b.attributes.size());
    produce(*inserter);
    inserter->finish();
    const std::int64_t added = backend.execute("INSERT INTO " + quote_ident(b.table) + " SELECT DISTINCT * FROM " +
                                               stage + " EXCEPT SELECT * FROM " + quote_ident(b.table));
    backend.execute("DROP TABLE " + stage);
    return added;
}

std::vector<Value> tuple_of(const Atom& a) {
    if (a.args.empty()) return {std::int64_t{1}};
    std::vector<Value> row;
    for (const auto& t : a.args) row.push_back(t.value());
    return row;
}

}  // namespace

std::string column_definitions(const RelationBinding& b) {
    std::string out;
    for (std::size_t i = 0; i < b.attributes.size(); ++i) {
        out += (i ? ", " : "") + quote_ident(b.attributes[i]);
        if (i < b.types.size() && b.types[i]) {
            out += b.types[i]->is_integer() ? " INTEGER" : " VARCHAR(" + std::to_string(b.types[i]->length) + ")";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_field(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    const auto& s = std::get<std::string>(v);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void read_csv(const std::string& path, std::size_t arity, const std::function<void(const std::vector<Value>&)>& row) {
    std::ifstream in(path, std::ios::binary);
    if (!in) storage_error("cannot read CSV file '" + path + "'");
    std::string line;
    int line_no = 0;
    std::vector<Value> values;
    const std::size_t width = arity == 0 ? 1 : arity;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const SourceSpan span{path, line_no, 1};
        values.clear();
        std::size_t i = 0;
        while (true) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::string field;
            bool quoted = false;
            if (i < line.size() && line[i] == '"') {
                quoted = true;
                ++i;
                while (true) {
                    if (i >= line.size()) storage_error("unterminated quoted field", span);
                    if (line[i] == '"') {
                        if (i + 1 < line.size() && line[i + 1] == '"') {
                            field += '"';
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    field += line[i++];
                }
                while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            } else {
                while (i < line.size() && line[i] != ',') field += line[i++];
                while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.pop_back();
            }
            if (!quoted && field.empty()) storage_error("empty field (NULL values are not supported)", span);
            bool integer = !quoted && (std::isdigit(static_cast<unsigned char>(field[0])) ||
                                       (field[0] == '-' && field.size() > 1));
            for (std::size_t k = 1; integer && k < field.size(); ++k)
                integer = std::isdigit(static_cast<unsigned char>(field[k]));
            if (integer) {
                try {
                    values.emplace_back(static_cast<std::int64_t>(std::stoll(field)));
                } catch (const std::out_of_range&) {
                    values.emplace_back(field);
                }
            } else {
                values.emplace_back(field);
            }
            if (i >= line.size()) break;
            if (line[i] != ',') storage_error("expected ',' after a quoted field", span);
            ++i;
        }
        if (values.size() != width)
            storage_error("expected " + std::to_string(width) + " fields, found " + std::to_string(values.size()), span);
        row(values);
    }
}

// ---------------------------------------------------------------------------

BindingMap bind_tables(const Program& program, const DirectiveSet& directives, Backend& working) {
    BindingMap out;
    const auto arities = predicate_arities(program);

    for (const auto& t : directives.tables)
        if (!arities.count(t.predicate()))
            storage_error("directive maps predicate '" + t.predicate() + "' which the program does not use", t.span);

    for (const auto& pred : program.predicates()) {
        const std::size_t arity = arities.at(pred);
        RelationBinding b;
        b.predicate = pred;
        b.arity = arity;
        b.table = pred;
        b.attributes = default_attributes(arity);
        b.types.assign(b.attributes.size(), std::nullopt);
        const std::size_t width = b.attributes.size();

        const TableDefinition* def = directives.definition_for(pred);
        if (def) {
            b.table = def->table;
            if (def->mapto && !def->mapto->types.empty()) {
                if (def->mapto->types.size() != width)
                    storage_error("MAPTO " + pred + " declares " + std::to_string(def->mapto->types.size()) +
                                      " types but the predicate has arity " + std::to_string(arity),
                                  def->span);
                for (std::size_t i = 0; i < width; ++i) b.types[i] = def->mapto->types[i];
            }
            if (!def->attributes.empty()) {
                if (def->attributes.size() != width)
                    storage_error("table " + def->table + " declares " + std::to_string(def->attributes.size()) +
                                      " attributes but predicate '" + pred + "' has arity " + std::to_string(arity),
                                  def->span);
                b.attributes = def->attributes;
            }
            if (def->mode == TableDefinition::Mode::Create) {
                b.source = RelationBinding::Source::Generated;
                b.created = true;
                b.keep = def->keep_after_execution;
            } else if (def->from || def->as_query) {
                b.source = def->from ? RelationBinding::Source::External : RelationBinding::Source::Working;
                b.connection = def->from;
                b.as_query = def->as_query;
                b.created = true;  // working copy
            } else {
                b.source = RelationBinding::Source::Working;
                if (!working.relation_exists(def->table))
                    storage_error("USE table '" + def->table + "' does not exist in the working database", def->span);
                auto cols = working.columns(def->table);
                if (cols.size() != width)
                    storage_error("USE table '" + def->table + "' has " + std::to_string(cols.size()) +
                                      " columns but predicate '" + pred + "' has arity " + std::to_string(arity),
                                  def->span);
                if (def->attributes.empty()) b.attributes = cols;
            }
        } else if (!is_generated(pred) && working.relation_exists(pred)) {
            auto cols = working.columns(pred);
            if (cols.size() != width)
                storage_error("working table '" + pred + "' has " + std::to_string(cols.size()) +
                              " columns but predicate '" + pred + "' has arity " + std::to_string(arity));
            b.source = RelationBinding::Source::Working;
            b.attributes = cols;
        } else {
            b.source = RelationBinding::Source::Generated;
            b.created = true;
        }
        out.emplace(pred, std::move(b));
    }
    return out;
}

StageReport stage_inputs(const Program& program, BindingMap& bindings, Backend& working,
                         const std::vector<CsvSource>& csv, const std::string& base_dir) {
    StageReport report;
    for (auto& [pred, b] : bindings) {
        if (b.source == RelationBinding::Source::Generated) {
            create_table(working, b);
        } else if (b.source == RelationBinding::Source::External) {
            create_table(working, b);
            auto source = connect(*b.connection, base_dir);
            const std::string query = b.as_query ? "SELECT DISTINCT * FROM (" + *b.as_query + ")"
                                                 : "SELECT DISTINCT * FROM " + quote_ident(b.table);
            auto inserter = working.bulk_insert(b.table, b.attributes.size());
            source->for_each_row(query, [&](const std::vector<Value>& row) { inserter->add(row); });
            inserter->finish();
        } else if (b.as_query) {
            create_table(working, b);
            working.execute("INSERT INTO " + quote_ident(b.table) + " SELECT DISTINCT * FROM (" + *b.as_query + ")");
            check_no_nulls(working, b);
        } else {
            check_no_nulls(working, b);
        }
    }

    std::map<std::string, std::vector<const Atom*>> facts;
    for (const auto& f : program.facts) facts[f.predicate].push_back(&f);
    for (const auto& [pred, atoms] : facts) {
        const RelationBinding& b = bindings.at(pred);
        report.facts_loaded += load_rows(working, b, [&](BulkInserter& ins) {
            for (const Atom* a : atoms) ins.add(tuple_of(*a));
        });
    }

    for (const auto& src : csv) {
        auto it = bindings.find(src.predicate);
        if (it == bindings.end())
            storage_error("CSV file '" + src.path + "' is bound to predicate '" + src.predicate +
                          "' which the program does not use");
        const RelationBinding& b = it->second;
        report.facts_loaded += load_rows(working, b, [&](BulkInserter& ins) {
            read_csv(src.path, b.arity, [&](const std::vector<Value>& row) { ins.add(row); });
        });
    }
    return report;
}

void stage_range(Backend& working, std::int64_t maxint) {
    working.execute(std::string("DROP TABLE IF EXISTS ") + kRangeTable);
    working.execute(std::string("CREATE TABLE ") + kRangeTable + " (att_1 INTEGER)");
    working.execute(std::string("WITH RECURSIVE r(x) AS (SELECT 0 UNION ALL SELECT x + 1 FROM r WHERE x < ") +
                    std::to_string(maxint) + ") INSERT INTO " + kRangeTable + " SELECT x FROM r");
}

namespace {

void copy_table(Backend& working, const RelationBinding& b, Backend& target, const std::string& name,
                bool append) {
    RelationBinding shape = b;
    shape.table = name;
    if (!append) target.execute("DROP TABLE IF EXISTS " + quote_ident(name));
    target.execute("CREATE TABLE IF NOT EXISTS " + quote_ident(name) + " (" + column_definitions(shape) + ")");
    auto inserter = target.bulk_insert(name, b.attributes.size());
    working.for_each_row("SELECT " + select_columns(b) + " FROM " + quote_ident(b.table),
                         [&](const std::vector<Value>& row) { inserter->add(row); });
    inserter->finish();
}

}  // namespace

std::set<std::string> export_outputs(const DirectiveSet& directives, const BindingMap& bindings, Backend& working,
                                     const std::string& base_dir) {
    std::set<std::string> keep;
    for (const auto& o : directives.outputs) {
        if (o.kind == OutputDirective::Kind::DbOutput) {
            auto target = connect(*o.target, base_dir);
            for (const auto& [pred, b] : bindings)
                if (!is_generated(pred)) copy_table(working, b, *target, b.table, false);
            continue;
        }
        auto it = bindings.find(o.predicate);
        if (it == bindings.end()) storage_error("OUTPUT names unknown predicate '" + o.predicate + "'");
        const RelationBinding& b = it->second;
        const std::string name = o.alias ? *o.alias : b.table;
        if (o.target) {
            auto target = connect(*o.target, base_dir);
            copy_table(working, b, *target, name, o.append());
        } else if (name != b.table) {
            copy_table(working, b, working, name, o.append());
            keep.insert(name);
        } else {
            keep.insert(b.table);
        }
    }
    return keep;
}

std::vector<std::string> cleanup(const BindingMap& bindings, Backend& working, const std::vector<std::string>& views,
                                 const std::vector<std::string>& tables, const std::set<std::string>& keep) {
    std::vector<std::string> failures;
    auto attempt = [&](const std::string& sql) {
        try {
            working.execute(sql);
        } catch (const std::exception& e) {
            failures.push_back(e.what());
        }
    };
    for (const auto& name : views) attempt("DROP VIEW IF EXISTS " + quote_ident(name));
    for (const auto& name : tables) attempt("DROP TABLE IF EXISTS " + quote_ident(name));
    attempt(std::string("DROP TABLE IF EXISTS ") + kRangeTable);
    attempt("DROP TABLE IF EXISTS dlvdb_stage");
    for (const auto& [pred, b] : bindings)
        if (b.created && !b.keep && !keep.count(b.table)) attempt("DROP TABLE IF EXISTS " + quote_ident(b.table));
    return failures;
}

}  // namespace dlvdb
