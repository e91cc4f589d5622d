#include "dlvdb/directives.hpp"

namespace dlvdb {

std::string to_string(const ConnectionSpec& c) {
    std::string out;
    if (c.quoted) {
        out += '"';
        for (char ch : c.database) {
            if (ch == '"' || ch == '\\') out += '\\';
            out += ch;
        }
        out += '"';
    } else {
        out += c.database;
    }
    return out + ":" + c.user + ":" + c.password;
}

std::string to_string(const SqlType& t) {
    if (t.is_integer()) return "integer";
    return "varchar(" + std::to_string(t.length) + ")";
}

const TableDefinition* DirectiveSet::definition_for(const std::string& predicate) const {
    for (const auto& t : tables)
        if (t.predicate() == predicate) return &t;
    return nullptr;
}

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += f(xs[i]);
    }
    return out;
}

}  // namespace

std::string to_string(const DirectiveSet& d) {
    std::string out = "USEDB " + to_string(d.working_db);
    if (d.system_like) out += " LIKE " + *d.system_like;
    out += ".\n";
    for (const auto& t : d.tables) {
        out += t.mode == TableDefinition::Mode::Use ? "USE " : "CREATE ";
        out += t.table;
        if (!t.attributes.empty())
            out += " (" + join(t.attributes, [](const std::string& s) { return s; }) + ")";
        if (t.as_query) out += " AS (" + *t.as_query + ")";
        if (t.from) out += " FROM " + to_string(*t.from);
        if (t.mapto) {
            out += " MAPTO " + t.mapto->predicate;
            if (!t.mapto->types.empty())
                out += " (" + join(t.mapto->types, [](const SqlType& s) { return to_string(s); }) + ")";
        }
        if (t.keep_after_execution) out += " KEEP_AFTER_EXECUTION";
        out += ".\n";
    }
    if (d.query) {
        out += "QUERY " + d.query->name;
        if (d.query->has_args)
            out += "(" + join(d.query->args, [](const Term& t) { return to_string(t); }) + ")";
        out += ".\n";
    }
    for (const auto& o : d.outputs) {
        if (o.kind == OutputDirective::Kind::DbOutput) {
            out += "DBOUTPUT " + to_string(*o.target) + ".\n";
            continue;
        }
        out += "OUTPUT ";
        if (o.write_mode == OutputDirective::WriteMode::Append) out += "APPEND ";
        if (o.write_mode == OutputDirective::WriteMode::Overwrite) out += "OVERWRITE ";
        out += o.predicate;
        if (o.alias) out += " AS " + *o.alias;
        if (o.target) out += " IN " + to_string(*o.target);
        out += ".\n";
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const DirectiveSet& d) { return os << to_string(d); }

}  // namespace dlvdb
