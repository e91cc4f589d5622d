#include "dlvdb/backend.hpp"

#include <sqlite3.h>

#include <cmath>
#include <filesystem>
#include <mutex>

namespace dlvdb {

BackendError::BackendError(const std::string& message, std::string statement)
    : std::runtime_error(statement.empty() ? message : message + "\n  while executing: " + statement),
      statement_(std::move(statement)) {}

std::optional<BackendProfile> profile_for_system(const std::string& system) {
    if (system == "MYSQL") return BackendProfile{SqlDialect::NoExcept, '`', 64};
    if (system == "POSTGRES") return BackendProfile{SqlDialect::Generic, '"', 63};
    if (system == "ORACLE") return BackendProfile{SqlDialect::Generic, '"', 128};
    if (system == "DB2") return BackendProfile{SqlDialect::Generic, '"', 128};
    if (system == "SQLSERVER") return BackendProfile{SqlDialect::Generic, '"', 128};
    if (system == "SQLITE") return BackendProfile{SqlDialect::Generic, '"', 0};
    return std::nullopt;
}

std::int64_t Backend::count_rows(const std::string& table) {
    return scalar("SELECT COUNT(*) FROM " + quote_ident(table));
}

// ---------------------------------------------------------------------------

struct SqliteBackend::Impl {
    sqlite3* db = nullptr;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    bool timed_out = false;

    [[noreturn]] void fail(const std::string& sql, int rc) {
        if (rc == SQLITE_INTERRUPT && timed_out) {
            timed_out = false;
            throw TimeoutError("statement interrupted by the time limit");
        }
        throw BackendError(std::string("sqlite: ") + sqlite3_errmsg(db), sql);
    }

    sqlite3_stmt* prepare(const std::string& sql) {
        sqlite3_stmt* stmt = nullptr;
        int rc = sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt, nullptr);
        if (rc != SQLITE_OK) fail(sql, rc);
        return stmt;
    }

    static int progress(void* self) {
        auto* impl = static_cast<Impl*>(self);
        if (impl->deadline && std::chrono::steady_clock::now() > *impl->deadline) {
            impl->timed_out = true;
            return 1;
        }
        return 0;
    }

    Value column_value(sqlite3_stmt* stmt, int i, const std::string& sql) {
        switch (sqlite3_column_type(stmt, i)) {
            case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, i));
            case SQLITE_FLOAT: {
                double d = sqlite3_column_double(stmt, i);
                if (std::floor(d) == d && std::abs(d) < 9.0e18) return static_cast<std::int64_t>(d);
                return std::to_string(d);
            }
            case SQLITE_NULL: throw BackendError("NULL value in result; NULLs are not supported", sql);
            default: {
                const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
                return std::string(text, static_cast<std::size_t>(sqlite3_column_bytes(stmt, i)));
            }
        }
    }
};

namespace {

struct StmtGuard {
    sqlite3_stmt* stmt;
    ~StmtGuard() { sqlite3_finalize(stmt); }
};

}  // namespace

SqliteBackend::SqliteBackend(const std::string& path) : impl_(std::make_unique<Impl>()), path_(path) {
    // Page caches and temporary b-trees spill to disk past this budget, so the
    // process footprint does not track the data size.
    static std::once_flag heap_limit;
    std::call_once(heap_limit, [] { sqlite3_soft_heap_limit64(std::int64_t{4} << 20); });
    int rc = sqlite3_open_v2(path.c_str(), &impl_->db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
        sqlite3_close(impl_->db);
        throw BackendError("cannot open database '" + path + "': " + msg, "");
    }
    sqlite3_progress_handler(impl_->db, 10000, &Impl::progress, impl_.get());
    execute("PRAGMA synchronous = OFF");
    execute("PRAGMA temp_store = FILE");
    execute("PRAGMA cache_size = -2048");
}

SqliteBackend::~SqliteBackend() { sqlite3_close(impl_->db); }

std::int64_t SqliteBackend::execute(const std::string& sql) {
    sqlite3_stmt* stmt = impl_->prepare(sql);
    StmtGuard guard{stmt};
    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    }
    if (rc != SQLITE_DONE) impl_->fail(sql, rc);
    return sqlite3_changes(impl_->db);
}

std::int64_t SqliteBackend::scalar(const std::string& sql) {
    sqlite3_stmt* stmt = impl_->prepare(sql);
    StmtGuard guard{stmt};
    int rc = sqlite3_step(stmt);
    if (rc == SQLITE_DONE) return 0;
    if (rc != SQLITE_ROW) impl_->fail(sql, rc);
    return sqlite3_column_int64(stmt, 0);
}

void SqliteBackend::for_each_row(const std::string& sql, const std::function<void(const std::vector<Value>&)>& fn) {
    sqlite3_stmt* stmt = impl_->prepare(sql);
    StmtGuard guard{stmt};
    const int n = sqlite3_column_count(stmt);
    std::vector<Value> row(static_cast<std::size_t>(n));
    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        for (int i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = impl_->column_value(stmt, i, sql);
        fn(row);
    }
    if (rc != SQLITE_DONE) impl_->fail(sql, rc);
}

bool SqliteBackend::relation_exists(const std::string& name) {
    sqlite3_stmt* stmt = impl_->prepare("SELECT 1 FROM sqlite_master WHERE type IN ('table', 'view') AND name = ?1");
    StmtGuard guard{stmt};
    sqlite3_bind_text(stmt, 1, name.c_str(), static_cast<int>(name.size()), SQLITE_TRANSIENT);
    return sqlite3_step(stmt) == SQLITE_ROW;
}

std::vector<std::string> SqliteBackend::columns(const std::string& table) {
    std::vector<std::string> out;
    for_each_row("SELECT name FROM pragma_table_info(" + sql_literal(table) + ")",
                 [&](const std::vector<Value>& row) { out.push_back(to_string(row[0])); });
    return out;
}

namespace {

class SqliteInserter final : public BulkInserter {
public:
    SqliteInserter(SqliteBackend& backend, SqliteBackend::Impl& impl, const std::string& table, std::size_t columns)
        : backend_(backend), impl_(impl) {
        sql_ = "INSERT INTO " + quote_ident(table) + " VALUES (";
        for (std::size_t i = 0; i < columns; ++i) sql_ += i ? ", ?" : "?";
        sql_ += ")";
        backend_.execute("BEGIN");
        stmt_ = impl_.prepare(sql_);
        columns_ = columns;
    }

    ~SqliteInserter() override {
        sqlite3_finalize(stmt_);
        if (!done_) {
            try {
                backend_.execute("ROLLBACK");
            } catch (...) {
            }
        }
    }

    void add(const std::vector<Value>& row) override {
        if (row.size() != columns_) throw BackendError("row has " + std::to_string(row.size()) + " values, expected " +
                                                           std::to_string(columns_), sql_);
        for (std::size_t i = 0; i < row.size(); ++i) {
            const int idx = static_cast<int>(i) + 1;
            if (const auto* v = std::get_if<std::int64_t>(&row[i])) {
                sqlite3_bind_int64(stmt_, idx, *v);
            } else {
                const auto& s = std::get<std::string>(row[i]);
                sqlite3_bind_text(stmt_, idx, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
            }
        }
        int rc = sqlite3_step(stmt_);
        if (rc != SQLITE_DONE) impl_.fail(sql_, rc);
        sqlite3_reset(stmt_);
        ++count_;
    }

    std::int64_t finish() override {
        sqlite3_finalize(stmt_);
        stmt_ = nullptr;
        backend_.execute("COMMIT");
        done_ = true;
        return count_;
    }

private:
    SqliteBackend& backend_;
    SqliteBackend::Impl& impl_;
    sqlite3_stmt* stmt_ = nullptr;
    std::string sql_;
    std::size_t columns_ = 0;
    std::int64_t count_ = 0;
    bool done_ = false;
};

}  // namespace

std::unique_ptr<BulkInserter> SqliteBackend::bulk_insert(const std::string& table, std::size_t columns) {
    return std::make_unique<SqliteInserter>(*this, *impl_, table, columns);
}

void SqliteBackend::set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) {
    impl_->deadline = deadline;
    impl_->timed_out = false;
}

BackendProfile SqliteBackend::probe_profile() {
    BackendProfile p;
    try {
        scalar("SELECT 1 EXCEPT SELECT 2");
    } catch (const BackendError&) {
        p.dialect = SqlDialect::NoExcept;
    }
    return p;
}

std::string resolve_connection(const ConnectionSpec& spec, const std::string& base_dir) {
    if (spec.quoted) return spec.database;
    std::filesystem::path dir = base_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(base_dir);
    return (dir / (spec.database + ".db")).string();
}

std::unique_ptr<Backend> connect(const ConnectionSpec& spec, const std::string& base_dir) {
    return std::make_unique<SqliteBackend>(resolve_connection(spec, base_dir));
}

}  // namespace dlvdb
