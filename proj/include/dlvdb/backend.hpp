#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlvdb/ast.hpp"
#include "dlvdb/binding.hpp"
#include "dlvdb/directives.hpp"

namespace dlvdb {

/// A statement failed. `what()` carries the backend message and the statement.
class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& message, std::string statement);
    const std::string& statement() const { return statement_; }

private:
    std::string statement_;
};

/// The deadline set with Backend::set_deadline passed while a statement ran.
class TimeoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BackendProfile {
    SqlDialect dialect = SqlDialect::Generic;
    char quote = '"';
    std::size_t max_identifier_length = 0;  // 0: unlimited
};

/// Maps a `LIKE` hint to a profile; MYSQL lacks EXCEPT.
std::optional<BackendProfile> profile_for_system(const std::string& system);

/// Buffered inserts into one table inside a transaction.
class BulkInserter {
public:
    virtual ~BulkInserter() = default;
    virtual void add(const std::vector<Value>& row) = 0;
    /// Commits; returns rows added. Destruction without finish() rolls back.
    virtual std::int64_t finish() = 0;
};

class Backend {
public:
    virtual ~Backend() = default;

    /// Runs one statement; returns the number of rows it changed.
    virtual std::int64_t execute(const std::string& sql) = 0;
    /// First column of the first row as an integer (0 for no rows).
    virtual std::int64_t scalar(const std::string& sql) = 0;
    /// Streams result rows; values are integers or strings. NULL is an error.
    virtual void for_each_row(const std::string& sql, const std::function<void(const std::vector<Value>&)>& fn) = 0;
    /// Table or view.
    virtual bool relation_exists(const std::string& name) = 0;
    virtual std::vector<std::string> columns(const std::string& table) = 0;
    virtual std::unique_ptr<BulkInserter> bulk_insert(const std::string& table, std::size_t columns) = 0;
    /// Interrupt statements once `deadline` passes (nullopt: never).
    virtual void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) = 0;
    /// Auto-detected dialect support.
    virtual BackendProfile probe_profile() = 0;
    virtual std::string describe() const = 0;

    std::int64_t count_rows(const std::string& table);
};

class SqliteBackend final : public Backend {
public:
    /// `path` may be ":memory:".
    explicit SqliteBackend(const std::string& path);
    ~SqliteBackend() override;
    SqliteBackend(const SqliteBackend&) = delete;
    SqliteBackend& operator=(const SqliteBackend&) = delete;

    std::int64_t execute(const std::string& sql) override;
    std::int64_t scalar(const std::string& sql) override;
    void for_each_row(const std::string& sql, const std::function<void(const std::vector<Value>&)>& fn) override;
    bool relation_exists(const std::string& name) override;
    std::vector<std::string> columns(const std::string& table) override;
    std::unique_ptr<BulkInserter> bulk_insert(const std::string& table, std::size_t columns) override;
    void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) override;
    BackendProfile probe_profile() override;
    std::string describe() const override { return "sqlite:" + path_; }

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
    std::string path_;
};

/// File path a connection refers to: a quoted name is used verbatim, otherwise
/// `<base_dir>/<name>.db`. User and password are ignored by the embedded backend.
std::string resolve_connection(const ConnectionSpec& spec, const std::string& base_dir);

std::unique_ptr<Backend> connect(const ConnectionSpec& spec, const std::string& base_dir);

}  // namespace dlvdb
