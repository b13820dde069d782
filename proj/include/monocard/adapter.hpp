#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "monocard/plan_model.hpp"
#include "monocard/refengine.hpp"
#include "monocard/sql_model.hpp"

namespace monocard {

/// EXPLAIN output as returned by a target, before normalization.
struct RawPlan {
    enum class Format { Text, Tabular };
    Format format = Format::Text;
    std::string text;              // Text
    std::vector<TabularRow> rows;  // Tabular
};

PlanNode parseRawPlan(const RawPlan& raw);

/// Connection to one DBMS session. Implementations are single-session and
/// not thread-safe; each campaign worker owns its own adapter.
class DbmsAdapter {
public:
    virtual ~DbmsAdapter() = default;

    /// Throws TargetError when the target rejects the statement.
    virtual void executeStatement(const std::string& sql) = 0;
    /// Runs EXPLAIN on a SELECT (never the SELECT itself). Throws TargetError.
    virtual RawPlan explain(const std::string& selectSql) = 0;
    virtual Dialect dialect() const = 0;
    /// Drops and recreates this session's scratch namespace.
    virtual void resetNamespace() = 0;
    /// Row count of a table in the scratch namespace.
    virtual std::int64_t countRows(const std::string& table) = 0;
    virtual std::string identity() const = 0;
    virtual std::string version() const = 0;
};

/// The in-process reference engine behind the adapter interface.
class ReferenceAdapter : public DbmsAdapter {
public:
    explicit ReferenceAdapter(BugSet bugs = {}) : bugs_(std::move(bugs)) { engine_.setBugs(bugs_); }

    void executeStatement(const std::string& sql) override;
    RawPlan explain(const std::string& selectSql) override;
    Dialect dialect() const override { return Dialect::Reference; }
    void resetNamespace() override;
    std::int64_t countRows(const std::string& table) override;
    std::string identity() const override { return "reference"; }
    std::string version() const override;

    Engine& engine() { return engine_; }

private:
    BugSet bugs_;
    Engine engine_;
};

/// Builds an adapter from a --target value: "reference", postgres://,
/// postgresql://, cockroach://, mysql:// or tidb:// URLs. worker selects the
/// scratch namespace. Throws ConfigError for unknown schemes and
/// AdapterUnavailable when the server cannot be reached.
std::unique_ptr<DbmsAdapter> makeAdapter(const std::string& target, const BugSet& bugs, int worker);

}  // namespace monocard
