#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "monocard/plan_model.hpp"
#include "monocard/sql_model.hpp"

namespace monocard {

/// Estimator defects that can be switched on to check that the oracle notices them.
enum class BugId {
    OrDoubleCount,     // OR selectivity in outer-join ON conditions applied twice
    DistinctInflate,   // DISTINCT estimated from base table sizes, ignoring its input
    OrOperandOverlap,  // same-column OR in WHERE/HAVING combined as a product
};
using BugSet = std::set<BugId>;

std::string_view bugName(BugId bug);
/// Accepts the names above (case-insensitive). Throws ConfigError.
BugId parseBug(std::string_view name);
std::vector<BugId> allBugs();

struct ColumnStats {
    std::int64_t distinctCount = 0;  // non-NULL distinct values
    std::int64_t nullCount = 0;
    Value minValue;  // NULL when the column holds no non-NULL value
    Value maxValue;
};

struct TableStats {
    std::int64_t rowCount = 0;
    std::vector<ColumnStats> columns;
};

using Row = std::vector<Value>;

struct MemTable {
    TableDef def;
    std::vector<Row> rows;
    std::optional<TableStats> stats;  // last ANALYZE
    bool statsFresh = false;          // false after any DML since that ANALYZE
};

/// In-memory database over the sql-model subset. One handle per session.
class Engine {
public:
    /// Runs CREATE TABLE / INSERT / ANALYZE. Throws ParseError or TargetError.
    void execute(std::string_view sql);
    /// Runs statements in order. Throws StatementError carrying the index.
    void executeSetup(const std::vector<std::string>& statements);

    Schema schema() const;
    const MemTable* table(std::string_view name) const;
    bool hasTable(std::string_view name) const { return table(name) != nullptr; }

    /// Brute-force row count of the query. Throws EvalError, UnresolvedColumn.
    std::int64_t actualCardinality(const SelectQuery& query) const;
    /// Cardinality-annotated plan. Throws StaleStats when a referenced table's
    /// statistics are missing or predate DML.
    PlanNode estimatePlan(const SelectQuery& query) const;

    void setBugs(BugSet bugs) { bugs_ = std::move(bugs); }
    const BugSet& bugs() const { return bugs_; }

private:
    MemTable* mutableTable(std::string_view name);

    std::vector<MemTable> tables_;
    BugSet bugs_;
};

/// Recomputes stats over the table's current rows.
TableStats computeStats(const MemTable& table);

}  // namespace monocard
