#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monocard/rng.hpp"
#include "monocard/sql_model.hpp"

namespace monocard {

struct GenConfig {
    std::uint64_t seed = 0;
    int maxTables = 3;
    int maxColumnsPerTable = 3;
    int insertsPerTable = 100;
    int maxJoins = 2;
    int predicateDepth = 2;
    Dialect dialect = Dialect::Reference;

    /// Throws ConfigError when a bound is below 1 (predicateDepth may be 0).
    void validate() const;
};

struct DatabaseState {
    Schema schema;
    std::vector<std::string> setupStatements;  // CREATE* -> INSERT* -> ANALYZE*
    std::map<std::string, std::int64_t> rowCounts;
};

/// Optional shape constraints for generateQuery.
struct QueryShape {
    std::optional<JoinType> forceJoin;  // at least one join, the first of this type
    std::optional<std::string> fromTable;
};

DatabaseState generateDatabase(const GenConfig& config, Rng& rng);

SelectQuery generateQuery(const Schema& schema, const GenConfig& config, Rng& rng, const QueryShape& shape = {});

/// A literal compatible with column's type. NULL only for nullable columns.
ExprPtr literalFor(const ColumnDef& column, Rng& rng);
Value valueFor(const ColumnDef& column, Rng& rng);

/// A column paired with its owning table, used as predicate material.
struct ScopedColumn {
    std::string table;
    const ColumnDef* column;
};

std::vector<ScopedColumn> scopeColumns(const Schema& schema, const std::vector<std::string>& tables);

/// Random boolean expression over the given columns. depth 0 yields an atom.
ExprPtr generatePredicate(const std::vector<ScopedColumn>& columns, int depth, Rng& rng);

}  // namespace monocard
