#include "monocard/datagen.hpp"

#include <algorithm>
#include <set>

#include "monocard/errors.hpp"

namespace monocard {

void GenConfig::validate() const {
    if (maxTables < 1) throw ConfigError("maxTables must be >= 1");
    if (maxColumnsPerTable < 1) throw ConfigError("maxColumnsPerTable must be >= 1");
    if (insertsPerTable < 1) throw ConfigError("insertsPerTable must be >= 1");
    if (maxJoins < 0) throw ConfigError("maxJoins must be >= 0");
    if (predicateDepth < 0) throw ConfigError("predicateDepth must be >= 0");
}

namespace {

constexpr double kNullChance = 0.1;

const std::vector<std::string> kTextPool = {"", "a", "b", "ab", "abc", "x", "B"};

std::int64_t smallInteger(Rng& rng) {
    // Mostly a tight band around the boundary values so joins and groups collide.
    if (rng.chance(0.75)) return rng.between(-2, 8);
    return rng.between(-100, 100);
}

double smallDecimal(Rng& rng) {
    if (rng.chance(0.75)) return static_cast<double>(rng.between(-8, 16)) / 4.0;
    return static_cast<double>(rng.between(-400, 400)) / 4.0;
}

std::string smallText(Rng& rng) {
    if (rng.chance(0.7)) return rng.pick(kTextPool);
    std::string s;
    const auto len = rng.between(1, 3);
    for (std::int64_t i = 0; i < len; ++i) s += static_cast<char>('a' + rng.below(3));
    return s;
}

Value nonNullValue(DataType type, Rng& rng) {
    switch (type) {
        case DataType::Integer:
            return Value::integer(smallInteger(rng));
        case DataType::Decimal:
            return Value::decimal(smallDecimal(rng));
        case DataType::Text:
            return Value::text(smallText(rng));
        case DataType::Boolean:
            return Value::boolean(rng.chance(0.5));
    }
    return Value::null();
}

DataType randomType(Rng& rng) {
    // Integers dominate: they carry the range predicates most rules need.
    const auto r = rng.below(10);
    if (r < 5) return DataType::Integer;
    if (r < 7) return DataType::Decimal;
    if (r < 9) return DataType::Text;
    return DataType::Boolean;
}

/// Keeps UNIQUE columns collision-free so every generated INSERT succeeds.
class UniqueTracker {
public:
    Value admit(const ColumnDef& column, Value v) {
        if (!column.unique || v.isNull()) return v;
        auto& seen = used_[column.name];
        if (seen.count(v)) {
            switch (column.dataType) {
                case DataType::Integer:
                    v = Value::integer(std::prev(seen.end())->asInteger() + 1);
                    break;
                case DataType::Decimal:
                    v = Value::decimal(std::prev(seen.end())->asDecimal() + 0.25);
                    break;
                case DataType::Text:
                    v = Value::text("u" + std::to_string(seen.size()));
                    while (seen.count(v)) v = Value::text(v.asText() + "u");
                    break;
                case DataType::Boolean:
                    break;  // never unique
            }
        }
        seen.insert(v);
        return v;
    }

private:
    std::map<std::string, std::set<Value>> used_;
};

}  // namespace

Value valueFor(const ColumnDef& column, Rng& rng) {
    if (column.nullable && rng.chance(kNullChance)) return Value::null();
    return nonNullValue(column.dataType, rng);
}

ExprPtr literalFor(const ColumnDef& column, Rng& rng) { return lit(valueFor(column, rng)); }

DatabaseState generateDatabase(const GenConfig& config, Rng& rng) {
    config.validate();
    DatabaseState state;
    const auto tableCount = rng.between(1, config.maxTables);
    for (std::int64_t t = 0; t < tableCount; ++t) {
        TableDef table;
        table.name = "t" + std::to_string(t);
        const auto columnCount = rng.between(1, config.maxColumnsPerTable);
        for (std::int64_t c = 0; c < columnCount; ++c) {
            ColumnDef col;
            col.name = "c" + std::to_string(c);
            col.dataType = randomType(rng);
            col.nullable = rng.chance(0.8);
            col.unique = col.dataType != DataType::Boolean && rng.chance(0.15);
            table.columns.push_back(std::move(col));
        }
        state.schema.push_back(std::move(table));
    }
    for (const auto& table : state.schema) {
        state.setupStatements.push_back(renderCreateTable(table, config.dialect));
    }
    for (const auto& table : state.schema) {
        UniqueTracker unique;
        for (int i = 0; i < config.insertsPerTable; ++i) {
            std::vector<Value> row;
            for (const auto& column : table.columns) row.push_back(unique.admit(column, valueFor(column, rng)));
            state.setupStatements.push_back(renderInsert(table.name, row, config.dialect));
        }
        state.rowCounts[table.name] = config.insertsPerTable;
    }
    for (const auto& table : state.schema) {
        state.setupStatements.push_back(renderAnalyze(table.name, config.dialect));
    }
    return state;
}

std::vector<ScopedColumn> scopeColumns(const Schema& schema, const std::vector<std::string>& tables) {
    std::vector<ScopedColumn> out;
    for (const auto& name : tables) {
        const TableDef* table = findTable(schema, name);
        if (!table) throw UnresolvedColumn("unknown table " + name);
        for (const auto& column : table->columns) out.push_back({table->name, &column});
    }
    return out;
}

namespace {

ExprPtr columnExpr(const ScopedColumn& c) { return col(c.table, c.column->name); }

CompareOp randomOp(Rng& rng) {
    static const std::vector<CompareOp> ops = {CompareOp::Lt, CompareOp::Le, CompareOp::Eq,
                                               CompareOp::Ne, CompareOp::Ge, CompareOp::Gt};
    return rng.pick(ops);
}

ExprPtr atom(const std::vector<ScopedColumn>& columns, const std::vector<ScopedColumn>& all, Rng& rng) {
    const ScopedColumn& c = rng.pick(columns);
    const DataType type = c.column->dataType;
    const auto r = rng.below(100);
    if (r < 50) {
        if (type == DataType::Boolean && rng.chance(0.5)) return columnExpr(c);
        return cmp(randomOp(rng), columnExpr(c), literalFor(*c.column, rng));
    }
    if (r < 60) {
        std::vector<ScopedColumn> peers;
        for (const auto& other : all) {
            if (other.column->dataType == type && (other.table != c.table || other.column != c.column)) {
                peers.push_back(other);
            }
        }
        if (!peers.empty()) return cmp(randomOp(rng), columnExpr(c), columnExpr(rng.pick(peers)));
        return cmp(randomOp(rng), columnExpr(c), lit(nonNullValue(type, rng)));
    }
    if (r < 75) return isNull(columnExpr(c), rng.chance(0.5));
    if (r < 87 && type != DataType::Boolean) {
        return between(columnExpr(c), lit(nonNullValue(type, rng)), lit(nonNullValue(type, rng)));
    }
    if (r < 95 && (type == DataType::Integer || type == DataType::Decimal)) {
        return cmp(randomOp(rng), call("ABS", {columnExpr(c)}), lit(nonNullValue(type, rng)));
    }
    if (r < 97) return lit(Value::boolean(rng.chance(0.7)));
    return cmp(randomOp(rng), columnExpr(c), lit(nonNullValue(type, rng)));
}

ExprPtr predicate(const std::vector<ScopedColumn>& columns, const std::vector<ScopedColumn>& all, int depth,
                  Rng& rng) {
    if (depth <= 0 || rng.chance(0.4)) return atom(columns, all, rng);
    const auto r = rng.below(100);
    if (r < 40) {
        return andOf(predicate(columns, all, depth - 1, rng), predicate(columns, all, depth - 1, rng));
    }
    if (r < 85) {
        if (rng.chance(0.5)) {
            // Same-column disjunction, the shape of range splits like c<1 OR c>1.
            const std::vector<ScopedColumn> one{rng.pick(columns)};
            return orOf(atom(one, one, rng), atom(one, one, rng));
        }
        return orOf(predicate(columns, all, depth - 1, rng), predicate(columns, all, depth - 1, rng));
    }
    return notOf(predicate(columns, all, depth - 1, rng));
}

std::vector<ExprPtr> pickColumns(const std::vector<ScopedColumn>& columns, std::size_t maxCount, Rng& rng) {
    std::vector<std::size_t> idx(columns.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const auto count = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(std::min(maxCount, idx.size()))));
    std::vector<ExprPtr> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(columnExpr(columns[idx[i]]));
    return out;
}

}  // namespace

ExprPtr generatePredicate(const std::vector<ScopedColumn>& columns, int depth, Rng& rng) {
    if (columns.empty()) throw Error("generatePredicate: no columns in scope");
    return predicate(columns, columns, depth, rng);
}

SelectQuery generateQuery(const Schema& schema, const GenConfig& config, Rng& rng, const QueryShape& shape) {
    if (schema.empty()) throw Error("generateQuery: empty schema");
    std::vector<std::string> remaining;
    for (const auto& t : schema) remaining.push_back(t.name);

    SelectQuery q;
    if (shape.fromTable) {
        q.fromTable = *shape.fromTable;
    } else {
        q.fromTable = rng.pick(remaining);
    }
    remaining.erase(std::remove(remaining.begin(), remaining.end(), q.fromTable), remaining.end());

    std::vector<JoinType> joinTypes = {JoinType::Inner, JoinType::Left, JoinType::Right, JoinType::Cross};
    if (supportsFullJoin(config.dialect)) joinTypes.push_back(JoinType::Full);

    const std::int64_t maxJoins = std::min<std::int64_t>(config.maxJoins, static_cast<std::int64_t>(remaining.size()));
    std::int64_t joinCount = maxJoins > 0 ? rng.between(0, maxJoins) : 0;
    if (shape.forceJoin) {
        if (remaining.empty()) throw Error("generateQuery: forced join needs two tables");
        joinCount = std::max<std::int64_t>(joinCount, 1);
    }
    std::vector<std::string> inScope{q.fromTable};
    for (std::int64_t i = 0; i < joinCount; ++i) {
        JoinClause j;
        j.type = (i == 0 && shape.forceJoin) ? *shape.forceJoin : rng.pick(joinTypes);
        const auto pos = rng.below(remaining.size());
        j.table = remaining[pos];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pos));
        inScope.push_back(j.table);
        if (j.type != JoinType::Cross) {
            const auto all = scopeColumns(schema, inScope);
            const auto right = scopeColumns(schema, {j.table});
            std::vector<ScopedColumn> equiPairs;
            const ScopedColumn& rc = rng.pick(right);
            for (const auto& c : all) {
                if (c.table != j.table && c.column->dataType == rc.column->dataType) equiPairs.push_back(c);
            }
            if (!equiPairs.empty() && rng.chance(0.4)) {
                j.on = cmp(CompareOp::Eq, columnExpr(rng.pick(equiPairs)), columnExpr(rc));
            } else {
                j.on = generatePredicate(all, std::max(config.predicateDepth, 1), rng);
            }
        }
        q.joins.push_back(std::move(j));
    }

    const auto columns = scopeColumns(schema, inScope);
    if (rng.chance(0.2)) {
        q.groupBy = pickColumns(columns, 2, rng);
        const auto keyCount = rng.between(1, static_cast<std::int64_t>(q.groupBy.size()));
        q.selectList.assign(q.groupBy.begin(), q.groupBy.begin() + keyCount);
        if (rng.chance(0.5)) q.selectList.push_back(call("COUNT", {}));
        if (config.predicateDepth > 0 && rng.chance(0.4)) {
            std::vector<ScopedColumn> keys;
            for (const auto& k : q.groupBy) {
                const auto* ref = k->as<ColumnRef>();
                for (const auto& c : columns) {
                    if (c.table == ref->table && c.column->name == ref->column) keys.push_back(c);
                }
            }
            q.having = generatePredicate(keys, config.predicateDepth, rng);
        }
    } else if (rng.chance(0.3)) {
        q.selectList.push_back(star());
    } else {
        q.selectList = pickColumns(columns, 3, rng);
    }
    if (rng.chance(0.25)) q.quantifier = Quantifier::Distinct;
    if (config.predicateDepth > 0 && rng.chance(0.5)) q.where = generatePredicate(columns, config.predicateDepth, rng);
    if (rng.chance(0.3)) q.limit = rng.between(1, 50);
    return q;
}

}  // namespace monocard
