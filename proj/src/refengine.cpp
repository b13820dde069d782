#include "monocard/refengine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "monocard/errors.hpp"
#include "monocard/sql_parser.hpp"

namespace monocard {

std::string_view bugName(BugId bug) {
    switch (bug) {
        case BugId::OrDoubleCount:
            return "OrDoubleCount";
        case BugId::DistinctInflate:
            return "DistinctInflate";
        case BugId::OrOperandOverlap:
            return "OrOperandOverlap";
    }
    return "?";
}

std::vector<BugId> allBugs() { return {BugId::OrDoubleCount, BugId::DistinctInflate, BugId::OrOperandOverlap}; }

BugId parseBug(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    for (BugId b : allBugs()) {
        if (lower(bugName(b)) == lower(name)) return b;
    }
    throw ConfigError("unknown bug '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

MemTable* Engine::mutableTable(std::string_view name) {
    for (auto& t : tables_) {
        if (t.def.name == name) return &t;
    }
    return nullptr;
}

const MemTable* Engine::table(std::string_view name) const {
    for (const auto& t : tables_) {
        if (t.def.name == name) return &t;
    }
    return nullptr;
}

Schema Engine::schema() const {
    Schema out;
    for (const auto& t : tables_) out.push_back(t.def);
    return out;
}

namespace {

Value coerce(const Value& v, const ColumnDef& column) {
    if (v.isNull()) {
        if (!column.nullable) throw TargetError("NULL value in NOT NULL column " + column.name);
        return v;
    }
    switch (column.dataType) {
        case DataType::Integer:
            if (v.isInteger()) return v;
            break;
        case DataType::Decimal:
            if (v.isDecimal()) return v;
            if (v.isInteger()) return Value::decimal(static_cast<double>(v.asInteger()));
            break;
        case DataType::Text:
            if (v.isText()) return v;
            break;
        case DataType::Boolean:
            if (v.isBool()) return v;
            if (v.isInteger() && (v.asInteger() == 0 || v.asInteger() == 1)) return Value::boolean(v.asInteger() == 1);
            break;
    }
    throw TargetError("value " + v.toSql() + " does not fit column " + column.name + " " +
                      std::string(dataTypeName(column.dataType)));
}

}  // namespace

TableStats computeStats(const MemTable& table) {
    TableStats stats;
    stats.rowCount = static_cast<std::int64_t>(table.rows.size());
    for (std::size_t c = 0; c < table.def.columns.size(); ++c) {
        ColumnStats cs;
        std::set<Value> distinct;
        for (const auto& row : table.rows) {
            const Value& v = row[c];
            if (v.isNull()) {
                ++cs.nullCount;
            } else {
                distinct.insert(v);
            }
        }
        cs.distinctCount = static_cast<std::int64_t>(distinct.size());
        if (!distinct.empty()) {
            cs.minValue = *distinct.begin();
            cs.maxValue = *distinct.rbegin();
        }
        stats.columns.push_back(std::move(cs));
    }
    return stats;
}

void Engine::execute(std::string_view sql) {
    const Statement stmt = parseStatement(sql);
    if (const auto* create = std::get_if<CreateTableStmt>(&stmt)) {
        if (table(create->table.name)) throw TargetError("table " + create->table.name + " already exists");
        if (create->table.columns.empty()) throw TargetError("table needs at least one column");
        tables_.push_back(MemTable{create->table, {}, std::nullopt, false});
        return;
    }
    if (const auto* insert = std::get_if<InsertStmt>(&stmt)) {
        MemTable* t = mutableTable(insert->table);
        if (!t) throw TargetError("no such table " + insert->table);
        const auto& columns = t->def.columns;
        std::vector<std::size_t> positions;
        if (insert->columns.empty()) {
            for (std::size_t i = 0; i < columns.size(); ++i) positions.push_back(i);
        } else {
            for (const auto& name : insert->columns) {
                const auto idx = t->def.columnIndex(name);
                if (!idx) throw TargetError("no such column " + name);
                positions.push_back(*idx);
            }
        }
        std::vector<Row> batch;
        for (const auto& values : insert->rows) {
            if (values.size() != positions.size()) throw TargetError("value count does not match column count");
            Row row(columns.size());
            for (std::size_t i = 0; i < values.size(); ++i) row[positions[i]] = values[i];
            for (std::size_t c = 0; c < columns.size(); ++c) row[c] = coerce(row[c], columns[c]);
            batch.push_back(std::move(row));
        }
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (!columns[c].unique) continue;
            std::set<Value> seen;
            for (const auto* rows : {&t->rows, &batch}) {
                for (const auto& row : *rows) {
                    if (row[c].isNull()) continue;
                    if (!seen.insert(row[c]).second) {
                        throw TargetError("duplicate value " + row[c].toSql() + " for UNIQUE column " + columns[c].name);
                    }
                }
            }
        }
        for (auto& row : batch) t->rows.push_back(std::move(row));
        t->statsFresh = false;
        return;
    }
    if (const auto* analyze = std::get_if<AnalyzeStmt>(&stmt)) {
        MemTable* t = mutableTable(analyze->table);
        if (!t) throw TargetError("no such table " + analyze->table);
        t->stats = computeStats(*t);
        t->statsFresh = true;
        return;
    }
    throw TargetError("SELECT is not a setup statement");
}

void Engine::executeSetup(const std::vector<std::string>& statements) {
    for (std::size_t i = 0; i < statements.size(); ++i) {
        try {
            execute(statements[i]);
        } catch (const Error& e) {
            throw StatementError(e.what(), i);
        }
    }
}

// ---------------------------------------------------------------------------
// Executor
// ---------------------------------------------------------------------------

namespace {

/// Expression with column references bound to row slots.
struct Compiled {
    enum class Kind { Column, Literal, Compare, And, Or, Not, IsNull, Between, Call, Aggregate };
    Kind kind = Kind::Literal;
    std::size_t slot = 0;
    Value value;
    CompareOp op = CompareOp::Eq;
    bool negated = false;
    std::string name;
    std::vector<Compiled> args;
};

class Layout {
public:
    Layout(const Engine& engine, const std::vector<std::string>& tables) {
        for (const auto& name : tables) {
            const MemTable* t = engine.table(name);
            if (!t) throw UnresolvedColumn("unknown table " + name);
            offsets_.push_back(width_);
            for (std::size_t c = 0; c < t->def.columns.size(); ++c) {
                slots_[name + "." + t->def.columns[c].name] = width_ + c;
            }
            width_ += t->def.columns.size();
            tables_.push_back(t);
        }
    }

    std::size_t slot(const ColumnRef& ref) const {
        auto it = slots_.find(ref.table + "." + ref.column);
        if (it == slots_.end()) throw UnresolvedColumn("unresolved column " + ref.table + "." + ref.column);
        return it->second;
    }

    Compiled compile(const Expr& e) const {
        Compiled out;
        if (const auto* c = e.as<ColumnRef>()) {
            out.kind = Compiled::Kind::Column;
            out.slot = slot(*c);
        } else if (const auto* l = e.as<Literal>()) {
            out.value = l->value;
        } else if (const auto* cmpNode = e.as<Comparison>()) {
            out.kind = Compiled::Kind::Compare;
            out.op = cmpNode->op;
            out.args = {compile(*cmpNode->lhs), compile(*cmpNode->rhs)};
        } else if (const auto* lg = e.as<Logical>()) {
            out.kind = lg->op == LogicalOp::And ? Compiled::Kind::And
                       : lg->op == LogicalOp::Or ? Compiled::Kind::Or
                                                 : Compiled::Kind::Not;
            for (const auto& o : lg->operands) out.args.push_back(compile(*o));
        } else if (const auto* n = e.as<IsNull>()) {
            out.kind = Compiled::Kind::IsNull;
            out.negated = n->negated;
            out.args = {compile(*n->operand)};
        } else if (const auto* b = e.as<Between>()) {
            out.kind = Compiled::Kind::Between;
            out.args = {compile(*b->operand), compile(*b->low), compile(*b->high)};
        } else if (const auto* f = e.as<FunctionCall>()) {
            out.kind = isAggregateName(f->name) ? Compiled::Kind::Aggregate : Compiled::Kind::Call;
            out.name = f->name;
            for (const auto& a : f->args) out.args.push_back(compile(*a));
        } else {
            throw EvalError("'*' is only valid as a select item");
        }
        return out;
    }

    std::size_t width() const { return width_; }
    const std::vector<const MemTable*>& tables() const { return tables_; }
    std::size_t offset(std::size_t i) const { return offsets_[i]; }

private:
    std::unordered_map<std::string, std::size_t> slots_;
    std::vector<std::size_t> offsets_;
    std::vector<const MemTable*> tables_;
    std::size_t width_ = 0;
};

/// -1, 0, 1; throws EvalError on incomparable types. Both operands non-NULL.
int compareValues(const Value& a, const Value& b) {
    if (a.isInteger() && b.isInteger()) {
        return a.asInteger() < b.asInteger() ? -1 : (a.asInteger() > b.asInteger() ? 1 : 0);
    }
    if (a.isNumeric() && b.isNumeric()) {
        const double x = a.asNumber(), y = b.asNumber();
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (a.isText() && b.isText()) {
        const int c = a.asText().compare(b.asText());
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    if (a.isBool() && b.isBool()) return static_cast<int>(a.asBool()) - static_cast<int>(b.asBool());
    throw EvalError("cannot compare " + a.toSql() + " with " + b.toSql());
}

bool compareHolds(CompareOp op, int c) {
    switch (op) {
        case CompareOp::Lt:
            return c < 0;
        case CompareOp::Le:
            return c <= 0;
        case CompareOp::Eq:
            return c == 0;
        case CompareOp::Ne:
            return c != 0;
        case CompareOp::Ge:
            return c >= 0;
        case CompareOp::Gt:
            return c > 0;
    }
    return false;
}

enum class Tri { False, True, Unknown };

Tri truth(const Value& v) {
    if (v.isNull()) return Tri::Unknown;
    if (v.isBool()) return v.asBool() ? Tri::True : Tri::False;
    // Numeric truthiness as in MySQL ("WHERE t0.c1" over an INT column).
    if (v.isNumeric()) return v.asNumber() != 0 ? Tri::True : Tri::False;
    throw EvalError("non-boolean value " + v.toSql() + " in a boolean context");
}

Value fromTri(Tri t) { return t == Tri::Unknown ? Value::null() : Value::boolean(t == Tri::True); }

class Evaluator {
public:
    /// group: rows of the current group (aggregates read these); row: the
    /// representative row for non-aggregate references.
    Value eval(const Compiled& e, const Row& row, const std::vector<const Row*>* group = nullptr) const {
        using K = Compiled::Kind;
        switch (e.kind) {
            case K::Column:
                return row[e.slot];
            case K::Literal:
                return e.value;
            case K::Compare: {
                const Value a = eval(e.args[0], row, group);
                const Value b = eval(e.args[1], row, group);
                if (a.isNull() || b.isNull()) return Value::null();
                return Value::boolean(compareHolds(e.op, compareValues(a, b)));
            }
            case K::And: {
                Tri acc = Tri::True;
                for (const auto& a : e.args) {
                    const Tri t = truth(eval(a, row, group));
                    if (t == Tri::False) return Value::boolean(false);
                    if (t == Tri::Unknown) acc = Tri::Unknown;
                }
                return fromTri(acc);
            }
            case K::Or: {
                Tri acc = Tri::False;
                for (const auto& a : e.args) {
                    const Tri t = truth(eval(a, row, group));
                    if (t == Tri::True) return Value::boolean(true);
                    if (t == Tri::Unknown) acc = Tri::Unknown;
                }
                return fromTri(acc);
            }
            case K::Not: {
                const Tri t = truth(eval(e.args[0], row, group));
                return t == Tri::Unknown ? Value::null() : Value::boolean(t == Tri::False);
            }
            case K::IsNull:
                return Value::boolean(eval(e.args[0], row, group).isNull() != e.negated);
            case K::Between: {
                const Value v = eval(e.args[0], row, group);
                const Value lo = eval(e.args[1], row, group);
                const Value hi = eval(e.args[2], row, group);
                const Tri geLo = v.isNull() || lo.isNull() ? Tri::Unknown
                                 : compareValues(v, lo) >= 0 ? Tri::True
                                                             : Tri::False;
                const Tri leHi = v.isNull() || hi.isNull() ? Tri::Unknown
                                 : compareValues(v, hi) <= 0 ? Tri::True
                                                             : Tri::False;
                if (geLo == Tri::False || leHi == Tri::False) return Value::boolean(false);
                if (geLo == Tri::Unknown || leHi == Tri::Unknown) return Value::null();
                return Value::boolean(true);
            }
            case K::Call:
                return scalarCall(e, row, group);
            case K::Aggregate:
                return aggregate(e, group);
        }
        return Value::null();
    }

    bool holds(const Compiled& e, const Row& row, const std::vector<const Row*>* group = nullptr) const {
        return truth(eval(e, row, group)) == Tri::True;
    }

private:
    Value scalarCall(const Compiled& e, const Row& row, const std::vector<const Row*>* group) const {
        if (e.args.size() != 1) throw EvalError("function " + e.name + " expects one argument");
        const Value v = eval(e.args[0], row, group);
        if (v.isNull()) return v;
        if (e.name == "ABS") {
            if (v.isInteger()) return Value::integer(v.asInteger() < 0 ? -v.asInteger() : v.asInteger());
            if (v.isDecimal()) return Value::decimal(std::fabs(v.asDecimal()));
        } else if (e.name == "LENGTH") {
            if (v.isText()) return Value::integer(static_cast<std::int64_t>(v.asText().size()));
        } else {
            throw EvalError("unsupported function " + e.name);
        }
        throw EvalError("bad argument " + v.toSql() + " to " + e.name);
    }

    Value aggregate(const Compiled& e, const std::vector<const Row*>* group) const {
        if (!group) throw EvalError("aggregate " + e.name + " outside a grouped context");
        if (e.name == "COUNT") {
            if (e.args.empty()) return Value::integer(static_cast<std::int64_t>(group->size()));
            std::int64_t n = 0;
            for (const Row* r : *group) n += eval(e.args[0], *r, nullptr).isNull() ? 0 : 1;
            return Value::integer(n);
        }
        if (e.args.size() != 1) throw EvalError(e.name + " expects one argument");
        Value acc;
        for (const Row* r : *group) {
            const Value v = eval(e.args[0], *r, nullptr);
            if (v.isNull()) continue;
            if (acc.isNull()) {
                acc = v;
            } else if (e.name == "MIN") {
                if (compareValues(v, acc) < 0) acc = v;
            } else if (e.name == "MAX") {
                if (compareValues(v, acc) > 0) acc = v;
            } else if (e.name == "SUM") {
                if (acc.isInteger() && v.isInteger()) {
                    acc = Value::integer(acc.asInteger() + v.asInteger());
                } else if (acc.isNumeric() && v.isNumeric()) {
                    acc = Value::decimal(acc.asNumber() + v.asNumber());
                } else {
                    throw EvalError("SUM over non-numeric value");
                }
            }
        }
        return acc;
    }
};

std::vector<Row> joinRows(const Layout& layout, const SelectQuery& q, const Evaluator& ev) {
    std::vector<Row> current;
    const std::size_t width = layout.width();
    const MemTable* first = layout.tables()[0];
    for (const auto& src : first->rows) {
        Row row(width);
        std::copy(src.begin(), src.end(), row.begin());
        current.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < q.joins.size(); ++j) {
        const auto& join = q.joins[j];
        const MemTable* right = layout.tables()[j + 1];
        const std::size_t offset = layout.offset(j + 1);
        std::optional<Compiled> on;
        if (join.on) on = layout.compile(*join.on);
        std::vector<Row> next;
        std::vector<bool> rightMatched(right->rows.size(), false);
        for (const auto& left : current) {
            bool leftMatched = false;
            for (std::size_t r = 0; r < right->rows.size(); ++r) {
                Row row = left;
                std::copy(right->rows[r].begin(), right->rows[r].end(), row.begin() + static_cast<std::ptrdiff_t>(offset));
                if (join.type == JoinType::Cross || ev.holds(*on, row)) {
                    leftMatched = true;
                    rightMatched[r] = true;
                    next.push_back(std::move(row));
                }
            }
            if (!leftMatched && (join.type == JoinType::Left || join.type == JoinType::Full)) next.push_back(left);
        }
        if (join.type == JoinType::Right || join.type == JoinType::Full) {
            for (std::size_t r = 0; r < right->rows.size(); ++r) {
                if (rightMatched[r]) continue;
                Row row(width);
                std::copy(right->rows[r].begin(), right->rows[r].end(), row.begin() + static_cast<std::ptrdiff_t>(offset));
                next.push_back(std::move(row));
            }
        }
        current = std::move(next);
    }
    return current;
}

}  // namespace

std::int64_t Engine::actualCardinality(const SelectQuery& query) const {
    const Schema s = schema();
    const auto check = validate(query, s);
    if (!check) throw UnresolvedColumn(check.path + ": " + check.message);
    const SelectQuery q = resolve(query, s);
    const Layout layout(*this, q.tables());
    const Evaluator ev;

    std::vector<Row> rows = joinRows(layout, q, ev);
    if (q.where) {
        const Compiled where = layout.compile(*q.where);
        std::vector<Row> kept;
        for (auto& r : rows) {
            if (ev.holds(where, r)) kept.push_back(std::move(r));
        }
        rows = std::move(kept);
    }

    std::vector<Compiled> select;
    std::vector<bool> starItem;
    for (const auto& e : q.selectList) {
        starItem.push_back(e->is<Star>());
        select.push_back(e->is<Star>() ? Compiled{} : layout.compile(*e));
    }
    auto project = [&](const Row& row, const std::vector<const Row*>* group) {
        Row out;
        for (std::size_t i = 0; i < select.size(); ++i) {
            if (starItem[i]) {
                out.insert(out.end(), row.begin(), row.end());
            } else {
                out.push_back(ev.eval(select[i], row, group));
            }
        }
        return out;
    };

    const bool aggregated = q.hasGroupBy() || std::any_of(q.selectList.begin(), q.selectList.end(),
                                                          [](const ExprPtr& e) { return containsAggregate(*e); });
    std::vector<Row> output;
    const bool distinct = q.quantifier == Quantifier::Distinct;
    if (aggregated) {
        std::vector<Compiled> keys;
        for (const auto& k : q.groupBy) keys.push_back(layout.compile(*k));
        std::map<Row, std::vector<const Row*>> groups;
        for (const auto& r : rows) {
            Row key;
            for (const auto& k : keys) key.push_back(ev.eval(k, r));
            groups[std::move(key)].push_back(&r);
        }
        // A scalar aggregate over no rows still yields one row.
        const Row emptyRow(layout.width());
        if (!q.hasGroupBy() && groups.empty()) groups[Row{}] = {};
        std::optional<Compiled> having;
        if (q.having) having = layout.compile(*q.having);
        for (const auto& [key, members] : groups) {
            const Row& rep = members.empty() ? emptyRow : *members.front();
            if (having && !ev.holds(*having, rep, &members)) continue;
            output.push_back(distinct ? project(rep, &members) : Row{});
        }
    } else {
        for (const auto& r : rows) output.push_back(distinct ? project(r, nullptr) : Row{});
    }
    std::int64_t count = static_cast<std::int64_t>(output.size());
    if (distinct) {
        std::set<Row> unique(output.begin(), output.end());
        count = static_cast<std::int64_t>(unique.size());
    }
    if (q.limit) count = std::min(count, *q.limit);
    return count;
}

}  // namespace monocard
