#include "monocard/sql_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "monocard/errors.hpp"

namespace monocard {

std::string_view dataTypeName(DataType type) {
    switch (type) {
        case DataType::Integer: return "INTEGER";
        case DataType::Text: return "TEXT";
        case DataType::Boolean: return "BOOLEAN";
        case DataType::Decimal: return "DECIMAL";
    }
    return "?";
}

std::string_view dialectName(Dialect dialect) {
    switch (dialect) {
        case Dialect::MySQLFamily: return "mysql";
        case Dialect::PostgresFamily: return "postgres";
        case Dialect::Reference: return "reference";
    }
    return "?";
}

bool supportsFullJoin(Dialect dialect) { return dialect != Dialect::MySQLFamily; }

double Value::asNumber() const {
    if (isInteger()) return static_cast<double>(asInteger());
    return asDecimal();
}

namespace {

std::string formatDecimal(double d) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d, std::chars_format::fixed);
    std::string out(buf, end);
    if (out.find('.') == std::string::npos) {
        out += ".0";
    }
    return out;
}

}  // namespace

std::string Value::toSql() const {
    struct Visitor {
        std::string operator()(std::monostate) const { return "NULL"; }
        std::string operator()(bool b) const { return b ? "TRUE" : "FALSE"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return formatDecimal(d); }
        std::string operator()(const std::string& s) const {
            std::string out = "'";
            for (char c : s) {
                if (c == '\'') out += '\'';
                out += c;
            }
            out += '\'';
            return out;
        }
    };
    return std::visit(Visitor{}, storage_);
}

const ColumnDef* TableDef::findColumn(std::string_view column) const {
    for (const auto& c : columns) {
        if (c.name == column) return &c;
    }
    return nullptr;
}

std::optional<std::size_t> TableDef::columnIndex(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == column) return i;
    }
    return std::nullopt;
}

const TableDef* findTable(const Schema& schema, std::string_view name) {
    for (const auto& t : schema) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::string_view compareOpText(CompareOp op) {
    switch (op) {
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Ge: return ">=";
        case CompareOp::Gt: return ">";
    }
    return "?";
}

CompareOp flipCompareOp(CompareOp op) {
    switch (op) {
        case CompareOp::Lt: return CompareOp::Gt;
        case CompareOp::Le: return CompareOp::Ge;
        case CompareOp::Ge: return CompareOp::Le;
        case CompareOp::Gt: return CompareOp::Lt;
        default: return op;
    }
}

std::string_view joinKeyword(JoinType type) {
    switch (type) {
        case JoinType::Inner: return "INNER JOIN";
        case JoinType::Left: return "LEFT JOIN";
        case JoinType::Right: return "RIGHT JOIN";
        case JoinType::Full: return "FULL JOIN";
        case JoinType::Cross: return "CROSS JOIN";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Builders and structural helpers
// ---------------------------------------------------------------------------

ExprPtr col(std::string table, std::string column) {
    return std::make_shared<const Expr>(Expr{ColumnRef{std::move(table), std::move(column)}});
}

ExprPtr lit(Value value) { return std::make_shared<const Expr>(Expr{Literal{std::move(value)}}); }

ExprPtr cmp(CompareOp op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<const Expr>(Expr{Comparison{op, std::move(lhs), std::move(rhs)}});
}

ExprPtr logical(LogicalOp op, std::vector<ExprPtr> operands) {
    if (op == LogicalOp::Not) {
        if (operands.size() != 1) throw std::invalid_argument("NOT takes one operand");
    } else if (operands.size() < 2) {
        throw std::invalid_argument("AND/OR take at least two operands");
    }
    return std::make_shared<const Expr>(Expr{Logical{op, std::move(operands)}});
}

namespace {

void appendFlattened(LogicalOp op, const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (const auto* l = e->as<Logical>(); l && l->op == op) {
        out.insert(out.end(), l->operands.begin(), l->operands.end());
    } else {
        out.push_back(e);
    }
}

ExprPtr flatBinary(LogicalOp op, ExprPtr a, ExprPtr b) {
    std::vector<ExprPtr> ops;
    appendFlattened(op, a, ops);
    appendFlattened(op, b, ops);
    return logical(op, std::move(ops));
}

}  // namespace

ExprPtr andOf(ExprPtr a, ExprPtr b) { return flatBinary(LogicalOp::And, std::move(a), std::move(b)); }
ExprPtr orOf(ExprPtr a, ExprPtr b) { return flatBinary(LogicalOp::Or, std::move(a), std::move(b)); }
ExprPtr notOf(ExprPtr operand) { return logical(LogicalOp::Not, {std::move(operand)}); }

ExprPtr isNull(ExprPtr operand, bool negated) {
    return std::make_shared<const Expr>(Expr{IsNull{std::move(operand), negated}});
}

ExprPtr between(ExprPtr operand, ExprPtr low, ExprPtr high) {
    return std::make_shared<const Expr>(Expr{Between{std::move(operand), std::move(low), std::move(high)}});
}

ExprPtr call(std::string name, std::vector<ExprPtr> args) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    return std::make_shared<const Expr>(Expr{FunctionCall{std::move(name), std::move(args)}});
}

ExprPtr star() { return std::make_shared<const Expr>(Expr{Star{}}); }

bool exprEquals(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return exprEquals(*a, *b);
}

namespace {

bool listEquals(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!exprEquals(a[i], b[i])) return false;
    }
    return true;
}

}  // namespace

bool exprEquals(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, ColumnRef>) {
                return x == y;
            } else if constexpr (std::is_same_v<T, Literal>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, Comparison>) {
                return x.op == y.op && exprEquals(x.lhs, y.lhs) && exprEquals(x.rhs, y.rhs);
            } else if constexpr (std::is_same_v<T, Logical>) {
                return x.op == y.op && listEquals(x.operands, y.operands);
            } else if constexpr (std::is_same_v<T, IsNull>) {
                return x.negated == y.negated && exprEquals(x.operand, y.operand);
            } else if constexpr (std::is_same_v<T, Between>) {
                return exprEquals(x.operand, y.operand) && exprEquals(x.low, y.low) && exprEquals(x.high, y.high);
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                return x.name == y.name && listEquals(x.args, y.args);
            } else {
                return true;
            }
        },
        a.node);
}

bool isAggregateName(std::string_view upperName) {
    return upperName == "COUNT" || upperName == "MIN" || upperName == "MAX" || upperName == "SUM";
}

namespace {

template <class F>
void forEachChild(const Expr& e, F&& f) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Comparison>) {
                f(*x.lhs);
                f(*x.rhs);
            } else if constexpr (std::is_same_v<T, Logical>) {
                for (const auto& o : x.operands) f(*o);
            } else if constexpr (std::is_same_v<T, IsNull>) {
                f(*x.operand);
            } else if constexpr (std::is_same_v<T, Between>) {
                f(*x.operand);
                f(*x.low);
                f(*x.high);
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                for (const auto& a : x.args) f(*a);
            }
        },
        e.node);
}

void collectColumns(const Expr& e, std::vector<ColumnRef>& out) {
    if (const auto* c = e.as<ColumnRef>()) {
        if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
        return;
    }
    forEachChild(e, [&](const Expr& child) { collectColumns(child, out); });
}

}  // namespace

bool containsAggregate(const Expr& e) {
    if (const auto* f = e.as<FunctionCall>(); f && isAggregateName(f->name)) return true;
    bool found = false;
    forEachChild(e, [&](const Expr& child) { found = found || containsAggregate(child); });
    return found;
}

std::vector<ColumnRef> referencedColumns(const Expr& e) {
    std::vector<ColumnRef> out;
    collectColumns(e, out);
    return out;
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
    if (!e) return {};
    if (const auto* l = e->as<Logical>(); l && l->op == LogicalOp::And) return l->operands;
    return {e};
}

std::vector<std::string> SelectQuery::tables() const {
    std::vector<std::string> out{fromTable};
    for (const auto& j : joins) out.push_back(j.table);
    return out;
}

bool queryEquals(const SelectQuery& a, const SelectQuery& b) {
    if (a.quantifier != b.quantifier || a.fromTable != b.fromTable || a.limit != b.limit) return false;
    if (!listEquals(a.selectList, b.selectList) || !listEquals(a.groupBy, b.groupBy)) return false;
    if (!exprEquals(a.where, b.where) || !exprEquals(a.having, b.having)) return false;
    if (a.joins.size() != b.joins.size()) return false;
    for (std::size_t i = 0; i < a.joins.size(); ++i) {
        const auto& x = a.joins[i];
        const auto& y = b.joins[i];
        if (x.type != y.type || x.table != y.table || !exprEquals(x.on, y.on)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

// Binding strength, loosest first.
enum Prec { kOr = 1, kAnd = 2, kNot = 3, kPredicate = 4, kPrimary = 5 };

int precedenceOf(const Expr& e) {
    if (const auto* l = e.as<Logical>()) {
        switch (l->op) {
            case LogicalOp::Or: return kOr;
            case LogicalOp::And: return kAnd;
            case LogicalOp::Not: return kNot;
        }
    }
    if (e.is<Comparison>() || e.is<IsNull>() || e.is<Between>()) return kPredicate;
    return kPrimary;
}

class ExprWriter {
public:
    explicit ExprWriter(Dialect dialect) : dialect_(dialect) {}

    void write(const Expr& e, int minPrec, std::string& out) const {
        const bool parens = precedenceOf(e) < minPrec;
        if (parens) out += '(';
        writeBare(e, out);
        if (parens) out += ')';
    }

private:
    void writeBare(const Expr& e, std::string& out) const {
        std::visit([&](const auto& x) { writeNode(x, out); }, e.node);
    }

    void writeNode(const ColumnRef& c, std::string& out) const {
        if (!c.table.empty()) {
            out += c.table;
            out += '.';
        }
        out += c.column;
    }

    void writeNode(const Literal& l, std::string& out) const { out += l.value.toSql(); }

    void writeNode(const Comparison& c, std::string& out) const {
        write(*c.lhs, kPrimary, out);
        out += compareOpText(c.op);
        std::string rhs;
        write(*c.rhs, kPrimary, rhs);
        // "!=-1" lexes as a single operator in PostgreSQL.
        if (!rhs.empty() && rhs.front() == '-') out += ' ';
        out += rhs;
    }

    void writeNode(const Logical& l, std::string& out) const {
        if (l.op == LogicalOp::Not) {
            out += "NOT (";
            write(*l.operands.front(), kOr, out);
            out += ')';
            return;
        }
        const bool isOr = l.op == LogicalOp::Or;
        // AND operands inside OR are parenthesized for readability; a nested
        // operand of the same operator keeps its grouping.
        const int childMin = kNot;
        for (std::size_t i = 0; i < l.operands.size(); ++i) {
            if (i > 0) out += isOr ? " OR " : " AND ";
            write(*l.operands[i], childMin, out);
        }
    }

    void writeNode(const IsNull& n, std::string& out) const {
        write(*n.operand, kPrimary, out);
        out += n.negated ? " IS NOT NULL" : " IS NULL";
    }

    void writeNode(const Between& b, std::string& out) const {
        write(*b.operand, kPrimary, out);
        out += " BETWEEN ";
        write(*b.low, kPrimary, out);
        out += " AND ";
        write(*b.high, kPrimary, out);
    }

    void writeNode(const FunctionCall& f, std::string& out) const {
        out += f.name;
        out += '(';
        if (f.args.empty() && f.name == "COUNT") {
            out += '*';
        }
        for (std::size_t i = 0; i < f.args.size(); ++i) {
            if (i > 0) out += ", ";
            write(*f.args[i], kOr, out);
        }
        out += ')';
    }

    void writeNode(const Star&, std::string& out) const { out += '*'; }

    Dialect dialect_;
};

}  // namespace

std::string renderExpr(const Expr& expr, Dialect dialect) {
    std::string out;
    ExprWriter(dialect).write(expr, kOr, out);
    return out;
}

std::string render(const SelectQuery& query, Dialect dialect, const Schema& schema) {
    if (auto r = validate(query, schema); !r) {
        if (r.kind == ValidationErrorKind::InvariantViolation) {
            throw Error(r.path + ": " + r.message);
        }
        throw UnresolvedColumn(r.path + ": " + r.message);
    }
    return render(query, dialect);
}

std::string render(const SelectQuery& query, Dialect dialect) {
    ExprWriter w(dialect);
    std::string out = "SELECT ";
    if (query.quantifier == Quantifier::Distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < query.selectList.size(); ++i) {
        if (i > 0) out += ", ";
        w.write(*query.selectList[i], kOr, out);
    }
    out += " FROM ";
    out += query.fromTable;
    for (const auto& j : query.joins) {
        if (j.type == JoinType::Full && !supportsFullJoin(dialect)) {
            throw UnsupportedFeature("FULL JOIN is not available in the " + std::string(dialectName(dialect)) +
                                     " dialect");
        }
        out += ' ';
        out += joinKeyword(j.type);
        out += ' ';
        out += j.table;
        if (j.on) {
            out += " ON ";
            w.write(*j.on, kOr, out);
        }
    }
    if (query.where) {
        out += " WHERE ";
        w.write(*query.where, kOr, out);
    }
    if (query.hasGroupBy()) {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < query.groupBy.size(); ++i) {
            if (i > 0) out += ", ";
            w.write(*query.groupBy[i], kOr, out);
        }
    }
    if (query.having) {
        out += " HAVING ";
        w.write(*query.having, kOr, out);
    }
    if (query.limit) {
        out += " LIMIT ";
        out += std::to_string(*query.limit);
    }
    return out;
}

namespace {

std::string_view columnTypeSql(DataType type, Dialect dialect) {
    switch (type) {
        case DataType::Integer: return "INT";
        case DataType::Text: return dialect == Dialect::MySQLFamily ? "VARCHAR(64)" : "TEXT";
        case DataType::Boolean: return "BOOLEAN";
        case DataType::Decimal: return "DECIMAL(12,2)";
    }
    return "?";
}

}  // namespace

std::string renderCreateTable(const TableDef& table, Dialect dialect) {
    std::string out = "CREATE TABLE " + table.name + " (";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        const auto& c = table.columns[i];
        if (i > 0) out += ", ";
        out += c.name;
        out += ' ';
        out += columnTypeSql(c.dataType, dialect);
        if (!c.nullable) out += " NOT NULL";
        if (c.unique) out += " UNIQUE";
    }
    out += ')';
    return out;
}

std::string renderInsert(const std::string& table, const std::vector<Value>& row, Dialect) {
    std::string out = "INSERT INTO " + table + " VALUES (";
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out += ", ";
        out += row[i].toSql();
    }
    out += ')';
    return out;
}

std::string renderAnalyze(const std::string& table, Dialect dialect) {
    return dialect == Dialect::MySQLFamily ? "ANALYZE TABLE " + table : "ANALYZE " + table;
}

// ---------------------------------------------------------------------------
// Validation and resolution
// ---------------------------------------------------------------------------

namespace {

struct Scope {
    const Schema& schema;
    std::vector<const TableDef*> tables;
};

ValidationResult failure(ValidationErrorKind kind, std::string path, std::string message) {
    ValidationResult r;
    r.ok = false;
    r.kind = kind;
    r.path = std::move(path);
    r.message = std::move(message);
    return r;
}

// Returns the table owning the column, or a failure.
std::variant<const TableDef*, ValidationResult> lookupColumn(const ColumnRef& c, const Scope& scope,
                                                             const std::string& path) {
    if (!c.table.empty()) {
        for (const auto* t : scope.tables) {
            if (t->name == c.table) {
                if (t->findColumn(c.column)) return t;
                return failure(ValidationErrorKind::UnresolvedColumn, path,
                               "unknown column " + c.table + "." + c.column);
            }
        }
        return failure(ValidationErrorKind::UnresolvedColumn, path, "unknown table " + c.table + " for column " +
                                                                        c.column);
    }
    const TableDef* owner = nullptr;
    for (const auto* t : scope.tables) {
        if (t->findColumn(c.column)) {
            if (owner) {
                return failure(ValidationErrorKind::AmbiguousColumn, path, "ambiguous column " + c.column);
            }
            owner = t;
        }
    }
    if (!owner) return failure(ValidationErrorKind::UnresolvedColumn, path, "unknown column " + c.column);
    return owner;
}

ValidationResult checkColumns(const Expr& e, const Scope& scope, const std::string& path) {
    for (const auto& c : referencedColumns(e)) {
        auto r = lookupColumn(c, scope, path);
        if (auto* v = std::get_if<ValidationResult>(&r)) return *v;
    }
    return {};
}

bool hasStar(const Expr& e) {
    if (e.is<Star>()) return true;
    bool found = false;
    forEachChild(e, [&](const Expr& child) { found = found || hasStar(child); });
    return found;
}

ColumnRef qualify(const ColumnRef& c, const Scope& scope) {
    auto r = lookupColumn(c, scope, "");
    if (auto* v = std::get_if<ValidationResult>(&r)) throw UnresolvedColumn(v->message);
    return ColumnRef{std::get<const TableDef*>(r)->name, c.column};
}

ExprPtr qualifyExpr(const ExprPtr& e, const Scope& scope) {
    if (!e) return e;
    return std::visit(
        [&](const auto& x) -> ExprPtr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ColumnRef>) {
                return std::make_shared<const Expr>(Expr{qualify(x, scope)});
            } else if constexpr (std::is_same_v<T, Comparison>) {
                return cmp(x.op, qualifyExpr(x.lhs, scope), qualifyExpr(x.rhs, scope));
            } else if constexpr (std::is_same_v<T, Logical>) {
                std::vector<ExprPtr> ops;
                for (const auto& o : x.operands) ops.push_back(qualifyExpr(o, scope));
                return logical(x.op, std::move(ops));
            } else if constexpr (std::is_same_v<T, IsNull>) {
                return isNull(qualifyExpr(x.operand, scope), x.negated);
            } else if constexpr (std::is_same_v<T, Between>) {
                return between(qualifyExpr(x.operand, scope), qualifyExpr(x.low, scope), qualifyExpr(x.high, scope));
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                std::vector<ExprPtr> args;
                for (const auto& a : x.args) args.push_back(qualifyExpr(a, scope));
                return call(x.name, std::move(args));
            } else {
                return e;
            }
        },
        e->node);
}

bool isGroupKey(const Expr& e, const std::vector<ExprPtr>& keys) {
    for (const auto& k : keys) {
        if (exprEquals(e, *k)) return true;
    }
    return false;
}

// Every column outside an aggregate must be a grouping key.
bool groupedOnly(const Expr& e, const std::vector<ExprPtr>& keys) {
    if (isGroupKey(e, keys)) return true;
    if (const auto* f = e.as<FunctionCall>(); f && isAggregateName(f->name)) return true;
    if (e.is<ColumnRef>() || e.is<Star>()) return false;
    bool ok = true;
    forEachChild(e, [&](const Expr& child) { ok = ok && groupedOnly(child, keys); });
    return ok;
}

}  // namespace

ValidationResult validate(const SelectQuery& query, const Schema& schema) {
    Scope scope{schema, {}};
    const TableDef* from = findTable(schema, query.fromTable);
    if (!from) return failure(ValidationErrorKind::UnresolvedTable, "fromTable", "unknown table " + query.fromTable);
    scope.tables.push_back(from);

    std::set<std::string> seen{query.fromTable};
    for (std::size_t i = 0; i < query.joins.size(); ++i) {
        const auto& j = query.joins[i];
        const std::string path = "joins[" + std::to_string(i) + "]";
        const TableDef* t = findTable(schema, j.table);
        if (!t) return failure(ValidationErrorKind::UnresolvedTable, path, "unknown table " + j.table);
        if (!seen.insert(j.table).second) {
            return failure(ValidationErrorKind::InvariantViolation, path, "duplicate-table");
        }
        scope.tables.push_back(t);
        if (j.type == JoinType::Cross && j.on) {
            return failure(ValidationErrorKind::InvariantViolation, path + ".on", "cross-join-has-no-on");
        }
        if (j.type != JoinType::Cross && !j.on) {
            return failure(ValidationErrorKind::InvariantViolation, path + ".on", "join-requires-on");
        }
        if (j.on) {
            if (containsAggregate(*j.on) || hasStar(*j.on)) {
                return failure(ValidationErrorKind::InvariantViolation, path + ".on", "aggregate-in-on");
            }
            if (auto r = checkColumns(*j.on, scope, path + ".on"); !r) return r;
        }
    }

    if (query.selectList.empty()) {
        return failure(ValidationErrorKind::InvariantViolation, "selectList", "empty-select-list");
    }
    if (query.having && !query.hasGroupBy()) {
        return failure(ValidationErrorKind::InvariantViolation, "having", "having-requires-groupBy");
    }
    if (query.limit && *query.limit <= 0) {
        return failure(ValidationErrorKind::InvariantViolation, "limit", "limit-must-be-positive");
    }

    bool anyAggregate = false;
    for (std::size_t i = 0; i < query.selectList.size(); ++i) {
        const auto& item = *query.selectList[i];
        const std::string path = "selectList[" + std::to_string(i) + "]";
        if (hasStar(item) && !item.is<Star>()) {
            return failure(ValidationErrorKind::InvariantViolation, path, "star-outside-select-list");
        }
        if (auto r = checkColumns(item, scope, path); !r) return r;
        anyAggregate = anyAggregate || containsAggregate(item);
    }
    if (query.where) {
        if (containsAggregate(*query.where) || hasStar(*query.where)) {
            return failure(ValidationErrorKind::InvariantViolation, "where", "aggregate-in-where");
        }
        if (auto r = checkColumns(*query.where, scope, "where"); !r) return r;
    }
    for (std::size_t i = 0; i < query.groupBy.size(); ++i) {
        const std::string path = "groupBy[" + std::to_string(i) + "]";
        const auto& key = *query.groupBy[i];
        if (containsAggregate(key) || hasStar(key)) {
            return failure(ValidationErrorKind::InvariantViolation, path, "aggregate-in-group-by");
        }
        if (auto r = checkColumns(key, scope, path); !r) return r;
    }
    if (query.having) {
        if (auto r = checkColumns(*query.having, scope, "having"); !r) return r;
    }

    // Grouping compatibility, checked on the qualified form so that t0.c0 and
    // c0 compare equal.
    if (query.hasGroupBy() || anyAggregate) {
        const SelectQuery q = resolve(query, schema);
        for (std::size_t i = 0; i < q.selectList.size(); ++i) {
            if (!groupedOnly(*q.selectList[i], q.groupBy)) {
                return failure(ValidationErrorKind::InvariantViolation, "selectList[" + std::to_string(i) + "]",
                               "select-not-grouped");
            }
        }
        if (q.having && !groupedOnly(*q.having, q.groupBy)) {
            return failure(ValidationErrorKind::InvariantViolation, "having", "having-not-grouped");
        }
    }
    return {};
}

SelectQuery resolve(const SelectQuery& query, const Schema& schema) {
    Scope scope{schema, {}};
    for (const auto& name : query.tables()) {
        const TableDef* t = findTable(schema, name);
        if (!t) throw UnresolvedColumn("unknown table " + name);
        scope.tables.push_back(t);
    }
    SelectQuery out = query;
    for (auto& item : out.selectList) item = qualifyExpr(item, scope);
    // ON conditions see only the tables joined so far.
    for (std::size_t i = 0; i < out.joins.size(); ++i) {
        Scope partial{schema, {scope.tables.begin(), scope.tables.begin() + static_cast<std::ptrdiff_t>(i) + 2}};
        out.joins[i].on = qualifyExpr(out.joins[i].on, partial);
    }
    out.where = qualifyExpr(out.where, scope);
    for (auto& k : out.groupBy) k = qualifyExpr(k, scope);
    out.having = qualifyExpr(out.having, scope);
    return out;
}

}  // namespace monocard
