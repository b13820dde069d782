#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace monocard {

enum class DataType { Integer, Text, Boolean, Decimal };

/// Controls keyword availability when rendering. MySQLFamily has no FULL JOIN.
enum class Dialect { MySQLFamily, PostgresFamily, Reference };

std::string_view dataTypeName(DataType type);
std::string_view dialectName(Dialect dialect);
bool supportsFullJoin(Dialect dialect);

/// A SQL scalar: NULL or a typed value.
class Value {
public:
    using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

    Value() = default;
    static Value null() { return Value(); }
    static Value boolean(bool b) { return Value(Storage(b)); }
    static Value integer(std::int64_t i) { return Value(Storage(i)); }
    static Value decimal(double d) { return Value(Storage(d)); }
    static Value text(std::string s) { return Value(Storage(std::move(s))); }

    bool isNull() const { return std::holds_alternative<std::monostate>(storage_); }
    bool isBool() const { return std::holds_alternative<bool>(storage_); }
    bool isInteger() const { return std::holds_alternative<std::int64_t>(storage_); }
    bool isDecimal() const { return std::holds_alternative<double>(storage_); }
    bool isText() const { return std::holds_alternative<std::string>(storage_); }
    bool isNumeric() const { return isInteger() || isDecimal(); }

    bool asBool() const { return std::get<bool>(storage_); }
    std::int64_t asInteger() const { return std::get<std::int64_t>(storage_); }
    double asDecimal() const { return std::get<double>(storage_); }
    const std::string& asText() const { return std::get<std::string>(storage_); }
    /// Numeric value as double; integers convert exactly for the pool we generate.
    double asNumber() const;

    const Storage& storage() const { return storage_; }

    /// SQL literal text ("NULL", "TRUE", "-3", "0.25", "'ab'").
    std::string toSql() const;

    /// Structural equality (NULL == NULL, 1 != 1.0). Used for grouping and tests.
    friend bool operator==(const Value& a, const Value& b) { return a.storage_ == b.storage_; }
    /// Total order for containers: NULL first, then by type index, then by value.
    friend bool operator<(const Value& a, const Value& b) { return a.storage_ < b.storage_; }

private:
    explicit Value(Storage s) : storage_(std::move(s)) {}
    Storage storage_;
};

struct ColumnDef {
    std::string name;
    DataType dataType = DataType::Integer;
    bool nullable = true;
    bool unique = false;

    friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;

    const ColumnDef* findColumn(std::string_view column) const;
    std::optional<std::size_t> columnIndex(std::string_view column) const;

    friend bool operator==(const TableDef&, const TableDef&) = default;
};

using Schema = std::vector<TableDef>;
const TableDef* findTable(const Schema& schema, std::string_view name);

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class CompareOp { Lt, Le, Eq, Ne, Ge, Gt };
enum class LogicalOp { And, Or, Not };

std::string_view compareOpText(CompareOp op);
/// The operator that holds after swapping operands (a < b  <=>  b > a).
CompareOp flipCompareOp(CompareOp op);

struct ColumnRef {
    std::string table;  // empty until resolved
    std::string column;
    friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct Literal {
    Value value;
};

struct Comparison {
    CompareOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

/// AND/OR carry two or more operands; NOT carries exactly one.
struct Logical {
    LogicalOp op;
    std::vector<ExprPtr> operands;
};

struct IsNull {
    ExprPtr operand;
    bool negated = false;
};

struct Between {
    ExprPtr operand;
    ExprPtr low;
    ExprPtr high;
};

/// Scalar or aggregate call. COUNT with no arguments renders as COUNT(*).
struct FunctionCall {
    std::string name;  // upper case
    std::vector<ExprPtr> args;
};

/// `*` in a select list.
struct Star {};

struct Expr {
    using Node = std::variant<ColumnRef, Literal, Comparison, Logical, IsNull, Between, FunctionCall, Star>;
    Node node;

    template <class T>
    const T* as() const { return std::get_if<T>(&node); }
    template <class T>
    bool is() const { return std::holds_alternative<T>(node); }
};

bool exprEquals(const Expr& a, const Expr& b);
bool exprEquals(const ExprPtr& a, const ExprPtr& b);

// Builders. andOf/orOf flatten nested operands of the same operator so that
// the AST shape matches what the parser produces for the rendered text.
ExprPtr col(std::string table, std::string column);
ExprPtr lit(Value value);
ExprPtr cmp(CompareOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr andOf(ExprPtr a, ExprPtr b);
ExprPtr orOf(ExprPtr a, ExprPtr b);
ExprPtr logical(LogicalOp op, std::vector<ExprPtr> operands);
ExprPtr notOf(ExprPtr operand);
ExprPtr isNull(ExprPtr operand, bool negated = false);
ExprPtr between(ExprPtr operand, ExprPtr low, ExprPtr high);
ExprPtr call(std::string name, std::vector<ExprPtr> args);
ExprPtr star();

bool isAggregateName(std::string_view upperName);
bool containsAggregate(const Expr& e);
/// Every column referenced below e, in first-occurrence order, deduplicated.
std::vector<ColumnRef> referencedColumns(const Expr& e);
/// Top-level conjuncts of e (e itself when it is not an AND).
std::vector<ExprPtr> conjuncts(const ExprPtr& e);

// ---------------------------------------------------------------------------
// SELECT
// ---------------------------------------------------------------------------

enum class JoinType { Inner, Left, Right, Full, Cross };
std::string_view joinKeyword(JoinType type);

struct JoinClause {
    JoinType type = JoinType::Inner;
    std::string table;
    ExprPtr on;  // null for CROSS
};

enum class Quantifier { All, Distinct };

struct SelectQuery {
    Quantifier quantifier = Quantifier::All;
    std::vector<ExprPtr> selectList;
    std::string fromTable;
    std::vector<JoinClause> joins;
    ExprPtr where;                 // null when absent
    std::vector<ExprPtr> groupBy;  // empty when absent
    ExprPtr having;                // null when absent
    std::optional<std::int64_t> limit;

    bool hasGroupBy() const { return !groupBy.empty(); }
    /// FROM table followed by every joined table, in order.
    std::vector<std::string> tables() const;
};

bool queryEquals(const SelectQuery& a, const SelectQuery& b);

/// Renders a full SELECT statement (no trailing semicolon). Deterministic.
/// Throws UnsupportedFeature when the dialect cannot express a node.
std::string render(const SelectQuery& query, Dialect dialect);
/// Same, after validating against schema; throws UnresolvedColumn for
/// references the schema cannot resolve.
std::string render(const SelectQuery& query, Dialect dialect, const Schema& schema);
std::string renderExpr(const Expr& expr, Dialect dialect);

// DDL/DML text used by the generator and the reducer.
std::string renderCreateTable(const TableDef& table, Dialect dialect);
std::string renderInsert(const std::string& table, const std::vector<Value>& row, Dialect dialect);
std::string renderAnalyze(const std::string& table, Dialect dialect);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ValidationErrorKind { UnresolvedTable, UnresolvedColumn, AmbiguousColumn, InvariantViolation };

struct ValidationResult {
    bool ok = true;
    ValidationErrorKind kind = ValidationErrorKind::InvariantViolation;
    std::string path;     // e.g. "selectList[0]", "joins[1].on"
    std::string message;  // e.g. "having-requires-groupBy"

    explicit operator bool() const { return ok; }
};

ValidationResult validate(const SelectQuery& query, const Schema& schema);

/// Qualifies every unqualified ColumnRef against the query's tables.
/// Throws UnresolvedColumn on unknown or ambiguous references.
SelectQuery resolve(const SelectQuery& query, const Schema& schema);

}  // namespace monocard
