#include "monocard/sql_parser.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "monocard/errors.hpp"

namespace monocard {

namespace {

enum class Tok { Ident, Keyword, Integer, Decimal, String, Symbol, End };

struct Token {
    Tok kind;
    std::string text;  // keywords upper-cased
    std::size_t offset;
};

const std::set<std::string, std::less<>> kKeywords = {
    "SELECT", "ALL",    "DISTINCT", "FROM",  "WHERE",   "GROUP",  "BY",     "HAVING",  "LIMIT",  "INNER",
    "LEFT",   "RIGHT",  "FULL",     "CROSS", "OUTER",   "JOIN",   "ON",     "AND",     "OR",     "NOT",
    "IS",     "NULL",   "TRUE",     "FALSE", "BETWEEN", "CREATE", "TABLE",  "INSERT",  "INTO",   "VALUES",
    "ANALYZE", "EXPLAIN", "UNIQUE", "PRIMARY", "KEY",   "DEFAULT"};

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < sql.size()) {
        const char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
            while (i < sql.size() && sql[i] != '\n') ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '_')) ++i;
            std::string word(sql.substr(start, i - start));
            std::string up = upper(word);
            if (kKeywords.count(up)) {
                out.push_back({Tok::Keyword, std::move(up), start});
            } else {
                out.push_back({Tok::Ident, std::move(word), start});
            }
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            bool dot = false;
            while (i < sql.size() && (std::isdigit(static_cast<unsigned char>(sql[i])) || (sql[i] == '.' && !dot))) {
                dot = dot || sql[i] == '.';
                ++i;
            }
            out.push_back({dot ? Tok::Decimal : Tok::Integer, std::string(sql.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'') {
            std::string text;
            ++i;
            for (;;) {
                if (i >= sql.size()) throw ParseError("unterminated string literal", start);
                if (sql[i] == '\'') {
                    if (i + 1 < sql.size() && sql[i + 1] == '\'') {
                        text += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                text += sql[i++];
            }
            out.push_back({Tok::String, std::move(text), start});
            continue;
        }
        static constexpr std::string_view kTwo[] = {"<=", ">=", "!=", "<>"};
        bool matched = false;
        for (auto op : kTwo) {
            if (sql.substr(i, 2) == op) {
                out.push_back({Tok::Symbol, std::string(op), start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("<>=(),.*;-").find(c) != std::string_view::npos) {
            out.push_back({Tok::Symbol, std::string(1, c), start});
            ++i;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({Tok::End, "", sql.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view sql) : tokens_(tokenize(sql)) {}

    Statement statement() {
        Statement result;
        if (acceptKeyword("EXPLAIN")) {
            result = SelectStmt{select(), true};
        } else if (peekKeyword("SELECT")) {
            result = SelectStmt{select(), false};
        } else if (acceptKeyword("CREATE")) {
            result = createTable();
        } else if (acceptKeyword("INSERT")) {
            result = insert();
        } else if (acceptKeyword("ANALYZE")) {
            acceptKeyword("TABLE");
            AnalyzeStmt a{identifier()};
            // Vendor suffixes such as "UPDATE HISTOGRAM ON c0, c1" carry no
            // meaning for the reference engine.
            while (!atEnd() && !peekSymbol(";")) ++pos_;
            result = a;
        } else {
            fail("expected a statement");
        }
        finish();
        return result;
    }

    SelectQuery selectOnly() {
        acceptKeyword("EXPLAIN");
        SelectQuery q = select();
        finish();
        return q;
    }

    ExprPtr exprOnly() {
        ExprPtr e = expr();
        finish();
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    bool atEnd() const { return peek().kind == Tok::End; }

    [[noreturn]] void fail(const std::string& what) const {
        const auto& t = peek();
        throw ParseError(what + (t.kind == Tok::End ? " at end of input" : " near '" + t.text + "'"), t.offset);
    }

    bool peekKeyword(std::string_view kw) const { return peek().kind == Tok::Keyword && peek().text == kw; }
    bool peekSymbol(std::string_view s) const { return peek().kind == Tok::Symbol && peek().text == s; }

    bool acceptKeyword(std::string_view kw) {
        if (!peekKeyword(kw)) return false;
        ++pos_;
        return true;
    }
    bool acceptSymbol(std::string_view s) {
        if (!peekSymbol(s)) return false;
        ++pos_;
        return true;
    }
    void expectKeyword(std::string_view kw) {
        if (!acceptKeyword(kw)) fail("expected " + std::string(kw));
    }
    void expectSymbol(std::string_view s) {
        if (!acceptSymbol(s)) fail("expected '" + std::string(s) + "'");
    }

    void finish() {
        acceptSymbol(";");
        if (!atEnd()) fail("unexpected trailing input");
    }

    std::string identifier() {
        if (peek().kind != Tok::Ident) fail("expected identifier");
        return tokens_[pos_++].text;
    }

    std::int64_t integerLiteral() {
        const bool negative = acceptSymbol("-");
        if (peek().kind != Tok::Integer) fail("expected integer");
        std::int64_t v = 0;
        const auto& text = tokens_[pos_].text;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc()) fail("integer out of range");
        ++pos_;
        return negative ? -v : v;
    }

    Value literalValue() {
        const auto& t = peek();
        if (acceptKeyword("NULL")) return Value::null();
        if (acceptKeyword("TRUE")) return Value::boolean(true);
        if (acceptKeyword("FALSE")) return Value::boolean(false);
        if (t.kind == Tok::String) {
            return Value::text(tokens_[pos_++].text);
        }
        const bool negative = acceptSymbol("-");
        const auto& n = peek();
        if (n.kind == Tok::Integer) {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(n.text.data(), n.text.data() + n.text.size(), v);
            if (ec != std::errc()) fail("integer out of range");
            ++pos_;
            return Value::integer(negative ? -v : v);
        }
        if (n.kind == Tok::Decimal) {
            double v = 0;
            auto [p, ec] = std::from_chars(n.text.data(), n.text.data() + n.text.size(), v);
            if (ec != std::errc()) fail("bad decimal literal");
            ++pos_;
            return Value::decimal(negative ? -v : v);
        }
        fail("expected literal");
    }

    // --- DDL / DML --------------------------------------------------------

    CreateTableStmt createTable() {
        expectKeyword("TABLE");
        CreateTableStmt stmt;
        stmt.table.name = identifier();
        expectSymbol("(");
        do {
            ColumnDef c;
            c.name = identifier();
            c.dataType = columnType();
            for (;;) {
                if (acceptKeyword("NOT")) {
                    expectKeyword("NULL");
                    c.nullable = false;
                } else if (acceptKeyword("NULL")) {
                    c.nullable = true;
                } else if (acceptKeyword("UNIQUE")) {
                    c.unique = true;
                } else if (acceptKeyword("PRIMARY")) {
                    expectKeyword("KEY");
                    c.unique = true;
                    c.nullable = false;
                } else {
                    break;
                }
            }
            if (stmt.table.findColumn(c.name)) fail("duplicate column " + c.name);
            stmt.table.columns.push_back(std::move(c));
        } while (acceptSymbol(","));
        expectSymbol(")");
        return stmt;
    }

    DataType columnType() {
        if (peek().kind != Tok::Ident) fail("expected column type");
        const std::string name = upper(tokens_[pos_++].text);
        DataType type;
        if (name == "INT" || name == "INTEGER" || name == "BIGINT" || name == "SMALLINT" || name == "INT8" ||
            name == "INT4") {
            type = DataType::Integer;
        } else if (name == "TEXT" || name == "VARCHAR" || name == "CHAR" || name == "STRING") {
            type = DataType::Text;
        } else if (name == "BOOLEAN" || name == "BOOL") {
            type = DataType::Boolean;
        } else if (name == "DECIMAL" || name == "NUMERIC" || name == "REAL" || name == "FLOAT" || name == "DOUBLE") {
            type = DataType::Decimal;
            if (name == "DOUBLE" && peek().kind == Tok::Ident && upper(peek().text) == "PRECISION") ++pos_;
        } else {
            --pos_;
            fail("unsupported column type");
        }
        if (acceptSymbol("(")) {
            integerLiteral();
            if (acceptSymbol(",")) integerLiteral();
            expectSymbol(")");
        }
        return type;
    }

    InsertStmt insert() {
        expectKeyword("INTO");
        InsertStmt stmt;
        stmt.table = identifier();
        if (acceptSymbol("(")) {
            do {
                stmt.columns.push_back(identifier());
            } while (acceptSymbol(","));
            expectSymbol(")");
        }
        expectKeyword("VALUES");
        do {
            expectSymbol("(");
            std::vector<Value> row;
            do {
                row.push_back(literalValue());
            } while (acceptSymbol(","));
            expectSymbol(")");
            stmt.rows.push_back(std::move(row));
        } while (acceptSymbol(","));
        return stmt;
    }

    // --- SELECT -----------------------------------------------------------

    SelectQuery select() {
        expectKeyword("SELECT");
        SelectQuery q;
        if (acceptKeyword("DISTINCT")) {
            q.quantifier = Quantifier::Distinct;
        } else {
            acceptKeyword("ALL");
        }
        do {
            if (acceptSymbol("*")) {
                q.selectList.push_back(star());
            } else {
                q.selectList.push_back(expr());
            }
        } while (acceptSymbol(","));
        expectKeyword("FROM");
        q.fromTable = identifier();
        while (auto type = joinType()) {
            JoinClause j;
            j.type = *type;
            j.table = identifier();
            if (acceptKeyword("ON")) j.on = expr();
            q.joins.push_back(std::move(j));
        }
        if (acceptKeyword("WHERE")) q.where = expr();
        if (acceptKeyword("GROUP")) {
            expectKeyword("BY");
            do {
                q.groupBy.push_back(expr());
            } while (acceptSymbol(","));
        }
        if (acceptKeyword("HAVING")) q.having = expr();
        if (acceptKeyword("LIMIT")) q.limit = integerLiteral();
        return q;
    }

    std::optional<JoinType> joinType() {
        std::optional<JoinType> type;
        if (acceptKeyword("INNER")) {
            type = JoinType::Inner;
        } else if (acceptKeyword("LEFT")) {
            type = JoinType::Left;
        } else if (acceptKeyword("RIGHT")) {
            type = JoinType::Right;
        } else if (acceptKeyword("FULL")) {
            type = JoinType::Full;
        } else if (acceptKeyword("CROSS")) {
            type = JoinType::Cross;
        } else if (peekKeyword("JOIN")) {
            type = JoinType::Inner;
        } else {
            return std::nullopt;
        }
        if (*type == JoinType::Left || *type == JoinType::Right || *type == JoinType::Full) acceptKeyword("OUTER");
        expectKeyword("JOIN");
        return type;
    }

    ExprPtr expr() { return disjunction(); }

    ExprPtr disjunction() {
        std::vector<ExprPtr> ops{conjunction()};
        while (acceptKeyword("OR")) ops.push_back(conjunction());
        return ops.size() == 1 ? ops.front() : logical(LogicalOp::Or, std::move(ops));
    }

    ExprPtr conjunction() {
        std::vector<ExprPtr> ops{negation()};
        while (acceptKeyword("AND")) ops.push_back(negation());
        return ops.size() == 1 ? ops.front() : logical(LogicalOp::And, std::move(ops));
    }

    ExprPtr negation() {
        if (acceptKeyword("NOT")) return notOf(negation());
        return predicate();
    }

    ExprPtr predicate() {
        ExprPtr lhs = primary();
        if (peek().kind == Tok::Symbol) {
            static const std::pair<std::string_view, CompareOp> kOps[] = {
                {"<", CompareOp::Lt},  {"<=", CompareOp::Le}, {"=", CompareOp::Eq}, {"!=", CompareOp::Ne},
                {"<>", CompareOp::Ne}, {">=", CompareOp::Ge}, {">", CompareOp::Gt}};
            for (const auto& [text, op] : kOps) {
                if (acceptSymbol(text)) return cmp(op, lhs, primary());
            }
        }
        if (acceptKeyword("IS")) {
            const bool negated = acceptKeyword("NOT");
            expectKeyword("NULL");
            return isNull(lhs, negated);
        }
        const bool negatedBetween = peekKeyword("NOT") && tokens_[pos_ + 1].kind == Tok::Keyword &&
                                    tokens_[pos_ + 1].text == "BETWEEN";
        if (negatedBetween) ++pos_;
        if (acceptKeyword("BETWEEN")) {
            ExprPtr low = primary();
            expectKeyword("AND");
            ExprPtr high = primary();
            ExprPtr b = between(lhs, low, high);
            return negatedBetween ? notOf(b) : b;
        }
        return lhs;
    }

    ExprPtr primary() {
        const auto& t = peek();
        if (acceptSymbol("(")) {
            ExprPtr e = expr();
            expectSymbol(")");
            return e;
        }
        if (t.kind == Tok::Keyword && (t.text == "NULL" || t.text == "TRUE" || t.text == "FALSE")) {
            return lit(literalValue());
        }
        if (t.kind == Tok::String || t.kind == Tok::Integer || t.kind == Tok::Decimal || peekSymbol("-")) {
            return lit(literalValue());
        }
        if (t.kind == Tok::Ident) {
            std::string first = tokens_[pos_++].text;
            if (acceptSymbol("(")) {
                std::vector<ExprPtr> args;
                if (acceptSymbol("*")) {
                    expectSymbol(")");
                    return call(std::move(first), {});
                }
                if (!acceptSymbol(")")) {
                    do {
                        args.push_back(expr());
                    } while (acceptSymbol(","));
                    expectSymbol(")");
                }
                return call(std::move(first), std::move(args));
            }
            if (acceptSymbol(".")) return col(std::move(first), identifier());
            return col("", std::move(first));
        }
        fail("expected expression");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

Statement parseStatement(std::string_view sql) { return Parser(sql).statement(); }

SelectQuery parseSelect(std::string_view sql) { return Parser(sql).selectOnly(); }

ExprPtr parseExpr(std::string_view sql) { return Parser(sql).exprOnly(); }

std::vector<std::string> splitStatements(std::string_view script) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        const auto first = current.find_first_not_of(" \t\r\n");
        if (first != std::string::npos) {
            const auto last = current.find_last_not_of(" \t\r\n");
            out.push_back(current.substr(first, last - first + 1));
        }
        current.clear();
    };
    bool inString = false;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const char c = script[i];
        if (inString) {
            current += c;
            if (c == '\'') inString = false;  // '' re-enters on the next quote
            continue;
        }
        if (c == '\'') {
            inString = true;
            current += c;
        } else if (c == '-' && i + 1 < script.size() && script[i + 1] == '-') {
            while (i < script.size() && script[i] != '\n') ++i;
            current += '\n';
        } else if (c == ';') {
            flush();
        } else {
            current += c;
        }
    }
    flush();
    return out;
}

}  // namespace monocard
