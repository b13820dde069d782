#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "monocard/sql_model.hpp"

namespace monocard {

// Statement forms understood by the reference engine. The SELECT grammar is
// the subset produced by render(); DDL/DML covers what the generator emits and
// the common spellings in hand-written reproducers (INT/INTEGER, VARCHAR(n),
// multi-row VALUES, ANALYZE TABLE ... UPDATE HISTOGRAM ...).

struct CreateTableStmt {
    TableDef table;
};

struct InsertStmt {
    std::string table;
    std::vector<std::string> columns;  // empty: all columns in table order
    std::vector<std::vector<Value>> rows;
};

struct AnalyzeStmt {
    std::string table;
};

struct SelectStmt {
    SelectQuery query;
    bool explain = false;
};

using Statement = std::variant<CreateTableStmt, InsertStmt, AnalyzeStmt, SelectStmt>;

/// Parses one statement; a trailing semicolon is allowed. Throws ParseError.
Statement parseStatement(std::string_view sql);

/// Parses a bare SELECT (optionally prefixed by EXPLAIN). Column references
/// are left as written; call resolve() to qualify them.
SelectQuery parseSelect(std::string_view sql);

ExprPtr parseExpr(std::string_view sql);

/// Splits a script on top-level semicolons, dropping `--` comments and blank
/// statements. Quoted semicolons are preserved.
std::vector<std::string> splitStatements(std::string_view script);

}  // namespace monocard
