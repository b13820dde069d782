#include <gtest/gtest.h>

#include "monocard/errors.hpp"
#include "monocard/sql_model.hpp"
#include "monocard/sql_parser.hpp"

using namespace monocard;

namespace {

Schema orJoinSchema() {
    return {TableDef{"t0", {ColumnDef{"c0", DataType::Integer}}}, TableDef{"t1", {ColumnDef{"c0", DataType::Integer}}}};
}

ExprPtr c0(const char* t = "t0") { return col(t, "c0"); }

}  // namespace

TEST(SqlModel, RendersLeftJoinWithOrCondition) {
    SelectQuery q;
    q.selectList = {star()};
    q.fromTable = "t0";
    q.joins.push_back({JoinType::Left, "t1",
                       orOf(cmp(CompareOp::Lt, c0(), lit(Value::integer(1))), cmp(CompareOp::Gt, c0(), lit(Value::integer(1))))});
    EXPECT_EQ(render(q, Dialect::PostgresFamily), "SELECT * FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1");
}

TEST(SqlModel, RendersMinimalQuery) {
    SelectQuery q;
    q.selectList = {c0()};
    q.fromTable = "t0";
    EXPECT_EQ(render(q, Dialect::Reference), "SELECT t0.c0 FROM t0");
}

TEST(SqlModel, RendersDistinctWithBareColumnPredicate) {
    SelectQuery q;
    q.quantifier = Quantifier::Distinct;
    q.selectList = {c0()};
    q.fromTable = "t0";
    q.where = col("t0", "c1");
    EXPECT_EQ(render(q, Dialect::MySQLFamily), "SELECT DISTINCT t0.c0 FROM t0 WHERE t0.c1");
}

TEST(SqlModel, FullJoinUnsupportedOnMySql) {
    SelectQuery q;
    q.selectList = {star()};
    q.fromTable = "t0";
    q.joins.push_back({JoinType::Full, "t1", lit(Value::boolean(true))});
    EXPECT_THROW(render(q, Dialect::MySQLFamily), UnsupportedFeature);
    EXPECT_NO_THROW(render(q, Dialect::PostgresFamily));
}

TEST(SqlModel, RenderWithSchemaRejectsUnknownColumn) {
    SelectQuery q;
    q.selectList = {col("t0", "c9")};
    q.fromTable = "t0";
    EXPECT_THROW(render(q, Dialect::Reference, orJoinSchema()), UnresolvedColumn);
}

TEST(SqlModel, ValidateReportsUnresolvedColumnPath) {
    SelectQuery q;
    q.selectList = {col("t0", "c9")};
    q.fromTable = "t0";
    const auto r = validate(q, orJoinSchema());
    ASSERT_FALSE(r);
    EXPECT_EQ(r.kind, ValidationErrorKind::UnresolvedColumn);
    EXPECT_EQ(r.path, "selectList[0]");
}

TEST(SqlModel, ValidateHavingRequiresGroupBy) {
    SelectQuery q;
    q.selectList = {c0()};
    q.fromTable = "t0";
    q.having = cmp(CompareOp::Gt, c0(), lit(Value::integer(0)));
    const auto r = validate(q, orJoinSchema());
    ASSERT_FALSE(r);
    EXPECT_EQ(r.kind, ValidationErrorKind::InvariantViolation);
    EXPECT_EQ(r.message, "having-requires-groupBy");
}

TEST(SqlModel, ValidateAcceptsOrJoinQuery) {
    const auto q = parseSelect("SELECT * FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1");
    EXPECT_TRUE(validate(q, orJoinSchema()));
}

TEST(SqlModel, ValidateCrossJoinHasNoOn) {
    auto q = parseSelect("SELECT * FROM t0 CROSS JOIN t1");
    EXPECT_TRUE(validate(q, orJoinSchema()));
    q.joins[0].on = lit(Value::boolean(true));
    EXPECT_FALSE(validate(q, orJoinSchema()));
}

TEST(SqlModel, RenderIsDeterministicAndKeywordsAppearOnce) {
    const auto q = parseSelect(
        "SELECT DISTINCT t0.c0, COUNT(*) FROM t0 INNER JOIN t1 ON t0.c0=t1.c0 WHERE t0.c0>0 GROUP BY t0.c0 "
        "HAVING t0.c0<9 LIMIT 5");
    const auto a = render(q, Dialect::Reference);
    EXPECT_EQ(a, render(q, Dialect::Reference));
    for (const char* kw : {"SELECT ", " FROM ", " WHERE ", " GROUP BY ", " HAVING ", " LIMIT ", " JOIN "}) {
        const auto first = a.find(kw);
        ASSERT_NE(first, std::string::npos) << kw;
        EXPECT_EQ(a.find(kw, first + 1), std::string::npos) << kw;
    }
}

TEST(SqlModel, ResolveQualifiesUnambiguousColumns) {
    Schema s{TableDef{"t0", {ColumnDef{"c0", DataType::Integer}, ColumnDef{"c1", DataType::Integer}}},
             TableDef{"t1", {ColumnDef{"c0", DataType::Integer}}}};
    const auto q = resolve(parseSelect("SELECT c1 FROM t0 WHERE c1 > 0"), s);
    EXPECT_EQ(render(q, Dialect::Reference), "SELECT t0.c1 FROM t0 WHERE t0.c1>0");
    EXPECT_THROW(resolve(parseSelect("SELECT c0 FROM t0 CROSS JOIN t1"), s), UnresolvedColumn);
}

TEST(SqlParser, RoundTripsRenderedText) {
    for (const char* sql : {
             "SELECT * FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1",
             "SELECT DISTINCT t0.c0 FROM t0 WHERE t0.c1",
             "SELECT t0.c0 FROM t0 WHERE (t0.c0 IS NOT NULL) OR (t0.c0 BETWEEN -1 AND 3)",
             "SELECT t0.c0 FROM t0 WHERE NOT (t0.c0=1 AND t0.c0!= -2)",
             "SELECT t0.c0, COUNT(*) FROM t0 GROUP BY t0.c0 HAVING t0.c0>0 LIMIT 3",
             "SELECT * FROM t0 FULL JOIN t1 ON TRUE",
             "SELECT t0.c0 FROM t0 WHERE t0.c0='it''s' OR ABS(t0.c0)>2.5",
         }) {
        const auto q = parseSelect(sql);
        const auto text = render(q, Dialect::Reference);
        EXPECT_TRUE(queryEquals(parseSelect(text), q)) << sql << " -> " << text;
    }
}

TEST(SqlParser, ParsesSetupStatements) {
    const auto create = std::get<CreateTableStmt>(parseStatement("CREATE TABLE t0(c0 INT, c1 INT UNIQUE) ;"));
    ASSERT_EQ(create.table.columns.size(), 2u);
    EXPECT_TRUE(create.table.columns[1].unique);
    const auto insert = std::get<InsertStmt>(parseStatement("INSERT INTO t0 VALUES(-1, NULL),(1, 2)"));
    ASSERT_EQ(insert.rows.size(), 2u);
    EXPECT_EQ(insert.rows[0][0], Value::integer(-1));
    EXPECT_TRUE(insert.rows[0][1].isNull());
    const auto analyze = std::get<AnalyzeStmt>(parseStatement("ANALYZE TABLE t0 UPDATE HISTOGRAM ON c0, c1"));
    EXPECT_EQ(analyze.table, "t0");
    const auto explain = std::get<SelectStmt>(parseStatement("EXPLAIN SELECT * FROM t0;"));
    EXPECT_TRUE(explain.explain);
}

TEST(SqlParser, ReportsErrorOffset) {
    try {
        parseSelect("SELECT * FROM");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 13u);
    }
}

TEST(SqlParser, SplitsScripts) {
    const auto parts = splitStatements("CREATE TABLE t0 (c0 TEXT); -- note; here\nINSERT INTO t0 VALUES ('a;b');\n\n");
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[1], "INSERT INTO t0 VALUES ('a;b')");
}
