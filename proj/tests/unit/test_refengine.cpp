#include <gtest/gtest.h>

#include "monocard/errors.hpp"
#include "monocard/refengine.hpp"
#include "monocard/sql_parser.hpp"
#include "monocard/validator.hpp"

using namespace monocard;

namespace {

const std::vector<std::string> kOrJoinSetup = {
    "CREATE TABLE t0 (c0 INT)",
    "CREATE TABLE t1 (c0 INT)",
    "INSERT INTO t0 VALUES (1), (2), (3), (4), (5), (6), (7), (8), (9), (10), (11), (12), (13)",
    "INSERT INTO t1 VALUES (21),(22),(23),(24),(25)",
    "ANALYZE t0",
    "ANALYZE t1",
};

Engine orJoinEngine() {
    Engine e;
    e.executeSetup(kOrJoinSetup);
    return e;
}

std::int64_t count(const Engine& e, const char* sql) { return e.actualCardinality(parseSelect(sql)); }
double estimate(const Engine& e, const char* sql) { return rootEstimate(e.estimatePlan(parseSelect(sql))); }

}  // namespace

TEST(RefEngine, ExecutesOrJoinSetup) {
    const Engine e = orJoinEngine();
    ASSERT_NE(e.table("t0"), nullptr);
    EXPECT_EQ(e.table("t0")->rows.size(), 13u);
    EXPECT_EQ(e.table("t1")->rows.size(), 5u);
    EXPECT_TRUE(e.table("t0")->statsFresh);
}

TEST(RefEngine, InnerJoinCardinalityOnOrJoin) {
    const Engine e = orJoinEngine();
    EXPECT_EQ(count(e, "SELECT * FROM t0 INNER JOIN t1 ON t0.c0<1 OR t0.c0>1"), 60);
    EXPECT_EQ(count(e, "SELECT * FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1"), 61);
}

TEST(RefEngine, EmptyTableCrossAndFull) {
    Engine e;
    e.executeSetup({"CREATE TABLE t (c0 INT)", "CREATE TABLE u (c0 INT)", "INSERT INTO u VALUES (1),(2),(3)",
                    "ANALYZE t", "ANALYZE u"});
    EXPECT_EQ(count(e, "SELECT * FROM t CROSS JOIN u"), 0);
    EXPECT_EQ(count(e, "SELECT * FROM t FULL JOIN u ON TRUE"), 3);
}

TEST(RefEngine, SetupErrorCarriesIndex) {
    Engine e;
    try {
        e.executeSetup({"CREATE TABLE t (c0 INT UNIQUE)", "INSERT INTO t VALUES (1)", "INSERT INTO t VALUES (1)"});
        FAIL();
    } catch (const StatementError& err) {
        EXPECT_EQ(err.index(), 2u);
    }
}

TEST(RefEngine, EmptySetupGivesEmptyEngine) {
    Engine e;
    e.executeSetup({});
    EXPECT_TRUE(e.schema().empty());
}

TEST(RefEngine, StaleStatsRefuseEstimation) {
    Engine e;
    e.executeSetup({"CREATE TABLE t0 (c0 INT)", "INSERT INTO t0 VALUES (1)"});
    EXPECT_THROW(e.estimatePlan(parseSelect("SELECT * FROM t0")), StaleStats);
    e.execute("ANALYZE t0");
    EXPECT_NO_THROW(e.estimatePlan(parseSelect("SELECT * FROM t0")));
    e.execute("INSERT INTO t0 VALUES (2)");
    EXPECT_THROW(e.estimatePlan(parseSelect("SELECT * FROM t0")), StaleStats);
}

TEST(RefEngine, OrJoinEstimatesAreMonotoneWithoutBugs) {
    const Engine e = orJoinEngine();
    const double left = estimate(e, "SELECT * FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1");
    const double inner = estimate(e, "SELECT * FROM t0 INNER JOIN t1 ON t0.c0<1 OR t0.c0>1");
    EXPECT_DOUBLE_EQ(inner, 60.0);
    EXPECT_GE(left, inner);
}

TEST(RefEngine, OrDoubleCountUnderestimatesOuterJoin) {
    Engine e = orJoinEngine();
    e.setBugs({BugId::OrDoubleCount});
    const auto left = e.estimatePlan(parseSelect("SELECT * FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1"));
    const auto inner = e.estimatePlan(parseSelect("SELECT * FROM t0 INNER JOIN t1 ON t0.c0<1 OR t0.c0>1"));
    EXPECT_LT(rootEstimate(left), rootEstimate(inner));
    EXPECT_TRUE(std::holds_alternative<Violation>(checkPair(left, inner)));
    // The executor never sees the bug.
    EXPECT_EQ(count(e, "SELECT * FROM t0 INNER JOIN t1 ON t0.c0<1 OR t0.c0>1"), 60);
}

TEST(RefEngine, OrDoubleCountLeavesWherePathsAlone) {
    Engine e = orJoinEngine();
    const char* sql = "SELECT * FROM t0 WHERE t0.c0<1 OR t0.c0>1";
    const double before = estimate(e, sql);
    e.setBugs({BugId::OrDoubleCount});
    EXPECT_DOUBLE_EQ(estimate(e, sql), before);
}

TEST(RefEngine, DistinctInflateExceedsAllEstimate) {
    Engine e;
    e.executeSetup({"CREATE TABLE t0(c0 INT, c1 INT UNIQUE)", "INSERT INTO t0 VALUES(-1, NULL),(1, 2),(NULL, NULL),(3, 4)",
                    "ANALYZE TABLE t0 UPDATE HISTOGRAM ON c0, c1"});
    e.setBugs({BugId::DistinctInflate});
    const double all = estimate(e, "SELECT ALL t0.c0 FROM t0 WHERE t0.c1");
    const double distinct = estimate(e, "SELECT DISTINCT t0.c0 FROM t0 WHERE t0.c1");
    EXPECT_GT(distinct, all);
    e.setBugs({});
    EXPECT_LE(estimate(e, "SELECT DISTINCT t0.c0 FROM t0 WHERE t0.c1"), all);
}

TEST(RefEngine, OrOperandOverlapBreaksRule11) {
    Engine e;
    e.executeSetup({"CREATE TABLE t0 (c0 INT)", "INSERT INTO t0 VALUES (1), (2), (3), (4), (5), (6), (7), (8), (9), (10)",
                    "ANALYZE t0"});
    e.setBugs({BugId::OrOperandOverlap});
    const double both = estimate(e, "SELECT t0.c0 FROM t0 WHERE (t0.c0 IS NOT NULL) OR (ABS(t0.c0) > 1)");
    const double one = estimate(e, "SELECT t0.c0 FROM t0 WHERE (t0.c0 IS NOT NULL)");
    EXPECT_DOUBLE_EQ(one, 10.0);
    EXPECT_LT(both, one);
}

TEST(RefEngine, Fig3JoinDiagram) {
    // Two 3-row tables with two matching pairs.
    Engine e;
    e.executeSetup({"CREATE TABLE t0 (c0 INT)", "CREATE TABLE t1 (c0 INT)", "INSERT INTO t0 VALUES (1),(2),(3)",
                    "INSERT INTO t1 VALUES (1),(2),(4)", "ANALYZE t0", "ANALYZE t1"});
    EXPECT_EQ(count(e, "SELECT * FROM t0 INNER JOIN t1 ON t0.c0=t1.c0"), 2);
    EXPECT_EQ(count(e, "SELECT * FROM t0 LEFT JOIN t1 ON t0.c0=t1.c0"), 3);
    EXPECT_EQ(count(e, "SELECT * FROM t0 RIGHT JOIN t1 ON t0.c0=t1.c0"), 3);
    EXPECT_EQ(count(e, "SELECT * FROM t0 FULL JOIN t1 ON t0.c0=t1.c0"), 4);
    EXPECT_EQ(count(e, "SELECT * FROM t0 CROSS JOIN t1"), 9);
}

TEST(RefEngine, SingletonTableBreaksFullBelowCross) {
    // With a one-row table and no match, FULL (1 + 5) exceeds CROSS (1 x 5).
    Engine e;
    e.executeSetup({"CREATE TABLE t0 (c0 INT)", "CREATE TABLE t1 (c0 INT)", "INSERT INTO t0 VALUES (0)",
                    "INSERT INTO t1 VALUES (1),(2),(3),(4),(5)", "ANALYZE t0", "ANALYZE t1"});
    EXPECT_EQ(count(e, "SELECT * FROM t0 FULL JOIN t1 ON t0.c0=t1.c0"), 6);
    EXPECT_EQ(count(e, "SELECT * FROM t0 CROSS JOIN t1"), 5);
}

TEST(RefEngine, ThreeValuedLogicAndGrouping) {
    Engine e;
    e.executeSetup({"CREATE TABLE t0 (c0 INT, c1 TEXT)", "INSERT INTO t0 VALUES (1,'a'),(1,'b'),(NULL,'a'),(NULL,NULL)",
                    "ANALYZE t0"});
    EXPECT_EQ(count(e, "SELECT * FROM t0 WHERE t0.c0=1 OR NOT (t0.c0=1)"), 2);
    EXPECT_EQ(count(e, "SELECT * FROM t0 WHERE t0.c0 IS NULL"), 2);
    EXPECT_EQ(count(e, "SELECT t0.c0 FROM t0 GROUP BY t0.c0"), 2);
    EXPECT_EQ(count(e, "SELECT t0.c0, COUNT(*) FROM t0 GROUP BY t0.c0 HAVING t0.c0>0"), 1);
    EXPECT_EQ(count(e, "SELECT DISTINCT t0.c1 FROM t0"), 3);
    EXPECT_EQ(count(e, "SELECT COUNT(*) FROM t0 WHERE FALSE"), 1);
    EXPECT_EQ(count(e, "SELECT * FROM t0 LIMIT 3"), 3);
}

TEST(RefEngine, PushdownChangesPlanShapeOnly) {
    Engine e;
    e.executeSetup({"CREATE TABLE t0 (c0 INT)", "CREATE TABLE t1 (c0 INT, c1 INT)",
                    "INSERT INTO t1 VALUES(1,2), (3,4), (5,6), (NULL, NULL)", "INSERT INTO t0 VALUES(1), (2)",
                    "ANALYZE t0", "ANALYZE t1"});
    const auto full = e.estimatePlan(parseSelect("SELECT * FROM t0 FULL JOIN t1 ON t1.c1=t1.c1 WHERE t1.c1=1"));
    const auto right = e.estimatePlan(parseSelect("SELECT * FROM t0 RIGHT JOIN t1 ON t1.c1=t1.c1 WHERE t1.c1=1"));
    EXPECT_EQ(flatten(full), (std::vector<std::string>{"filter", "join", "scan", "scan"}));
    EXPECT_EQ(flatten(right), (std::vector<std::string>{"join", "scan", "filter", "scan"}));
    EXPECT_TRUE(std::holds_alternative<Incomparable>(checkPair(full, right)));
}

TEST(RefEngine, DebugTextRoundTrips) {
    const Engine e = orJoinEngine();
    const auto plan = e.estimatePlan(parseSelect("SELECT DISTINCT t0.c0 FROM t0 LEFT JOIN t1 ON t0.c0<1 OR t0.c0>1 LIMIT 4"));
    EXPECT_EQ(parseTextPlan(renderTextPlan(plan)), plan);
}
