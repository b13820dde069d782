#include <gtest/gtest.h>

#include "monocard/adapter.hpp"
#include "monocard/errors.hpp"
#include "monocard/plan_model.hpp"
#include "monocard/similarity.hpp"
#include "monocard/validator.hpp"
#include "oracles.hpp"

using namespace monocard;
using testsupport::readFixture;

namespace {

using Seq = std::vector<std::string>;

PlanNode fixturePlan(const std::string& name) { return parseTextPlan(readFixture(name)); }

}  // namespace

TEST(PlanModel, OrJoinOriginalPlan) {
    const PlanNode root = fixturePlan("or_join_original.txt");
    EXPECT_EQ(root.opName, "cross join");
    EXPECT_EQ(root.estimatedRows, 20.0);
    ASSERT_EQ(root.children.size(), 2u);
    EXPECT_EQ(root.children[0].opName, "scan");
    EXPECT_EQ(root.children[0].estimatedRows, 13.0);
    EXPECT_EQ(root.children[1].estimatedRows, 5.0);
    EXPECT_EQ(flatten(root), (Seq{"cross join", "scan", "scan"}));
}

TEST(PlanModel, OrJoinRestrictedPlan) {
    const PlanNode root = fixturePlan("or_join_restricted.txt");
    EXPECT_EQ(rootEstimate(root), 60.0);
    ASSERT_EQ(root.children.size(), 2u);
    EXPECT_EQ(root.children[0].opName, "filter");
    EXPECT_EQ(root.children[0].estimatedRows, 12.0);
    EXPECT_EQ(flatten(root), (Seq{"cross join", "filter", "scan", "scan"}));
}

TEST(PlanModel, OrJoinPairIsAViolation) {
    const PlanNode a = fixturePlan("or_join_original.txt");
    const PlanNode b = fixturePlan("or_join_restricted.txt");
    EXPECT_EQ(editDistance(flatten(a), flatten(b)), 1u);
    EXPECT_TRUE(structurallySimilar(flatten(a), flatten(b)));
    const Verdict v = checkPair(a, b);
    EXPECT_EQ(v, Verdict(Violation{20, 60, 40}));
    EXPECT_EQ(describe(v), "Violation{20, 60, 40}");
}

TEST(PlanModel, PushdownPairIsIncomparable) {
    const PlanNode a = fixturePlan("pushdown_original.txt");
    const PlanNode b = fixturePlan("pushdown_restricted.txt");
    EXPECT_EQ(flatten(a), (Seq{"filter", "cross join", "scan", "scan"}));
    EXPECT_EQ(flatten(b), (Seq{"cross join", "scan", "filter", "scan"}));
    EXPECT_EQ(rootEstimate(a), 2.0);
    EXPECT_EQ(rootEstimate(b), 3.0);
    EXPECT_EQ(testsupport::recursiveEditDistance(flatten(a), flatten(b)), 2u);
    EXPECT_EQ(checkPair(a, b), Verdict(Incomparable{2}));
}

TEST(PlanModel, CockroachPlansWithPreamble) {
    const PlanNode a = fixturePlan("cockroach_or_original.txt");
    const PlanNode b = fixturePlan("cockroach_or_restricted.txt");
    EXPECT_EQ(rootEstimate(a), 3.0);
    EXPECT_EQ(rootEstimate(b), 10.0);
    EXPECT_EQ(a.children.at(0).estimatedRows, 10.0);
    EXPECT_EQ(checkPair(a, b), Verdict(Violation{3, 10, 7}));
}

TEST(PlanModel, MySqlTreeDistinct) {
    const PlanNode all = parseTabularPlan(mysqlTreeToRows(readFixture("mysql_all_tree.txt")));
    const PlanNode distinct = parseTabularPlan(mysqlTreeToRows(readFixture("mysql_distinct_tree.txt")));
    EXPECT_EQ(rootEstimate(all), 3.0);
    EXPECT_EQ(rootEstimate(distinct), 4.0);
    EXPECT_EQ(flatten(all), (Seq{"filter", "table scan"}));
    EXPECT_EQ(nodeCount(distinct), 4u);
}

TEST(PlanModel, TidbPipeTable) {
    const auto rows = parsePipeTable(readFixture("tidb_hashjoin.txt"));
    ASSERT_EQ(rows.size(), 2u);
    const PlanNode root = parseTabularPlan(rows);
    EXPECT_EQ(root.opName, "hashjoin");
    EXPECT_EQ(root.estimatedRows, 60.0);
    ASSERT_EQ(root.children.size(), 1u);
    EXPECT_EQ(root.children[0].opName, "tablefullscan");
    EXPECT_EQ(root.children[0].estimatedRows, 13.0);
}

TEST(PlanModel, TabularTwoRowFixture) {
    const PlanNode root = parseTabularPlan({{"HashJoin", "60", {}}, {"\xE2\x94\x94\xE2\x94\x80TableFullScan", "13", {}}});
    EXPECT_EQ(root.opName, "hashjoin");
    EXPECT_EQ(root.children.size(), 1u);
}

TEST(PlanModel, PostgresTextPlan) {
    const PlanNode root = parseTabularPlan(postgresPlanToRows(readFixture("postgres_nested_loop.txt")));
    EXPECT_EQ(root.opName, "nested loop left join");
    EXPECT_EQ(root.estimatedRows, 20.0);
    ASSERT_EQ(root.children.size(), 2u);
    EXPECT_EQ(root.children[0].opName, "seq scan");
    EXPECT_EQ(root.children[1].opName, "materialize");
    ASSERT_EQ(root.children[1].children.size(), 1u);
    EXPECT_EQ(root.children[1].children[0].estimatedRows, 5.0);
}

TEST(PlanModel, MalformedTextPlans) {
    EXPECT_THROW(parseTextPlan(""), MalformedPlan);
    EXPECT_THROW(parseTextPlan("no bullets here\n"), MalformedPlan);
    EXPECT_THROW(parseTextPlan("• a\n  estimated row: 1\n• b\n"), MalformedPlan);
    EXPECT_THROW(rootEstimate(parseTextPlan("• scan\n  table: t0\n")), MissingEstimate);
}

TEST(PlanModel, MalformedTabularPlans) {
    EXPECT_THROW(parseTabularPlan({}), MalformedPlan);
    EXPECT_THROW(parseTabularPlan({{"\xE2\x94\x94\xE2\x94\x80Scan", "1", {}}}), MalformedPlan);
    EXPECT_THROW(parseTabularPlan({{"A", "1", {}}, {"B", "1", {}}}), MalformedPlan);
    EXPECT_THROW(parseTabularPlan({{"A", "many", {}}}), MalformedPlan);
}

TEST(PlanModel, RenderRoundTrip) {
    for (const char* name : {"or_join_original.txt", "or_join_restricted.txt", "pushdown_original.txt", "pushdown_restricted.txt"}) {
        const PlanNode a = fixturePlan(name);
        const PlanNode b = parseTextPlan(renderTextPlan(a));
        EXPECT_EQ(flatten(a), flatten(b)) << name;
        EXPECT_EQ(rootEstimate(a), rootEstimate(b)) << name;
    }
}

TEST(PlanModel, NormalizeOpName) {
    EXPECT_EQ(normalizeOpName("cross join(left outer)").first, "cross join");
    EXPECT_EQ(normalizeOpName("cross join(left outer)").second, "left outer");
    EXPECT_EQ(normalizeOpName("TableFullScan_11").first, "tablefullscan");
    EXPECT_EQ(normalizeOpName("scan").second, "");
}

TEST(PlanModel, RawPlanDispatch) {
    RawPlan text{RawPlan::Format::Text, readFixture("or_join_original.txt"), {}};
    EXPECT_EQ(rootEstimate(parseRawPlan(text)), 20.0);
    RawPlan tab{RawPlan::Format::Tabular, "", parsePipeTable(readFixture("tidb_hashjoin.txt"))};
    EXPECT_EQ(rootEstimate(parseRawPlan(tab)), 60.0);
}
