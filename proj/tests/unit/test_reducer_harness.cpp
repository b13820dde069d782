#include <gtest/gtest.h>

#include <filesystem>

#include "monocard/errors.hpp"
#include "monocard/harness.hpp"
#include "monocard/reducer.hpp"
#include "monocard/sql_parser.hpp"

using namespace monocard;

namespace {

RunConfig bugCampaign(BugId bug, std::uint64_t pairs, bool reduce) {
    RunConfig cfg;
    cfg.pairs = pairs;
    cfg.seed = 1;
    cfg.bugs = {bug};
    cfg.reduce = reduce;
    return cfg;
}

std::filesystem::path scratchDir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("monocard_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Reducer, RemovesUnrelatedStatements) {
    TestCase tc;
    tc.setupStatements = {"CREATE TABLE t0 (c0 INT)", "CREATE TABLE t9 (c0 INT)", "INSERT INTO t9 VALUES (1)"};
    for (int i = 1; i <= 10; ++i) tc.setupStatements.push_back("INSERT INTO t0 VALUES (" + std::to_string(i) + ")");
    tc.setupStatements.push_back("ANALYZE t0");
    tc.setupStatements.push_back("ANALYZE t9");
    tc.original = parseSelect("SELECT t0.c0 FROM t0 WHERE t0.c0>3 OR t0.c0<2");
    tc.restricted = parseSelect("SELECT t0.c0 FROM t0 WHERE t0.c0>3");
    tc.appliedRules = {11};
    const auto stillFails = referenceStillFails({BugId::OrOperandOverlap});
    ASSERT_TRUE(stillFails(tc));
    ReduceStats stats;
    const TestCase out = minimize(tc, stillFails, &stats);
    EXPECT_TRUE(stillFails(out));
    EXPECT_LT(out.setupStatements.size(), tc.setupStatements.size());
    for (const auto& s : out.setupStatements) EXPECT_EQ(s.find("t9"), std::string::npos) << s;
    for (std::size_t i = 0; i < out.setupStatements.size(); ++i) {
        TestCase smaller = out;
        smaller.setupStatements.erase(smaller.setupStatements.begin() + static_cast<std::ptrdiff_t>(i));
        EXPECT_FALSE(stillFails(smaller)) << "statement " << i << " is removable";
    }
    EXPECT_EQ(stats.initialStatements, tc.setupStatements.size());
    EXPECT_EQ(stats.finalStatements, out.setupStatements.size());
}

TEST(Reducer, RejectsPassingCase) {
    TestCase tc;
    tc.setupStatements = {"CREATE TABLE t0 (c0 INT)", "INSERT INTO t0 VALUES (1)", "ANALYZE t0"};
    tc.original = parseSelect("SELECT t0.c0 FROM t0");
    tc.restricted = parseSelect("SELECT DISTINCT t0.c0 FROM t0");
    EXPECT_THROW(minimize(tc, referenceStillFails({})), NotReproducible);
}

TEST(Harness, StatsInvariantAndDeterminism) {
    RunConfig cfg;
    cfg.pairs = 300;
    cfg.seed = 42;
    const auto a = runCampaign(cfg);
    EXPECT_EQ(a.stats.pairsValidated, 300u);
    EXPECT_TRUE(a.stats.sumInvariantHolds());
    EXPECT_EQ(a.stats.violations, 0u);
    cfg.workers = 2;
    const auto b = runCampaign(cfg);
    EXPECT_EQ(a.stats, b.stats);
}

TEST(Harness, ViolationRateText) {
    RunStats s;
    s.pairsValidated = 3;
    s.violations = 1;
    s.passes = 2;
    EXPECT_EQ(s.violationRateText(), "0.3333");
    EXPECT_EQ(RunStats{}.violationRateText(), "0.0000");
}

TEST(Harness, ConfigErrors) {
    RunConfig cfg;
    EXPECT_THROW(runCampaign(cfg), ConfigError);  // no budget
    cfg.pairs = 10;
    cfg.minRows = 0;
    EXPECT_THROW(runCampaign(cfg), ConfigError);
    cfg.minRows = 1;
    cfg.rules = {13};
    EXPECT_THROW(runCampaign(cfg), ConfigError);
    cfg.rules = allRules();
    cfg.target = "nosuch://x";
    EXPECT_THROW(runCampaign(cfg), ConfigError);
    cfg.target = "mysql://127.0.0.1:1";
    EXPECT_THROW(runCampaign(cfg), AdapterUnavailable);
}

TEST(Harness, SignatureFormat) {
    IssueReport r;
    r.testCase.appliedRules = {5, 3};
    r.clause = ClauseKind::Join;
    r.opSequences = {OpSequence{"join", "scan"}, OpSequence{"join", "scan", "scan"}};
    EXPECT_EQ(dedupSignature(r), "rules=3,5|clause=JOIN|ops=join/join");
    IssueReport single = r;
    single.testCase.appliedRules = {3};
    EXPECT_NE(dedupSignature(single), dedupSignature(r));
}

TEST(Harness, BugCampaignPersistsReplayableReports) {
    auto cfg = bugCampaign(BugId::OrDoubleCount, 1500, true);
    const auto dir = scratchDir("reports");
    cfg.reportDir = dir.string();
    const auto result = runCampaign(cfg);
    ASSERT_GT(result.stats.violations, 0u);
    ASSERT_FALSE(result.reports.empty());
    ASSERT_EQ(result.reportPaths.size(), result.reports.size());
    std::set<std::string> signatures;
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const auto& r = result.reports[i];
        EXPECT_TRUE(signatures.insert(r.signature).second);
        for (RuleId rule : r.testCase.appliedRules) EXPECT_LE(rule, 5);
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(result.reportPaths[i]) / "repro.sql"));
        const IssueReport loaded = readReport(result.reportPaths[i]);
        EXPECT_EQ(loaded.signature, r.signature);
        ReferenceAdapter sameBugs(loaded.bugs);
        const auto online = replay(loaded, &sameBugs, false);
        EXPECT_FALSE(online.mismatch) << describe(online.verdict) << " vs " << describe(r.verdict);
        EXPECT_FALSE(replay(loaded, nullptr, true).mismatch);
        ReferenceAdapter fixed;
        const auto afterFix = replay(loaded, &fixed, false);
        EXPECT_TRUE(afterFix.mismatch);
    }
    std::filesystem::remove_all(dir);
}

TEST(Harness, OrJoinOfflineReplay) {
    const IssueReport r = readReport(std::string(MONOCARD_FIXTURE_DIR) + "/or_join_report");
    const auto result = replay(r, nullptr, true);
    EXPECT_EQ(result.verdict, Verdict(Violation{20, 60, 40}));
    EXPECT_FALSE(result.mismatch);
    ReferenceAdapter reference;
    const auto online = replay(r, &reference, false);
    EXPECT_TRUE(std::holds_alternative<Pass>(online.verdict));
    EXPECT_TRUE(online.mismatch);
}

TEST(Harness, ReferenceAdapterBasics) {
    ReferenceAdapter a;
    a.executeStatement("CREATE TABLE t0 (c0 INT)");
    a.executeStatement("INSERT INTO t0 VALUES (1), (2)");
    a.executeStatement("ANALYZE t0");
    EXPECT_EQ(a.countRows("t0"), 2);
    EXPECT_EQ(rootEstimate(parseRawPlan(a.explain("SELECT * FROM t0"))), 2.0);
    EXPECT_THROW(a.executeStatement("CREATE TABLE"), TargetError);
    EXPECT_THROW(a.explain("SELECT * FROM nosuch"), TargetError);
    a.resetNamespace();
    EXPECT_THROW(a.countRows("t0"), TargetError);
    EXPECT_EQ(ReferenceAdapter({BugId::DistinctInflate}).version(), "reference-1+DistinctInflate");
}
