#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "monocard/adapter.hpp"
#include "monocard/datagen.hpp"
#include "monocard/reducer.hpp"
#include "monocard/restriction.hpp"
#include "monocard/similarity.hpp"
#include "monocard/validator.hpp"

namespace monocard {

struct RunConfig {
    std::string target = "reference";
    std::optional<double> seconds;        // time budget
    std::optional<std::uint64_t> pairs;   // pair budget; deterministic for a fixed seed
    std::uint64_t seed = 0;
    int workers = 1;
    std::set<RuleId> rules = allRules();
    double epsilon = 0;
    std::size_t similarityThreshold = 1;
    BugSet bugs;                          // reference target only
    std::string reportDir;                // empty: reports are kept in memory only
    GenConfig generator;                  // seed and dialect are set per iteration
    std::int64_t minRows = 1;             // every table holds at least this many rows
    int queriesPerDatabase = 1;
    int retryCap = 5;                     // regenerations per query slot
    bool reduce = true;

    /// Throws ConfigError.
    void validate() const;
};

struct RunStats {
    std::uint64_t pairsValidated = 0;
    std::uint64_t passes = 0;
    std::uint64_t violations = 0;
    std::uint64_t incomparables = 0;
    std::uint64_t errors = 0;  // iterations or query slots abandoned after errors
    double elapsed = 0;        // seconds; ignored by ==

    double violationRate() const {
        return pairsValidated ? static_cast<double>(violations) / static_cast<double>(pairsValidated) : 0.0;
    }
    /// violationRate with exactly four decimals, e.g. "0.0123".
    std::string violationRateText() const;
    bool sumInvariantHolds() const { return passes + violations + incomparables == pairsValidated; }

    friend bool operator==(const RunStats& a, const RunStats& b) {
        return a.pairsValidated == b.pairsValidated && a.passes == b.passes && a.violations == b.violations &&
               a.incomparables == b.incomparables && a.errors == b.errors;
    }
};

struct IssueReport {
    TestCase testCase;  // minimized unless reduction was disabled or failed
    ClauseKind clause = ClauseKind::Join;
    Violation verdict;
    std::string originalSQL;
    std::string restrictedSQL;
    std::array<RawPlan, 2> rawPlans;
    std::array<OpSequence, 2> opSequences;
    std::string signature;
    std::uint64_t seed = 0;       // iteration seed fed to the generators
    std::uint64_t iteration = 0;  // index within the campaign
    Dialect dialect = Dialect::Reference;
    std::string target;
    std::string targetVersion;
    std::string timestamp;  // ISO 8601 UTC
    BugSet bugs;
    CheckOptions options;
    bool reduced = false;
};

struct CampaignResult {
    RunStats stats;
    std::vector<IssueReport> reports;      // one per distinct signature, in iteration order
    std::vector<std::string> reportPaths;  // directories written, when reportDir is set
};

/// Dedup key: sorted applied rules, clause kind and the root operator names
/// of both plans, e.g. "rules=1,3|clause=JOIN|ops=join/join".
std::string dedupSignature(const IssueReport& report);

/// Runs the generate, restrict, explain and check loop until the budget is
/// spent. Throws AdapterUnavailable and ConfigError; any other per-iteration
/// failure is counted in stats.errors.
CampaignResult runCampaign(const RunConfig& config);

/// Writes repro.sql and report.json into dir (created if needed).
void writeReport(const IssueReport& report, const std::filesystem::path& dir);
/// Throws Error when report.json is missing or malformed.
IssueReport readReport(const std::filesystem::path& dir);

struct ReplayResult {
    Verdict verdict;
    bool mismatch = false;  // fresh verdict differs from the stored one
};

/// Offline: re-parses the stored raw plans. Otherwise re-runs the setup and
/// both EXPLAINs on adapter (which must not be null).
ReplayResult replay(const IssueReport& report, DbmsAdapter* adapter, bool offline);

/// Adapter-side reproduction of a test case: fresh namespace, setup, row
/// counts, both EXPLAINs. Throws on target errors.
struct Observation {
    std::array<RawPlan, 2> rawPlans;
    std::array<PlanNode, 2> plans;
    Verdict verdict;
};
Observation observe(DbmsAdapter& adapter, const TestCase& testCase, const CheckOptions& options);

}  // namespace monocard
