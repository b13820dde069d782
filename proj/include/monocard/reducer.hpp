#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "monocard/refengine.hpp"
#include "monocard/restriction.hpp"
#include "monocard/sql_model.hpp"
#include "monocard/validator.hpp"

namespace monocard {

struct TestCase {
    std::vector<std::string> setupStatements;
    SelectQuery original;
    SelectQuery restricted;
    std::vector<RuleId> appliedRules;
};

using StillFails = std::function<bool(const TestCase&)>;

struct ReduceStats {
    std::size_t probes = 0;
    std::size_t initialStatements = 0;
    std::size_t finalStatements = 0;
};

/// ddmin over setup statements. Statements the queries cannot do without
/// (CREATE TABLE and ANALYZE of referenced tables) are pinned; a table the
/// queries never mention is removed as one unit together with its INSERTs
/// and ANALYZE. Finishes with a single-statement removal pass so the result
/// is 1-minimal. Throws NotReproducible if stillFails(testCase) is false.
TestCase minimize(const TestCase& testCase, const StillFails& stillFails, ReduceStats* stats = nullptr);

/// Replays on a fresh reference engine with the given bugs and reports whether
/// the pair is still a Violation. Replay errors and empty referenced tables
/// count as "does not fail".
StillFails referenceStillFails(BugSet bugs, CheckOptions options = {});

/// Replays setup on a fresh engine and returns the verdict for the pair.
Verdict replayOnReference(const TestCase& testCase, const BugSet& bugs, const CheckOptions& options = {});

}  // namespace monocard
