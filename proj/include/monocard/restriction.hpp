#pragma once

#include <set>
#include <string_view>
#include <vector>

#include "monocard/rng.hpp"
#include "monocard/sql_model.hpp"

namespace monocard {

/// Restriction rules are numbered 1..12; see ruleName() for the mapping.
using RuleId = int;
constexpr RuleId kFirstRule = 1;
constexpr RuleId kLastRule = 12;

enum class ClauseKind { Join, Select, GroupBy, Having, Where, Limit };

std::string_view clauseName(ClauseKind clause);
ClauseKind clauseOf(RuleId rule);
std::string_view ruleName(RuleId rule);
std::set<RuleId> allRules();

struct RestrictionContext {
    Dialect dialect = Dialect::Reference;
    /// Needed to expand `*` and to type predicate columns; queries must be resolved.
    const Schema* schema = nullptr;
    /// Rule 5 is only sound when every table holds at least one row.
    bool tablesNonEmpty = true;
    int predicateDepth = 2;
    std::set<RuleId> enabled = allRules();
    int maxRules = 2;
};

struct RestrictionOutcome {
    SelectQuery restricted;
    std::vector<RuleId> applied;
    ClauseKind clause = ClauseKind::Join;
};

std::set<RuleId> applicableRules(const SelectQuery& query, const RestrictionContext& ctx);

/// Throws RuleNotApplicable when rule is not in applicableRules(query, ctx).
SelectQuery applyRule(const SelectQuery& query, RuleId rule, Rng& rng, const RestrictionContext& ctx);

/// Picks a clause uniformly among those with an applicable rule and applies
/// one or more of its rules. Throws NoApplicableRule.
RestrictionOutcome restrict(const SelectQuery& query, Rng& rng, const RestrictionContext& ctx);

}  // namespace monocard
