#include "monocard/restriction.hpp"

#include <algorithm>
#include <map>

#include "monocard/datagen.hpp"
#include "monocard/errors.hpp"

namespace monocard {

std::string_view clauseName(ClauseKind clause) {
    switch (clause) {
        case ClauseKind::Join:
            return "JOIN";
        case ClauseKind::Select:
            return "SELECT";
        case ClauseKind::GroupBy:
            return "GROUP BY";
        case ClauseKind::Having:
            return "HAVING";
        case ClauseKind::Where:
            return "WHERE";
        case ClauseKind::Limit:
            return "LIMIT";
    }
    return "?";
}

ClauseKind clauseOf(RuleId rule) {
    if (rule >= 1 && rule <= 5) return ClauseKind::Join;
    if (rule == 6) return ClauseKind::Select;
    if (rule == 7) return ClauseKind::GroupBy;
    if (rule == 8) return ClauseKind::Having;
    if (rule >= 9 && rule <= 11) return ClauseKind::Where;
    if (rule == 12) return ClauseKind::Limit;
    throw Error("no such rule: " + std::to_string(rule));
}

std::string_view ruleName(RuleId rule) {
    static constexpr std::string_view names[] = {
        "LeftToInnerJoin", "RightToInnerJoin", "FullToLeftJoin", "FullToRightJoin",
        "CrossToFullJoin", "AllToDistinct",    "AddGroupBy",     "AddHaving",
        "AddWhere",        "ConjoinWhere",     "DropOrOperand",  "LowerLimit"};
    if (rule < kFirstRule || rule > kLastRule) throw Error("no such rule: " + std::to_string(rule));
    return names[rule - 1];
}

std::set<RuleId> allRules() {
    std::set<RuleId> out;
    for (RuleId r = kFirstRule; r <= kLastRule; ++r) out.insert(r);
    return out;
}

namespace {

std::vector<std::size_t> joinsOfType(const SelectQuery& q, JoinType type) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < q.joins.size(); ++i) {
        if (q.joins[i].type == type) out.push_back(i);
    }
    return out;
}

/// CROSS joins whose left input is guaranteed non-empty over non-empty tables.
/// An earlier INNER join can empty the left input, after which CROSS yields 0
/// rows but FULL still yields the right table.
std::vector<std::size_t> crossToFullCandidates(const SelectQuery& q) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < q.joins.size(); ++i) {
        if (q.joins[i].type == JoinType::Inner) break;
        if (q.joins[i].type == JoinType::Cross) out.push_back(i);
    }
    return out;
}

bool ungroupedAggregate(const SelectQuery& q) {
    if (q.hasGroupBy()) return false;
    return std::any_of(q.selectList.begin(), q.selectList.end(), [](const ExprPtr& e) { return containsAggregate(*e); });
}

bool hasStar(const SelectQuery& q) {
    return std::any_of(q.selectList.begin(), q.selectList.end(), [](const ExprPtr& e) { return e->is<Star>(); });
}

const Schema& needSchema(const RestrictionContext& ctx) {
    if (!ctx.schema) throw Error("restriction needs a schema");
    return *ctx.schema;
}

ScopedColumn scoped(const Schema& schema, const ColumnRef& ref) {
    const TableDef* table = findTable(schema, ref.table);
    const ColumnDef* column = table ? table->findColumn(ref.column) : nullptr;
    if (!column) throw UnresolvedColumn("unresolved column " + ref.table + "." + ref.column);
    return {table->name, column};
}

/// Rule 7 core: group by a random non-empty subset of the selected columns and
/// make the select list grouping-compatible (non-keys become MIN(...)).
SelectQuery addGroupBy(const SelectQuery& q, Rng& rng, const RestrictionContext& ctx) {
    const Schema& schema = needSchema(ctx);
    std::vector<ColumnRef> candidates;
    const bool star = hasStar(q);
    if (star) {
        for (const auto& c : scopeColumns(schema, q.tables())) candidates.push_back({c.table, c.column->name});
    } else {
        for (const auto& e : q.selectList) {
            if (const auto* ref = e->as<ColumnRef>()) {
                if (std::find(candidates.begin(), candidates.end(), *ref) == candidates.end()) candidates.push_back(*ref);
            }
        }
        if (candidates.empty()) {
            for (const auto& c : scopeColumns(schema, q.tables())) candidates.push_back({c.table, c.column->name});
        }
    }
    for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[rng.below(i)]);
    const auto keyCount = static_cast<std::size_t>(
        rng.between(1, std::min<std::int64_t>(2, static_cast<std::int64_t>(candidates.size()))));
    candidates.resize(keyCount);

    SelectQuery out = q;
    for (const auto& k : candidates) out.groupBy.push_back(col(k.table, k.column));
    if (star) {
        out.selectList = out.groupBy;
    } else {
        out.selectList.clear();
        for (const auto& e : q.selectList) {
            const auto* ref = e->as<ColumnRef>();
            const bool isKey = ref && std::find(candidates.begin(), candidates.end(), *ref) != candidates.end();
            const bool constant = referencedColumns(*e).empty();
            out.selectList.push_back(isKey || constant ? e : call("MIN", {e}));
        }
    }
    return out;
}

ExprPtr havingPredicate(const SelectQuery& q, Rng& rng, const RestrictionContext& ctx) {
    const Schema& schema = needSchema(ctx);
    std::vector<ScopedColumn> keys;
    for (const auto& k : q.groupBy) {
        if (const auto* ref = k->as<ColumnRef>()) keys.push_back(scoped(schema, *ref));
    }
    if (keys.empty()) throw RuleNotApplicable("HAVING needs a column grouping key");
    return generatePredicate(keys, std::max(ctx.predicateDepth, 0), rng);
}

bool hasColumnKey(const SelectQuery& q) {
    return std::any_of(q.groupBy.begin(), q.groupBy.end(), [](const ExprPtr& e) { return e->is<ColumnRef>(); });
}

}  // namespace

std::set<RuleId> applicableRules(const SelectQuery& q, const RestrictionContext& ctx) {
    std::set<RuleId> out;
    const bool full = supportsFullJoin(ctx.dialect);
    if (!joinsOfType(q, JoinType::Left).empty()) out.insert(1);
    if (!joinsOfType(q, JoinType::Right).empty()) out.insert(2);
    if (!joinsOfType(q, JoinType::Full).empty()) {
        out.insert(3);
        out.insert(4);
    }
    if (full && ctx.tablesNonEmpty && !crossToFullCandidates(q).empty()) out.insert(5);
    if (q.quantifier == Quantifier::All) out.insert(6);
    if (!q.hasGroupBy() && !ungroupedAggregate(q)) out.insert(7);
    if (!q.having && ((q.hasGroupBy() && hasColumnKey(q)) || (!q.hasGroupBy() && !ungroupedAggregate(q)))) {
        out.insert(8);
    }
    if (!q.where) out.insert(9);
    if (q.where) out.insert(10);
    if (q.where) {
        const auto* l = q.where->as<Logical>();
        if (l && l->op == LogicalOp::Or) out.insert(11);
    }
    if (q.limit && *q.limit >= 2) out.insert(12);

    std::set<RuleId> enabled;
    std::set_intersection(out.begin(), out.end(), ctx.enabled.begin(), ctx.enabled.end(),
                          std::inserter(enabled, enabled.begin()));
    return enabled;
}

SelectQuery applyRule(const SelectQuery& q, RuleId rule, Rng& rng, const RestrictionContext& ctx) {
    if (!applicableRules(q, ctx).count(rule)) {
        throw RuleNotApplicable("rule " + std::to_string(rule) + " (" + std::string(ruleName(rule)) +
                                ") does not apply");
    }
    SelectQuery out = q;
    auto retype = [&](JoinType from, JoinType to) {
        const auto idx = joinsOfType(q, from);
        out.joins[idx[rng.below(idx.size())]].type = to;
    };
    switch (rule) {
        case 1:
            retype(JoinType::Left, JoinType::Inner);
            break;
        case 2:
            retype(JoinType::Right, JoinType::Inner);
            break;
        case 3:
            retype(JoinType::Full, JoinType::Left);
            break;
        case 4:
            retype(JoinType::Full, JoinType::Right);
            break;
        case 5: {
            const auto idx = crossToFullCandidates(q);
            auto& j = out.joins[idx[rng.below(idx.size())]];
            j.type = JoinType::Full;
            j.on = lit(Value::boolean(true));
            break;
        }
        case 6:
            out.quantifier = Quantifier::Distinct;
            break;
        case 7:
            out = addGroupBy(q, rng, ctx);
            break;
        case 8:
            if (!out.hasGroupBy()) out = addGroupBy(q, rng, ctx);
            out.having = havingPredicate(out, rng, ctx);
            break;
        case 9:
            out.where = generatePredicate(scopeColumns(needSchema(ctx), q.tables()), ctx.predicateDepth, rng);
            break;
        case 10:
            out.where =
                andOf(q.where, generatePredicate(scopeColumns(needSchema(ctx), q.tables()), ctx.predicateDepth, rng));
            break;
        case 11: {
            auto operands = q.where->as<Logical>()->operands;
            operands.erase(operands.begin() + static_cast<std::ptrdiff_t>(rng.below(operands.size())));
            out.where = operands.size() == 1 ? operands.front() : logical(LogicalOp::Or, std::move(operands));
            break;
        }
        case 12:
            out.limit = rng.between(1, *q.limit - 1);
            break;
        default:
            throw RuleNotApplicable("no such rule: " + std::to_string(rule));
    }
    return out;
}

RestrictionOutcome restrict(const SelectQuery& q, Rng& rng, const RestrictionContext& ctx) {
    const auto rules = applicableRules(q, ctx);
    if (rules.empty()) throw NoApplicableRule("no restriction rule applies to the query");
    std::map<ClauseKind, std::vector<RuleId>> byClause;
    for (RuleId r : rules) byClause[clauseOf(r)].push_back(r);
    std::vector<ClauseKind> clauses;
    for (const auto& [clause, _] : byClause) clauses.push_back(clause);

    RestrictionOutcome outcome;
    outcome.clause = rng.pick(clauses);
    outcome.restricted = q;
    std::vector<RuleId> candidates = byClause[outcome.clause];
    const int budget = std::max(1, ctx.maxRules);
    for (int step = 0; step < budget && !candidates.empty(); ++step) {
        if (step > 0 && !rng.chance(0.5)) break;
        const RuleId rule = rng.pick(candidates);
        outcome.restricted = applyRule(outcome.restricted, rule, rng, ctx);
        outcome.applied.push_back(rule);
        // Applicability is re-evaluated on the rewritten query.
        candidates.clear();
        for (RuleId r : applicableRules(outcome.restricted, ctx)) {
            if (clauseOf(r) == outcome.clause) candidates.push_back(r);
        }
    }
    return outcome;
}

}  // namespace monocard
