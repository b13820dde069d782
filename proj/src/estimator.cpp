// Cardinality estimator of the reference engine.
//
// Every quantity is an exact rational so that the textbook formulas stay
// monotone under the restriction rules without rounding noise; values are
// rounded once, to six decimals, when they are attached to plan nodes.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>

#include "monocard/errors.hpp"
#include "monocard/refengine.hpp"

namespace monocard {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

const Rational kOne(1);
const Rational kZero(0);
const Rational kDefault(1, 3);

Rational exact(double d) {
    // Every finite double is a dyadic rational; build it without rounding.
    int exp = 0;
    const double mant = std::frexp(d, &exp);
    const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
    Rational r(scaled);
    exp -= 53;
    if (exp > 0) {
        r *= Rational(BigInt(1) << exp);
    } else if (exp < 0) {
        r /= Rational(BigInt(1) << -exp);
    }
    return r;
}

Rational numeric(const Value& v) { return v.isInteger() ? Rational(v.asInteger()) : exact(v.asDecimal()); }

Rational clamp01(const Rational& r) { return r < kZero ? kZero : (r > kOne ? kOne : r); }

BigInt floorDiv(const Rational& r) {
    BigInt q = boost::multiprecision::numerator(r) / boost::multiprecision::denominator(r);
    if (q * boost::multiprecision::denominator(r) > boost::multiprecision::numerator(r)) --q;
    return q;
}

BigInt ceilDiv(const Rational& r) {
    BigInt q = floorDiv(r);
    if (Rational(q) < r) ++q;
    return q;
}

/// Round-half-up to six decimals. Monotone, so estimate order survives.
double toEstimate(const Rational& r) {
    const BigInt scaled = floorDiv(r * 1000000 + Rational(1, 2));
    return static_cast<double>(scaled) / 1e6;
}

enum class Context { On, OuterOn, Where, Having };

struct EstNode {
    std::string op;
    std::string qualifier;
    std::vector<std::pair<std::string, std::string>> attrs;
    Rational rows;
    std::vector<EstNode> children;
};

class Estimator {
public:
    Estimator(const Engine& engine, const SelectQuery& q) : engine_(engine), q_(q) {
        for (const auto& name : q.tables()) {
            const MemTable* t = engine.table(name);
            if (!t) throw UnresolvedColumn("unknown table " + name);
            if (!t->stats || !t->statsFresh) throw StaleStats("statistics of " + name + " are stale; run ANALYZE");
        }
    }

    EstNode build() {
        const auto where = q_.where ? conjuncts(q_.where) : std::vector<ExprPtr>{};
        std::vector<bool> pushed(where.size(), false);
        std::vector<EstNode> scans;
        const auto tables = q_.tables();
        for (std::size_t i = 0; i < tables.size(); ++i) {
            EstNode scan{"scan", "", {{"table", tables[i]}}, Rational(stats(tables[i]).rowCount), {}};
            std::vector<ExprPtr> local;
            if (canPushTo(i)) {
                for (std::size_t c = 0; c < where.size(); ++c) {
                    if (!pushed[c] && onlyTable(*where[c], tables[i])) {
                        pushed[c] = true;
                        local.push_back(where[c]);
                    }
                }
            }
            scans.push_back(local.empty() ? std::move(scan) : filter(std::move(scan), local, Context::Where));
        }
        EstNode current = std::move(scans[0]);
        for (std::size_t j = 0; j < q_.joins.size(); ++j) current = join(q_.joins[j], std::move(current), std::move(scans[j + 1]));

        std::vector<ExprPtr> remaining;
        for (std::size_t c = 0; c < where.size(); ++c) {
            if (!pushed[c]) remaining.push_back(where[c]);
        }
        if (!remaining.empty()) current = filter(std::move(current), remaining, Context::Where);

        const bool scalarAggregate =
            !q_.hasGroupBy() && std::any_of(q_.selectList.begin(), q_.selectList.end(),
                                            [](const ExprPtr& e) { return containsAggregate(*e); });
        if (q_.hasGroupBy()) {
            Rational ndv(1);
            std::string keys;
            for (const auto& k : q_.groupBy) {
                ndv *= ndvOf(*k);
                keys += (keys.empty() ? "" : ", ") + renderExpr(*k, Dialect::Reference);
            }
            const Rational rows = std::min(current.rows, ndv);
            current = EstNode{"group", "", {{"keys", keys}}, rows, {std::move(current)}};
        } else if (scalarAggregate) {
            current = EstNode{"group", "scalar", {}, kOne, {std::move(current)}};
        }
        if (q_.having) current = filter(std::move(current), {q_.having}, Context::Having);
        if (q_.quantifier == Quantifier::Distinct) {
            Rational ndv(1);
            for (const auto& e : q_.selectList) ndv *= ndvOf(*e);
            Rational rows = std::min(current.rows, ndv);
            if (engine_.bugs().count(BugId::DistinctInflate)) {
                Rational base(1);
                for (const auto& t : tables) base *= Rational(stats(t).rowCount);
                rows = std::min(ndv, base);
            }
            current = EstNode{"distinct", "", {}, rows, {std::move(current)}};
        }
        if (q_.limit) {
            const Rational rows = std::min(current.rows, Rational(*q_.limit));
            current = EstNode{"limit", "", {{"count", std::to_string(*q_.limit)}}, rows, {std::move(current)}};
        }
        return current;
    }

private:
    const TableStats& stats(const std::string& table) const { return *engine_.table(table)->stats; }

    const ColumnStats* columnStats(const ColumnRef& ref, const ColumnDef** def = nullptr) const {
        const MemTable* t = engine_.table(ref.table);
        if (!t) return nullptr;
        const auto idx = t->def.columnIndex(ref.column);
        if (!idx) return nullptr;
        if (def) *def = &t->def.columns[*idx];
        return &t->stats->columns[*idx];
    }

    /// Pushing a WHERE conjunct to table i below the joins leaves the root
    /// estimate unchanged only when every join on the way scales linearly in
    /// that table's row count.
    bool canPushTo(std::size_t i) const {
        if (i > 0) {
            const JoinType t = q_.joins[i - 1].type;
            if (t != JoinType::Inner && t != JoinType::Right && t != JoinType::Cross) return false;
        }
        for (std::size_t j = std::max<std::size_t>(i, 1); j <= q_.joins.size(); ++j) {
            if (j == i) continue;
            const JoinType t = q_.joins[j - 1].type;
            if (t != JoinType::Inner && t != JoinType::Left && t != JoinType::Cross) return false;
        }
        return true;
    }

    static bool onlyTable(const Expr& e, const std::string& table) {
        const auto cols = referencedColumns(e);
        return !cols.empty() && std::all_of(cols.begin(), cols.end(), [&](const ColumnRef& c) { return c.table == table; });
    }

    EstNode filter(EstNode input, const std::vector<ExprPtr>& preds, Context ctx) const {
        Rational s(1);
        std::string text;
        for (const auto& p : preds) {
            s *= selectivity(*p, ctx);
            text += (text.empty() ? "" : " AND ") + renderExpr(*p, Dialect::Reference);
        }
        const Rational rows = input.rows * s;
        return EstNode{"filter", "", {{"predicate", text}}, rows, {std::move(input)}};
    }

    EstNode join(const JoinClause& j, EstNode left, EstNode right) const {
        const bool outer = j.type == JoinType::Left || j.type == JoinType::Right || j.type == JoinType::Full;
        const Rational s = j.on ? selectivity(*j.on, outer ? Context::OuterOn : Context::On) : kOne;
        const Rational matched = left.rows * right.rows * s;
        Rational rows;
        std::string qualifier;
        switch (j.type) {
            case JoinType::Inner:
                rows = matched;
                qualifier = "inner";
                break;
            case JoinType::Left:
                rows = std::max(left.rows, matched);
                qualifier = "left outer";
                break;
            case JoinType::Right:
                rows = std::max(right.rows, matched);
                qualifier = "right outer";
                break;
            case JoinType::Full:
                rows = std::max({left.rows, right.rows, matched});
                qualifier = "full outer";
                break;
            case JoinType::Cross:
                rows = left.rows * right.rows;
                qualifier = "cross";
                break;
        }
        std::vector<std::pair<std::string, std::string>> attrs;
        if (j.on) attrs.emplace_back("pred", renderExpr(*j.on, Dialect::Reference));
        return EstNode{"join", qualifier, std::move(attrs), rows, {std::move(left), std::move(right)}};
    }

    /// Distinct values a select item or grouping key can take (NULL counts once).
    Rational ndvOf(const Expr& e) const {
        if (e.is<Star>()) {
            Rational n(1);
            for (const auto& t : q_.tables()) {
                const auto& ts = stats(t);
                for (const auto& cs : ts.columns) n *= ndvEff(cs);
            }
            return n;
        }
        if (containsAggregate(e)) return kOne;
        Rational n(1);
        for (const auto& c : referencedColumns(e)) {
            if (const auto* cs = columnStats(c)) n *= ndvEff(*cs);
        }
        return n;
    }

    static Rational ndvEff(const ColumnStats& cs) {
        return Rational(std::max<std::int64_t>(1, cs.distinctCount + (cs.nullCount > 0 ? 1 : 0)));
    }

    Rational nonNullFraction(const ColumnRef& ref) const {
        const MemTable* t = engine_.table(ref.table);
        const auto& ts = *t->stats;
        if (ts.rowCount == 0) return kZero;
        const auto* cs = columnStats(ref);
        return Rational(ts.rowCount - cs->nullCount, ts.rowCount);
    }

    Rational selectivity(const Expr& e, Context ctx) const {
        if (const auto* l = e.as<Logical>()) {
            if (l->op == LogicalOp::Not) return kOne - selectivity(*l->operands[0], ctx);
            if (l->op == LogicalOp::And) {
                Rational s(1);
                for (const auto& o : l->operands) s *= selectivity(*o, ctx);
                return s;
            }
            const auto& bugs = engine_.bugs();
            if ((ctx == Context::Where || ctx == Context::Having) && bugs.count(BugId::OrOperandOverlap) &&
                sameColumnSet(l->operands)) {
                Rational s(1);
                for (const auto& o : l->operands) s *= selectivity(*o, ctx);
                return s;
            }
            Rational s(0);
            for (const auto& o : l->operands) {
                const Rational t = selectivity(*o, ctx);
                s = s + t - s * t;
            }
            if (ctx == Context::OuterOn && bugs.count(BugId::OrDoubleCount)) s *= s;
            return s;
        }
        if (const auto* c = e.as<Comparison>()) return comparison(*c);
        if (const auto* n = e.as<IsNull>()) {
            Rational s = kDefault;
            if (const auto* ref = n->operand->as<ColumnRef>()) {
                s = kOne - nonNullFraction(*ref);
            } else if (const auto* lit = n->operand->as<Literal>()) {
                s = lit->value.isNull() ? kOne : kZero;
            }
            return n->negated ? kOne - s : s;
        }
        if (const auto* b = e.as<Between>()) return betweenSel(*b);
        if (const auto* ref = e.as<ColumnRef>()) {
            const ColumnDef* def = nullptr;
            columnStats(*ref, &def);
            if (def && def->dataType == DataType::Boolean) return equality(*ref, Value::boolean(true));
            return notEqual(*ref, Value::integer(0));
        }
        if (const auto* lit = e.as<Literal>()) {
            const Value& v = lit->value;
            if (v.isBool()) return v.asBool() ? kOne : kZero;
            if (v.isNumeric()) return v.asNumber() != 0 ? kOne : kZero;
            return kZero;
        }
        return kDefault;
    }

    static bool sameColumnSet(const std::vector<ExprPtr>& operands) {
        auto key = [](const Expr& e) {
            auto cols = referencedColumns(e);
            std::vector<std::string> out;
            for (const auto& c : cols) out.push_back(c.table + "." + c.column);
            std::sort(out.begin(), out.end());
            return out;
        };
        const auto first = key(*operands.front());
        if (first.empty()) return false;
        return std::all_of(operands.begin() + 1, operands.end(), [&](const ExprPtr& o) { return key(*o) == first; });
    }

    Rational equality(const ColumnRef& ref, const Value& v) const {
        if (v.isNull()) return kZero;
        const auto* cs = columnStats(ref);
        if (!cs || cs->distinctCount == 0) return kZero;
        return nonNullFraction(ref) / Rational(cs->distinctCount);
    }

    Rational notEqual(const ColumnRef& ref, const Value& v) const {
        if (v.isNull()) return kZero;
        const auto* cs = columnStats(ref);
        if (!cs || cs->distinctCount == 0) return kZero;
        return nonNullFraction(ref) * (kOne - kOne / Rational(cs->distinctCount));
    }

    /// Fraction of the column's value range inside [lo, hi] (either bound may be open).
    Rational rangeFraction(const ColumnRef& ref, const std::optional<Rational>& lo, bool loStrict,
                           const std::optional<Rational>& hi, bool hiStrict) const {
        const ColumnDef* def = nullptr;
        const auto* cs = columnStats(ref, &def);
        if (!cs || cs->distinctCount == 0) return kZero;
        const Rational mn = numeric(cs->minValue), mx = numeric(cs->maxValue);
        if (def->dataType == DataType::Integer) {
            BigInt a = floorDiv(mn), b = floorDiv(mx);
            if (lo) a = std::max(a, loStrict ? floorDiv(*lo) + 1 : ceilDiv(*lo));
            if (hi) b = std::min(b, hiStrict ? ceilDiv(*hi) - 1 : floorDiv(*hi));
            if (b < a) return kZero;
            const BigInt span = floorDiv(mx) - floorDiv(mn) + 1;
            return Rational(b - a + 1) / Rational(span);
        }
        if (mn == mx) {
            const bool inLo = !lo || (loStrict ? mn > *lo : mn >= *lo);
            const bool inHi = !hi || (hiStrict ? mn < *hi : mn <= *hi);
            return inLo && inHi ? kOne : kZero;
        }
        const Rational a = lo ? std::max(mn, *lo) : mn;
        const Rational b = hi ? std::min(mx, *hi) : mx;
        if (b < a) return kZero;
        return clamp01((b - a) / (mx - mn));
    }

    bool numericColumn(const ColumnRef& ref) const {
        const ColumnDef* def = nullptr;
        columnStats(ref, &def);
        return def && (def->dataType == DataType::Integer || def->dataType == DataType::Decimal);
    }

    Rational comparison(const Comparison& c) const {
        const Expr* lhs = c.lhs.get();
        const Expr* rhs = c.rhs.get();
        CompareOp op = c.op;
        if (!lhs->is<ColumnRef>() && rhs->is<ColumnRef>()) {
            std::swap(lhs, rhs);
            op = flipCompareOp(op);
        }
        const auto* ref = lhs->as<ColumnRef>();
        if (ref && rhs->is<ColumnRef>()) {
            if (op != CompareOp::Eq) return kDefault;
            const auto* a = columnStats(*ref);
            const auto* b = columnStats(*rhs->as<ColumnRef>());
            if (!a || !b) return kDefault;
            const auto d = std::max(a->distinctCount, b->distinctCount);
            return d == 0 ? kZero : kOne / Rational(d);
        }
        const auto* lit = rhs->as<Literal>();
        if (ref && lit) {
            const Value& v = lit->value;
            if (v.isNull()) return kZero;
            if (op == CompareOp::Eq) return equality(*ref, v);
            if (op == CompareOp::Ne) return notEqual(*ref, v);
            if (!numericColumn(*ref) || !v.isNumeric()) return kDefault;
            const Rational x = numeric(v);
            Rational f;
            switch (op) {
                case CompareOp::Lt:
                    f = rangeFraction(*ref, std::nullopt, false, x, true);
                    break;
                case CompareOp::Le:
                    f = rangeFraction(*ref, std::nullopt, false, x, false);
                    break;
                case CompareOp::Gt:
                    f = rangeFraction(*ref, x, true, std::nullopt, false);
                    break;
                default:
                    f = rangeFraction(*ref, x, false, std::nullopt, false);
                    break;
            }
            return nonNullFraction(*ref) * f;
        }
        if (lhs->is<Literal>() && rhs->is<Literal>()) {
            const Value& a = lhs->as<Literal>()->value;
            const Value& b = rhs->as<Literal>()->value;
            if (a.isNull() || b.isNull()) return kZero;
            if (a.isNumeric() && b.isNumeric()) {
                const Rational x = numeric(a), y = numeric(b);
                const int cmpv = x < y ? -1 : (x > y ? 1 : 0);
                switch (op) {
                    case CompareOp::Lt:
                        return cmpv < 0 ? kOne : kZero;
                    case CompareOp::Le:
                        return cmpv <= 0 ? kOne : kZero;
                    case CompareOp::Eq:
                        return cmpv == 0 ? kOne : kZero;
                    case CompareOp::Ne:
                        return cmpv != 0 ? kOne : kZero;
                    case CompareOp::Ge:
                        return cmpv >= 0 ? kOne : kZero;
                    case CompareOp::Gt:
                        return cmpv > 0 ? kOne : kZero;
                }
            }
        }
        return kDefault;
    }

    Rational betweenSel(const Between& b) const {
        const auto* ref = b.operand->as<ColumnRef>();
        const auto* lo = b.low->as<Literal>();
        const auto* hi = b.high->as<Literal>();
        if (!ref || !lo || !hi) return kDefault;
        if (lo->value.isNull() || hi->value.isNull()) return kZero;
        if (!numericColumn(*ref) || !lo->value.isNumeric() || !hi->value.isNumeric()) return kDefault;
        return nonNullFraction(*ref) * rangeFraction(*ref, numeric(lo->value), false, numeric(hi->value), false);
    }

    const Engine& engine_;
    const SelectQuery& q_;
};

PlanNode toPlan(const EstNode& n) {
    PlanNode p;
    p.opName = n.op;
    p.estimatedRows = toEstimate(n.rows);
    if (!n.qualifier.empty()) p.rawAttributes.emplace_back("qualifier", n.qualifier);
    p.rawAttributes.insert(p.rawAttributes.end(), n.attrs.begin(), n.attrs.end());
    for (const auto& c : n.children) p.children.push_back(toPlan(c));
    return p;
}

}  // namespace

PlanNode Engine::estimatePlan(const SelectQuery& query) const {
    const Schema s = schema();
    const auto check = validate(query, s);
    if (!check) throw UnresolvedColumn(check.path + ": " + check.message);
    const SelectQuery q = resolve(query, s);
    Estimator est(*this, q);
    return toPlan(est.build());
}

}  // namespace monocard
