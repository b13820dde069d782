#include "monocard/adapter.hpp"

#include "monocard/errors.hpp"
#include "monocard/sql_parser.hpp"
#include "monocard/wire.hpp"

namespace monocard {

PlanNode parseRawPlan(const RawPlan& raw) {
    return raw.format == RawPlan::Format::Text ? parseTextPlan(raw.text) : parseTabularPlan(raw.rows);
}

void ReferenceAdapter::executeStatement(const std::string& sql) {
    try {
        engine_.execute(sql);
    } catch (const ParseError& e) {
        throw TargetError(e.what());
    }
}

RawPlan ReferenceAdapter::explain(const std::string& selectSql) {
    SelectQuery query;
    try {
        query = parseSelect(selectSql);
    } catch (const ParseError& e) {
        throw TargetError(e.what());
    }
    RawPlan raw;
    raw.format = RawPlan::Format::Text;
    try {
        raw.text = renderTextPlan(engine_.estimatePlan(query));
    } catch (const UnresolvedColumn& e) {
        throw TargetError(e.what());
    } catch (const UnsupportedFeature& e) {
        throw TargetError(e.what());
    }
    return raw;
}

void ReferenceAdapter::resetNamespace() {
    engine_ = Engine();
    engine_.setBugs(bugs_);
}

std::int64_t ReferenceAdapter::countRows(const std::string& table) {
    const MemTable* t = engine_.table(table);
    if (!t) throw TargetError("no such table: " + table);
    return static_cast<std::int64_t>(t->rows.size());
}

std::string ReferenceAdapter::version() const {
    std::string out = "reference-1";
    for (BugId bug : bugs_) out += "+" + std::string(bugName(bug));
    return out;
}

std::unique_ptr<DbmsAdapter> makeAdapter(const std::string& target, const BugSet& bugs, int worker) {
    if (target == "reference") return std::make_unique<ReferenceAdapter>(bugs);
    const ConnectionUrl url = parseUrl(target);
    if (!bugs.empty()) throw ConfigError("--inject-bugs applies to the reference target only");
    if (url.scheme == "postgres" || url.scheme == "postgresql" || url.scheme == "cockroach") {
        return std::make_unique<PostgresAdapter>(url, worker);
    }
    if (url.scheme == "mysql" || url.scheme == "tidb") return std::make_unique<MySqlAdapter>(url, worker);
    throw ConfigError("unknown target scheme: " + url.scheme);
}

}  // namespace monocard
