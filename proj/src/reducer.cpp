#include "monocard/reducer.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "monocard/errors.hpp"
#include "monocard/sql_parser.hpp"

namespace monocard {

namespace {

struct Unit {
    std::vector<std::size_t> statements;  // indices into the setup list
};

std::set<std::string> referencedTables(const TestCase& tc) {
    std::set<std::string> out;
    for (const auto& t : tc.original.tables()) out.insert(t);
    for (const auto& t : tc.restricted.tables()) out.insert(t);
    return out;
}

TestCase withStatements(const TestCase& tc, const std::vector<std::size_t>& keep) {
    TestCase out = tc;
    out.setupStatements.clear();
    for (std::size_t i : keep) out.setupStatements.push_back(tc.setupStatements[i]);
    return out;
}

}  // namespace

TestCase minimize(const TestCase& testCase, const StillFails& stillFails, ReduceStats* stats) {
    ReduceStats local;
    ReduceStats& st = stats ? *stats : local;
    st = {};
    st.initialStatements = testCase.setupStatements.size();
    auto probe = [&](const TestCase& tc) {
        ++st.probes;
        return stillFails(tc);
    };
    if (!probe(testCase)) throw NotReproducible("test case does not fail before reduction");

    // Partition statements into pinned scaffolding and removable units.
    const auto referenced = referencedTables(testCase);
    std::vector<std::size_t> pinned;
    std::vector<Unit> units;
    std::map<std::string, std::size_t> tableUnit;  // unreferenced table -> unit index
    const auto& setup = testCase.setupStatements;
    for (std::size_t i = 0; i < setup.size(); ++i) {
        std::optional<Statement> stmt;
        try {
            stmt = parseStatement(setup[i]);
        } catch (const ParseError&) {
        }
        std::string table;
        bool scaffolding = false;
        if (stmt) {
            if (const auto* c = std::get_if<CreateTableStmt>(&*stmt)) {
                table = c->table.name;
                scaffolding = true;
            } else if (const auto* a = std::get_if<AnalyzeStmt>(&*stmt)) {
                table = a->table;
                scaffolding = true;
            } else if (const auto* ins = std::get_if<InsertStmt>(&*stmt)) {
                table = ins->table;
            }
        }
        if (!table.empty() && !referenced.count(table)) {
            auto [it, fresh] = tableUnit.emplace(table, units.size());
            if (fresh) units.push_back({});
            units[it->second].statements.push_back(i);
        } else if (scaffolding) {
            pinned.push_back(i);
        } else {
            units.push_back({{i}});
        }
    }

    auto assemble = [&](const std::vector<Unit>& chosen) {
        std::vector<std::size_t> keep = pinned;
        for (const auto& u : chosen) keep.insert(keep.end(), u.statements.begin(), u.statements.end());
        std::sort(keep.begin(), keep.end());
        return withStatements(testCase, keep);
    };

    // Classic ddmin over units.
    std::size_t n = 2;
    while (units.size() >= 2) {
        const std::size_t chunk = (units.size() + n - 1) / n;
        std::vector<std::vector<Unit>> parts;
        for (std::size_t start = 0; start < units.size(); start += chunk) {
            parts.emplace_back(units.begin() + static_cast<std::ptrdiff_t>(start),
                               units.begin() + static_cast<std::ptrdiff_t>(std::min(units.size(), start + chunk)));
        }
        bool reduced = false;
        for (const auto& part : parts) {
            if (probe(assemble(part))) {
                units = part;
                n = 2;
                reduced = true;
                break;
            }
        }
        if (!reduced && parts.size() > 2) {
            for (std::size_t p = 0; p < parts.size(); ++p) {
                std::vector<Unit> complement;
                for (std::size_t q = 0; q < parts.size(); ++q) {
                    if (q != p) complement.insert(complement.end(), parts[q].begin(), parts[q].end());
                }
                if (probe(assemble(complement))) {
                    units = std::move(complement);
                    n = std::max<std::size_t>(n - 1, 2);
                    reduced = true;
                    break;
                }
            }
        }
        if (!reduced) {
            if (n >= units.size()) break;
            n = std::min(units.size(), n * 2);
        }
    }
    if (units.size() == 1 && probe(assemble({}))) units.clear();

    // Single-statement pass: guarantees 1-minimality over every statement,
    // including pinned ones, whatever the predicate.
    TestCase current = assemble(units);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < current.setupStatements.size(); ++i) {
            TestCase candidate = current;
            candidate.setupStatements.erase(candidate.setupStatements.begin() + static_cast<std::ptrdiff_t>(i));
            if (probe(candidate)) {
                current = std::move(candidate);
                changed = true;
                break;
            }
        }
    }
    st.finalStatements = current.setupStatements.size();
    return current;
}

Verdict replayOnReference(const TestCase& testCase, const BugSet& bugs, const CheckOptions& options) {
    Engine engine;
    engine.setBugs(bugs);
    engine.executeSetup(testCase.setupStatements);
    const auto a = engine.estimatePlan(testCase.original);
    const auto b = engine.estimatePlan(testCase.restricted);
    return checkPair(a, b, options);
}

StillFails referenceStillFails(BugSet bugs, CheckOptions options) {
    return [bugs = std::move(bugs), options](const TestCase& tc) {
        try {
            Engine engine;
            engine.setBugs(bugs);
            engine.executeSetup(tc.setupStatements);
            for (const auto& t : referencedTables(tc)) {
                const MemTable* table = engine.table(t);
                if (!table || table->rows.empty()) return false;
            }
            const auto a = engine.estimatePlan(tc.original);
            const auto b = engine.estimatePlan(tc.restricted);
            return std::holds_alternative<Violation>(checkPair(a, b, options));
        } catch (const Error&) {
            return false;
        }
    };
}

}  // namespace monocard
