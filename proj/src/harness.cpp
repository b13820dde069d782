#include "monocard/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "monocard/errors.hpp"
#include "monocard/rng.hpp"
#include "monocard/sql_parser.hpp"

namespace monocard {

using nlohmann::json;

void RunConfig::validate() const {
    if (!seconds && !pairs) throw ConfigError("a --seconds or --pairs budget is required");
    if (seconds && *seconds <= 0) throw ConfigError("--seconds must be positive");
    if (pairs && *pairs == 0) throw ConfigError("--pairs must be positive");
    if (workers < 1) throw ConfigError("--workers must be at least 1");
    if (rules.empty()) throw ConfigError("--rules selects no rule");
    for (RuleId r : rules) {
        if (r < kFirstRule || r > kLastRule) throw ConfigError("rule ids run from 1 to 12");
    }
    if (!(epsilon >= 0)) throw ConfigError("--epsilon must be non-negative");
    if (minRows < 1) throw ConfigError("--min-rows cannot go below 1");
    if (queriesPerDatabase < 1) throw ConfigError("queriesPerDatabase must be at least 1");
    if (retryCap < 1) throw ConfigError("retryCap must be at least 1");
    if (!bugs.empty() && target != "reference") throw ConfigError("--inject-bugs applies to the reference target only");
    generator.validate();
}

std::string RunStats::violationRateText() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", violationRate());
    return buf;
}

namespace {

std::string signatureOf(std::vector<RuleId> rules, ClauseKind clause, const std::string& rootA,
                        const std::string& rootB) {
    std::sort(rules.begin(), rules.end());
    rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
    std::string out = "rules=";
    for (std::size_t i = 0; i < rules.size(); ++i) out += (i ? "," : "") + std::to_string(rules[i]);
    return out + "|clause=" + std::string(clauseName(clause)) + "|ops=" + rootA + "/" + rootB;
}

std::string utcNow() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::set<std::string> referencedTables(const TestCase& tc) {
    std::set<std::string> out;
    for (const auto& t : tc.original.tables()) out.insert(t);
    for (const auto& t : tc.restricted.tables()) out.insert(t);
    return out;
}

struct Candidate {
    TestCase testCase;
    ClauseKind clause = ClauseKind::Join;
    Violation verdict;
    std::array<RawPlan, 2> rawPlans;
    std::array<OpSequence, 2> opSequences;
    std::string originalSQL, restrictedSQL;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
};

struct PairRecord {
    Verdict verdict;
    std::optional<Candidate> violation;
};

struct IterationResult {
    std::vector<PairRecord> pairs;
    std::uint64_t errors = 0;
};

// Tops up tables below minRows with extra single-row INSERTs, then refreshes
// their statistics. Returns false when a table stays short.
bool ensureRows(DbmsAdapter& adapter, const Schema& schema, std::int64_t minRows, Rng& rng,
                std::vector<std::string>& setup) {
    for (const auto& table : schema) {
        std::int64_t n = adapter.countRows(table.name);
        if (n >= minRows) continue;
        for (int attempt = 0; attempt < 100 && n < minRows; ++attempt) {
            std::vector<Value> row;
            for (const auto& c : table.columns) row.push_back(valueFor(c, rng));
            const std::string sql = renderInsert(table.name, row, adapter.dialect());
            try {
                adapter.executeStatement(sql);
                setup.push_back(sql);
                ++n;
            } catch (const TargetError&) {
            }
        }
        if (n < minRows) return false;
        const std::string analyze = renderAnalyze(table.name, adapter.dialect());
        adapter.executeStatement(analyze);
        setup.push_back(analyze);
    }
    return true;
}

IterationResult runIteration(DbmsAdapter& adapter, const RunConfig& config, std::uint64_t index) {
    IterationResult result;
    const std::uint64_t seed = mixSeed(config.seed, index);
    Rng rng(seed);
    GenConfig gen = config.generator;
    gen.seed = seed;
    gen.dialect = adapter.dialect();
    const CheckOptions options{config.epsilon, config.similarityThreshold};

    adapter.resetNamespace();
    const DatabaseState db = generateDatabase(gen, rng);
    std::vector<std::string> setup = db.setupStatements;
    try {
        for (const auto& s : setup) adapter.executeStatement(s);
        if (!ensureRows(adapter, db.schema, config.minRows, rng, setup)) {
            result.errors = 1;
            return result;
        }
    } catch (const TargetError&) {
        result.errors = 1;
        return result;
    }

    RestrictionContext ctx;
    ctx.dialect = gen.dialect;
    ctx.schema = &db.schema;
    ctx.tablesNonEmpty = true;
    ctx.predicateDepth = gen.predicateDepth;
    ctx.enabled = config.rules;

    for (int slot = 0; slot < config.queriesPerDatabase; ++slot) {
        bool done = false;
        for (int attempt = 0; attempt < config.retryCap && !done; ++attempt) {
            try {
                const SelectQuery query = generateQuery(db.schema, gen, rng);
                RestrictionOutcome outcome = restrict(query, rng, ctx);
                const std::string sqlA = render(query, gen.dialect);
                const std::string sqlB = render(outcome.restricted, gen.dialect);
                RawPlan rawA = adapter.explain(sqlA);
                RawPlan rawB = adapter.explain(sqlB);
                const PlanNode planA = parseRawPlan(rawA);
                const PlanNode planB = parseRawPlan(rawB);
                PairRecord record{checkPair(planA, planB, options), std::nullopt};
                if (const auto* v = std::get_if<Violation>(&record.verdict)) {
                    Candidate c;
                    c.testCase = TestCase{setup, query, outcome.restricted, outcome.applied};
                    c.clause = outcome.clause;
                    c.verdict = *v;
                    c.rawPlans = {std::move(rawA), std::move(rawB)};
                    c.opSequences = {flatten(planA), flatten(planB)};
                    c.originalSQL = sqlA;
                    c.restrictedSQL = sqlB;
                    c.seed = seed;
                    c.iteration = index;
                    record.violation = std::move(c);
                }
                result.pairs.push_back(std::move(record));
                done = true;
            } catch (const NoApplicableRule&) {
            } catch (const TargetError&) {
            } catch (const UnsupportedFeature&) {
            } catch (const AdapterUnavailable&) {
                throw;
            } catch (const Error&) {
                break;  // unparseable plan or missing estimate: count and move on
            }
        }
        if (!done) ++result.errors;
    }
    return result;
}

StillFails adapterStillFails(DbmsAdapter& adapter, CheckOptions options) {
    return [&adapter, options](const TestCase& tc) {
        try {
            const Observation obs = observe(adapter, tc, options);
            for (const auto& t : referencedTables(tc)) {
                if (adapter.countRows(t) < 1) return false;
            }
            return std::holds_alternative<Violation>(obs.verdict);
        } catch (const AdapterUnavailable&) {
            throw;
        } catch (const Error&) {
            return false;
        }
    };
}

IssueReport buildReport(const Candidate& c, const RunConfig& config, const std::string& identity,
                        const std::string& version, Dialect dialect) {
    IssueReport r;
    r.testCase = c.testCase;
    r.clause = c.clause;
    r.verdict = c.verdict;
    r.originalSQL = c.originalSQL;
    r.restrictedSQL = c.restrictedSQL;
    r.rawPlans = c.rawPlans;
    r.opSequences = c.opSequences;
    r.seed = c.seed;
    r.iteration = c.iteration;
    r.dialect = dialect;
    r.target = identity;
    r.targetVersion = version;
    r.timestamp = utcNow();
    r.bugs = config.bugs;
    r.options = CheckOptions{config.epsilon, config.similarityThreshold};
    r.signature = dedupSignature(r);
    return r;
}

// Minimizes the candidate and refreshes plans and estimates from the
// minimized case, so the report replays to exactly the stored verdict.
void reduceReport(IssueReport& report, DbmsAdapter& adapter, const StillFails& stillFails) {
    TestCase minimized;
    try {
        minimized = minimize(report.testCase, stillFails);
    } catch (const NotReproducible&) {
        return;
    }
    const Observation obs = observe(adapter, minimized, report.options);
    const auto* v = std::get_if<Violation>(&obs.verdict);
    if (!v) return;
    report.testCase = std::move(minimized);
    report.verdict = *v;
    report.rawPlans = obs.rawPlans;
    report.opSequences = {flatten(obs.plans[0]), flatten(obs.plans[1])};
    report.reduced = true;
}

}  // namespace

std::string dedupSignature(const IssueReport& report) {
    const auto root = [](const OpSequence& s) { return s.empty() ? std::string("?") : s.front(); };
    return signatureOf(report.testCase.appliedRules, report.clause, root(report.opSequences[0]),
                       root(report.opSequences[1]));
}

Observation observe(DbmsAdapter& adapter, const TestCase& testCase, const CheckOptions& options) {
    adapter.resetNamespace();
    for (const auto& s : testCase.setupStatements) adapter.executeStatement(s);
    Observation obs;
    obs.rawPlans[0] = adapter.explain(render(testCase.original, adapter.dialect()));
    obs.rawPlans[1] = adapter.explain(render(testCase.restricted, adapter.dialect()));
    obs.plans[0] = parseRawPlan(obs.rawPlans[0]);
    obs.plans[1] = parseRawPlan(obs.rawPlans[1]);
    obs.verdict = checkPair(obs.plans[0], obs.plans[1], options);
    return obs;
}

CampaignResult runCampaign(const RunConfig& config) {
    config.validate();
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto deadline =
        config.seconds ? start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*config.seconds))
                       : Clock::time_point::max();
    // Guards against rule selections that almost never apply.
    const std::uint64_t maxIterations = config.pairs ? std::max<std::uint64_t>(10000, *config.pairs * 100) : UINT64_MAX;

    // Connect every worker up front so an unreachable target fails fast.
    std::vector<std::unique_ptr<DbmsAdapter>> adapters;
    for (int w = 0; w < config.workers; ++w) adapters.push_back(makeAdapter(config.target, config.bugs, w));
    const std::string identity = adapters.front()->identity();
    const std::string version = adapters.front()->version();
    const Dialect dialect = adapters.front()->dialect();

    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> pairsDone{0};
    std::atomic<bool> stop{false};
    std::mutex mutex;
    std::map<std::uint64_t, IterationResult> results;
    std::exception_ptr fatal;

    auto worker = [&](DbmsAdapter& adapter) {
        while (!stop.load()) {
            if (Clock::now() >= deadline) break;
            if (config.pairs && pairsDone.load() >= *config.pairs) break;
            const std::uint64_t index = next.fetch_add(1);
            if (index >= maxIterations) break;
            IterationResult r;
            try {
                r = runIteration(adapter, config, index);
            } catch (const AdapterUnavailable&) {
                std::lock_guard lock(mutex);
                if (!fatal) fatal = std::current_exception();
                stop = true;
                break;
            } catch (const std::exception&) {
                r = IterationResult{};
                r.errors = 1;
            }
            pairsDone.fetch_add(r.pairs.size());
            std::lock_guard lock(mutex);
            results.emplace(index, std::move(r));
        }
    };

    if (config.workers == 1) {
        worker(*adapters.front());
    } else {
        std::vector<std::thread> threads;
        for (auto& a : adapters) threads.emplace_back(worker, std::ref(*a));
        for (auto& t : threads) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    // Aggregate in iteration order so a pair budget yields the same prefix
    // whatever the worker interleaving was.
    CampaignResult out;
    RunStats& stats = out.stats;
    std::set<std::string> seen;
    std::vector<Candidate> fresh;
    bool full = false;
    for (auto& [index, r] : results) {
        if (full) break;
        stats.errors += r.errors;
        for (auto& p : r.pairs) {
            if (config.pairs && stats.pairsValidated >= *config.pairs) {
                full = true;
                break;
            }
            ++stats.pairsValidated;
            if (std::holds_alternative<Pass>(p.verdict)) ++stats.passes;
            if (std::holds_alternative<Incomparable>(p.verdict)) ++stats.incomparables;
            if (p.violation) {
                ++stats.violations;
                const auto& c = *p.violation;
                const std::string sig = signatureOf(c.testCase.appliedRules, c.clause, c.opSequences[0].front(),
                                                    c.opSequences[1].front());
                if (seen.insert(sig).second) fresh.push_back(std::move(*p.violation));
            }
        }
    }
    stats.elapsed = std::chrono::duration<double>(Clock::now() - start).count();

    std::unique_ptr<DbmsAdapter> reference;
    DbmsAdapter* reducerAdapter = adapters.front().get();
    if (config.target == "reference") {
        reference = std::make_unique<ReferenceAdapter>(config.bugs);
        reducerAdapter = reference.get();
    }
    const CheckOptions options{config.epsilon, config.similarityThreshold};
    const StillFails stillFails = config.target == "reference" ? referenceStillFails(config.bugs, options)
                                                               : adapterStillFails(*reducerAdapter, options);
    for (const auto& c : fresh) {
        IssueReport report = buildReport(c, config, identity, version, dialect);
        if (config.reduce) {
            try {
                reduceReport(report, *reducerAdapter, stillFails);
            } catch (const AdapterUnavailable&) {
                throw;
            } catch (const Error&) {
            }
        }
        if (!config.reportDir.empty()) {
            char name[64];
            std::snprintf(name, sizeof name, "report-%06llu", static_cast<unsigned long long>(c.iteration));
            const auto dir = std::filesystem::path(config.reportDir) / name;
            writeReport(report, dir);
            out.reportPaths.push_back(dir.string());
        }
        out.reports.push_back(std::move(report));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

json rawPlanToJson(const RawPlan& raw) {
    json j;
    j["format"] = raw.format == RawPlan::Format::Text ? "text" : "tabular";
    j["text"] = raw.text;
    if (raw.format == RawPlan::Format::Tabular) {
        j["rows"] = json::array();
        for (const auto& row : raw.rows) {
            json info = json::array();
            for (const auto& [k, v] : row.info) info.push_back(json::array({k, v}));
            j["rows"].push_back({{"id", row.id}, {"estRows", row.estRows}, {"info", info}});
        }
    }
    return j;
}

RawPlan rawPlanFromJson(const json& j) {
    RawPlan raw;
    raw.format = j.at("format").get<std::string>() == "text" ? RawPlan::Format::Text : RawPlan::Format::Tabular;
    raw.text = j.value("text", "");
    if (j.contains("rows")) {
        for (const auto& r : j.at("rows")) {
            TabularRow row;
            row.id = r.at("id").get<std::string>();
            row.estRows = r.at("estRows").get<std::string>();
            for (const auto& kv : r.at("info")) row.info.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
            raw.rows.push_back(std::move(row));
        }
    }
    return raw;
}

ClauseKind clauseFromName(const std::string& name) {
    for (auto c : {ClauseKind::Join, ClauseKind::Select, ClauseKind::GroupBy, ClauseKind::Having, ClauseKind::Where,
                   ClauseKind::Limit}) {
        if (clauseName(c) == name) return c;
    }
    throw Error("unknown clause in report: " + name);
}

Dialect dialectFromName(const std::string& name) {
    for (auto d : {Dialect::MySQLFamily, Dialect::PostgresFamily, Dialect::Reference}) {
        if (dialectName(d) == name) return d;
    }
    throw Error("unknown dialect in report: " + name);
}

}  // namespace

void writeReport(const IssueReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream sql(dir / "repro.sql");
        for (const auto& s : report.testCase.setupStatements) sql << s << ";\n";
        sql << "EXPLAIN " << render(report.testCase.original, report.dialect) << ";\n";
        sql << "EXPLAIN " << render(report.testCase.restricted, report.dialect) << ";\n";
        if (!sql) throw Error("cannot write " + (dir / "repro.sql").string());
    }
    json j;
    j["signature"] = report.signature;
    j["rules"] = report.testCase.appliedRules;
    j["clause"] = std::string(clauseName(report.clause));
    j["originalSQL"] = render(report.testCase.original, report.dialect);
    j["restrictedSQL"] = render(report.testCase.restricted, report.dialect);
    j["originalEstimate"] = report.verdict.originalEstimate;
    j["restrictedEstimate"] = report.verdict.restrictedEstimate;
    j["opSequences"] = json::array({json(report.opSequences[0]), json(report.opSequences[1])});
    j["rawPlans"] = json::array({rawPlanToJson(report.rawPlans[0]), rawPlanToJson(report.rawPlans[1])});
    j["seed"] = report.seed;
    j["iteration"] = report.iteration;
    j["targetVersion"] = report.targetVersion;
    j["timestamp"] = report.timestamp;
    j["target"] = report.target;
    j["dialect"] = std::string(dialectName(report.dialect));
    j["setup"] = report.testCase.setupStatements;
    j["bugs"] = json::array();
    for (BugId b : report.bugs) j["bugs"].push_back(std::string(bugName(b)));
    j["epsilon"] = report.options.epsilon;
    j["similarityThreshold"] = report.options.similarityThreshold;
    j["verdict"] = {{"kind", "Violation"},
                    {"original", report.verdict.originalEstimate},
                    {"restricted", report.verdict.restrictedEstimate},
                    {"margin", report.verdict.margin}};
    j["reduced"] = report.reduced;
    std::ofstream out(dir / "report.json");
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "report.json").string());
}

IssueReport readReport(const std::filesystem::path& dir) {
    std::ifstream in(dir / "report.json");
    if (!in) throw Error("cannot read " + (dir / "report.json").string());
    IssueReport r;
    try {
        const json j = json::parse(in);
        r.signature = j.at("signature").get<std::string>();
        r.testCase.appliedRules = j.at("rules").get<std::vector<RuleId>>();
        r.clause = clauseFromName(j.at("clause").get<std::string>());
        r.originalSQL = j.at("originalSQL").get<std::string>();
        r.restrictedSQL = j.at("restrictedSQL").get<std::string>();
        r.testCase.original = parseSelect(r.originalSQL);
        r.testCase.restricted = parseSelect(r.restrictedSQL);
        r.verdict.originalEstimate = j.at("originalEstimate").get<double>();
        r.verdict.restrictedEstimate = j.at("restrictedEstimate").get<double>();
        r.verdict.margin = j.contains("verdict") ? j["verdict"].value("margin", 0.0)
                                                 : r.verdict.restrictedEstimate - r.verdict.originalEstimate;
        const auto& ops = j.at("opSequences");
        r.opSequences = {ops.at(0).get<OpSequence>(), ops.at(1).get<OpSequence>()};
        const auto& raw = j.at("rawPlans");
        r.rawPlans = {rawPlanFromJson(raw.at(0)), rawPlanFromJson(raw.at(1))};
        r.seed = j.at("seed").get<std::uint64_t>();
        r.iteration = j.value("iteration", std::uint64_t{0});
        r.targetVersion = j.at("targetVersion").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::string>();
        r.target = j.value("target", "");
        r.dialect = dialectFromName(j.value("dialect", "reference"));
        r.testCase.setupStatements = j.value("setup", std::vector<std::string>{});
        for (const auto& b : j.value("bugs", std::vector<std::string>{})) r.bugs.insert(parseBug(b));
        r.options.epsilon = j.value("epsilon", 0.0);
        r.options.similarityThreshold = j.value("similarityThreshold", std::size_t{1});
        r.reduced = j.value("reduced", false);
    } catch (const json::exception& e) {
        throw Error("malformed report.json: " + std::string(e.what()));
    }
    return r;
}

ReplayResult replay(const IssueReport& report, DbmsAdapter* adapter, bool offline) {
    ReplayResult out;
    if (offline) {
        out.verdict = checkPair(parseRawPlan(report.rawPlans[0]), parseRawPlan(report.rawPlans[1]), report.options);
    } else {
        if (!adapter) throw ConfigError("online replay needs an adapter");
        out.verdict = observe(*adapter, report.testCase, report.options).verdict;
    }
    out.mismatch = !(out.verdict == Verdict{report.verdict});
    return out;
}

}  // namespace monocard
