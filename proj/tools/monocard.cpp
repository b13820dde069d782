// Command-line driver: run a campaign against a target or replay a report.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "monocard/errors.hpp"
#include "monocard/harness.hpp"

namespace {

std::vector<std::string> splitList(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::set<monocard::RuleId> parseRules(const std::string& text) {
    std::set<monocard::RuleId> out;
    for (const auto& item : splitList(text)) {
        try {
            std::size_t used = 0;
            const int r = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.insert(r);
        } catch (const std::exception&) {
            throw monocard::ConfigError("bad rule id: " + item);
        }
    }
    return out;
}

void printStats(const monocard::CampaignResult& result) {
    const auto& s = result.stats;
    std::cout << "pairs validated: " << s.pairsValidated << '\n'
              << "passes: " << s.passes << '\n'
              << "violations: " << s.violations << '\n'
              << "incomparables: " << s.incomparables << '\n'
              << "errors: " << s.errors << '\n'
              << "violation rate: " << s.violationRateText() << '\n'
              << "elapsed: " << s.elapsed << " s\n"
              << "throughput: " << (s.elapsed > 0 ? static_cast<double>(s.pairsValidated) / s.elapsed : 0.0)
              << " pairs/s\n";
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const auto& r = result.reports[i];
        std::cout << "report " << r.signature << " " << monocard::describe(r.verdict);
        if (i < result.reportPaths.size()) std::cout << " -> " << result.reportPaths[i];
        std::cout << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cardinality restriction monotonicity tester"};
    app.require_subcommand(0, 1);

    monocard::RunConfig config;
    std::string rules, bugs;
    double seconds = 0;
    std::uint64_t pairs = 0;
    app.add_option("--target", config.target, "reference or a postgres://, cockroach://, mysql://, tidb:// URL");
    auto* secondsOpt = app.add_option("--seconds", seconds, "time budget");
    auto* pairsOpt = app.add_option("--pairs", pairs, "pair budget");
    secondsOpt->excludes(pairsOpt);
    app.add_option("--seed", config.seed, "campaign seed");
    app.add_option("--workers", config.workers, "concurrent sessions");
    app.add_option("--rules", rules, "comma list of rule ids 1..12 (default all)");
    app.add_option("--epsilon", config.epsilon, "tolerated estimate increase");
    app.add_option("--similarity-threshold", config.similarityThreshold, "maximum plan edit distance");
    app.add_option("--inject-bugs", bugs, "comma list of estimator bugs (reference target only)");
    app.add_option("--report-dir", config.reportDir, "directory for issue reports");
    app.add_option("--inserts-per-table", config.generator.insertsPerTable, "INSERTs per generated table");
    app.add_option("--min-rows", config.minRows, "row floor per table (at least 1)");
    app.add_option("--queries-per-database", config.queriesPerDatabase, "query pairs per generated database");
    app.add_flag("!--no-reduce", config.reduce, "persist reports without minimizing them");

    auto* replayCmd = app.add_subcommand("replay", "re-check a persisted report");
    std::string reportPath;
    bool offline = false;
    replayCmd->add_option("--report", reportPath, "report directory")->required();
    replayCmd->add_flag("--offline", offline, "re-parse the stored plans instead of contacting the target");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*replayCmd) {
            const monocard::IssueReport report = monocard::readReport(reportPath);
            std::unique_ptr<monocard::DbmsAdapter> adapter;
            if (!offline) {
                const bool overridden = app.count("--target") > 0;
                adapter = overridden ? monocard::makeAdapter(config.target, {}, 0)
                                     : std::unique_ptr<monocard::DbmsAdapter>(std::make_unique<monocard::ReferenceAdapter>(report.bugs));
            }
            const auto result = monocard::replay(report, adapter.get(), offline);
            std::cout << "stored: " << monocard::describe(report.verdict) << '\n'
                      << "replayed: " << monocard::describe(result.verdict) << '\n';
            if (result.mismatch) std::cout << "ReplayMismatch\n";
            return 0;
        }
        if (*secondsOpt) config.seconds = seconds;
        if (*pairsOpt) config.pairs = pairs;
        if (!rules.empty()) config.rules = parseRules(rules);
        for (const auto& b : splitList(bugs)) config.bugs.insert(monocard::parseBug(b));
        const auto result = monocard::runCampaign(config);
        printStats(result);
        return 0;
    } catch (const monocard::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const monocard::AdapterUnavailable& e) {
        std::cerr << "target unavailable: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
