#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace monocard {

struct PlanNode {
    std::string opName;  // lower case, no qualifier, no glyphs
    std::optional<double> estimatedRows;
    std::vector<PlanNode> children;
    std::vector<std::pair<std::string, std::string>> rawAttributes;

    friend bool operator==(const PlanNode&, const PlanNode&) = default;
};

struct PlanSummary {
    std::vector<std::string> opSequence;
    double rootEstimate = 0;
};

/// One record of a tabular EXPLAIN. `id` carries the tree glyph prefix
/// ("└─TableFullScan_5"); `info` holds the remaining columns verbatim.
struct TabularRow {
    std::string id;
    std::string estRows;
    std::vector<std::pair<std::string, std::string>> info;
};

/// Parses indentation/bullet structured plans: every node line contains "•",
/// nesting follows the bullet column, and "key: value" lines attach to the
/// nearest node above. Throws MalformedPlan.
PlanNode parseTextPlan(std::string_view text);

/// Parses MySQL/TiDB style rows, decoding depth from the glyph prefix of id.
/// Throws MalformedPlan.
PlanNode parseTabularPlan(const std::vector<TabularRow>& rows);

/// Reads a pipe-delimited table (as printed by mysql/tidb clients, header row
/// first, +---+ separators optional) into rows. The id column is the first
/// column; the estimate column is named estRows or rows.
std::vector<TabularRow> parsePipeTable(std::string_view text);

/// Converts MySQL EXPLAIN FORMAT=TREE output ("-> Filter: ...  (cost=.. rows=3)")
/// into tabular rows with glyph-prefixed ids.
std::vector<TabularRow> mysqlTreeToRows(std::string_view text);

/// Converts PostgreSQL text EXPLAIN output ("Hash Join  (cost=.. rows=3 width=8)"
/// with "->" child markers) into tabular rows with glyph-prefixed ids.
std::vector<TabularRow> postgresPlanToRows(std::string_view text);

/// Renders a tree in the format parseTextPlan reads.
std::string renderTextPlan(const PlanNode& root);

std::vector<std::string> flatten(const PlanNode& root);
std::size_t nodeCount(const PlanNode& root);

/// Throws MissingEstimate when the root has no estimate.
double rootEstimate(const PlanNode& root);
PlanSummary summarize(const PlanNode& root);

/// Lower-cases, strips a trailing "(qualifier)" and TiDB "_<digits>" suffix.
/// Returns the normalized name and the qualifier (empty when absent).
std::pair<std::string, std::string> normalizeOpName(std::string_view raw);

}  // namespace monocard
