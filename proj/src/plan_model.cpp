#include "monocard/plan_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "monocard/errors.hpp"

namespace monocard {

namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022

bool startsWith(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Number of UTF-8 code points in s.
std::size_t codePoints(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

/// Length in bytes of the leading run of tree-drawing glyphs and whitespace.
std::size_t glyphPrefix(std::string_view s, bool allowAscii) {
    static constexpr std::string_view kBoxGlyphs[] = {"\xE2\x94\x82", "\xE2\x94\x9C", "\xE2\x94\x94", "\xE2\x94\x80"};
    std::size_t i = 0;
    for (;;) {
        if (i >= s.size()) return i;
        const char c = s[i];
        if (c == ' ' || c == '\t' || (allowAscii && (c == '|' || c == '-' || c == '`'))) {
            ++i;
            continue;
        }
        bool matched = false;
        for (auto g : kBoxGlyphs) {
            if (startsWith(s.substr(i), g)) {
                i += g.size();
                matched = true;
                break;
            }
        }
        if (!matched) return i;
    }
}

std::vector<std::string_view> splitLines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        start = end + 1;
    }
    return out;
}

std::optional<double> parseNumber(std::string_view cell) {
    std::string digits;
    for (char c : trim(cell)) {
        if (c != ',') digits += c;
    }
    if (digits.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || p != digits.data() + digits.size() || v < 0) return std::nullopt;
    return v;
}

/// Text plans may annotate the number ("10 (100% of the table; ...)"); only
/// the leading token counts.
std::optional<double> parseTextEstimate(std::string_view value) {
    value = trim(value);
    return parseNumber(value.substr(0, value.find_first_of(" \t(")));
}

bool isEstimateKey(std::string_view key) {
    const auto k = lower(trim(key));
    return k == "estimated row" || k == "estimated rows" || k == "estimated row count";
}

/// Finds an inline "estimated row(s)[ count]: N" inside a node line.
std::size_t findInlineEstimate(std::string_view s) { return lower(s).find("estimated row"); }

PlanNode makeNode(std::string_view rawName, std::size_t line) {
    auto [name, qualifier] = normalizeOpName(rawName);
    if (name.empty()) throw MalformedPlan("empty operation name", line);
    PlanNode node;
    node.opName = std::move(name);
    if (!qualifier.empty()) node.rawAttributes.emplace_back("qualifier", std::move(qualifier));
    return node;
}

}  // namespace

std::pair<std::string, std::string> normalizeOpName(std::string_view raw) {
    std::string_view s = trim(raw);
    std::string qualifier;
    if (!s.empty() && s.back() == ')') {
        int depth = 0;
        for (std::size_t i = s.size(); i-- > 0;) {
            if (s[i] == ')') ++depth;
            if (s[i] == '(' && --depth == 0) {
                qualifier = std::string(trim(s.substr(i + 1, s.size() - i - 2)));
                s = trim(s.substr(0, i));
                break;
            }
        }
    }
    std::string name = lower(s);
    // TiDB operator ids carry a numeric suffix: HashJoin_8.
    const auto us = name.rfind('_');
    if (us != std::string::npos && us + 1 < name.size() &&
        std::all_of(name.begin() + static_cast<std::ptrdiff_t>(us) + 1, name.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        name.erase(us);
    }
    return {name, qualifier};
}

PlanNode parseTextPlan(std::string_view text) {
    PlanNode root;
    bool haveRoot = false;
    struct Frame {
        std::size_t column;
        PlanNode* node;
    };
    std::vector<Frame> stack;
    const auto lines = splitLines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t lineNo = n + 1;
        const auto line = lines[n];
        const auto bullet = line.find(kBullet);
        if (bullet != std::string_view::npos) {
            const std::size_t column = codePoints(line.substr(0, bullet));
            auto rest = line.substr(bullet + kBullet.size());
            std::optional<double> inlineEstimate;
            const auto est = findInlineEstimate(rest);
            if (est != std::string::npos) {
                auto tail = rest.substr(est);
                const auto colon = tail.find(':');
                if (colon == std::string_view::npos) throw MalformedPlan("estimate without value", lineNo);
                inlineEstimate = parseTextEstimate(tail.substr(colon + 1));
                if (!inlineEstimate) throw MalformedPlan("non-numeric estimate", lineNo);
                rest = rest.substr(0, est);
            }
            PlanNode node = makeNode(rest, lineNo);
            node.estimatedRows = inlineEstimate;
            if (!haveRoot) {
                root = std::move(node);
                haveRoot = true;
                stack.push_back({column, &root});
                continue;
            }
            std::optional<std::size_t> popped;
            while (!stack.empty() && stack.back().column >= column) {
                popped = stack.back().column;
                stack.pop_back();
            }
            if (stack.empty()) throw MalformedPlan("second root node", lineNo);
            if (popped && *popped != column) throw MalformedPlan("inconsistent indentation", lineNo);
            auto& children = stack.back().node->children;
            children.push_back(std::move(node));
            stack.push_back({column, &children.back()});
            continue;
        }
        const auto body = trim(line.substr(glyphPrefix(line, true)));
        if (body.empty() || !haveRoot) continue;
        PlanNode& current = *stack.back().node;
        const auto colon = body.find(':');
        const auto key = trim(body.substr(0, colon));
        const auto value = colon == std::string_view::npos ? std::string_view{} : trim(body.substr(colon + 1));
        if (colon != std::string_view::npos && isEstimateKey(key)) {
            const auto v = parseTextEstimate(value);
            if (!v) throw MalformedPlan("non-numeric estimate", lineNo);
            current.estimatedRows = v;
        } else {
            current.rawAttributes.emplace_back(std::string(key), std::string(value));
        }
    }
    if (!haveRoot) throw MalformedPlan("no plan nodes", 0);
    return root;
}

PlanNode parseTabularPlan(const std::vector<TabularRow>& rows) {
    if (rows.empty()) throw MalformedPlan("empty plan table", 0);
    PlanNode root;
    std::vector<PlanNode*> stack;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t rowNo = i + 1;
        const auto& row = rows[i];
        const auto prefix = glyphPrefix(row.id, false);
        const std::size_t depth = codePoints(std::string_view(row.id).substr(0, prefix)) / 2;
        PlanNode node = makeNode(std::string_view(row.id).substr(prefix), rowNo);
        if (!trim(row.estRows).empty()) {
            node.estimatedRows = parseNumber(row.estRows);
            if (!node.estimatedRows) throw MalformedPlan("non-numeric estimate '" + row.estRows + "'", rowNo);
        }
        node.rawAttributes.insert(node.rawAttributes.end(), row.info.begin(), row.info.end());
        if (i == 0) {
            if (depth != 0) throw MalformedPlan("first row is not a root", rowNo);
            root = std::move(node);
            stack.push_back(&root);
            continue;
        }
        if (depth == 0) throw MalformedPlan("second root row", rowNo);
        if (depth > stack.size()) throw MalformedPlan("orphan row", rowNo);
        stack.resize(depth);
        auto& children = stack.back()->children;
        children.push_back(std::move(node));
        stack.push_back(&children.back());
    }
    return root;
}

std::vector<TabularRow> parsePipeTable(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    for (auto line : splitLines(text)) {
        line = trim(line);
        if (line.empty() || line.front() != '|') continue;
        std::vector<std::string> cells;
        std::size_t start = 1;
        for (;;) {
            const auto bar = line.find('|', start);
            if (bar == std::string_view::npos) break;
            // Cells keep their glyph prefix; only the padding right after the
            // separator and trailing blanks are dropped.
            auto cell = line.substr(start, bar - start);
            if (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
            cells.emplace_back(cell);
            start = bar + 1;
        }
        records.push_back(std::move(cells));
    }
    if (records.empty()) throw MalformedPlan("no table rows", 0);
    const auto& header = records.front();
    std::size_t estColumn = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto h = lower(trim(header[c]));
        if (h == "estrows" || h == "rows") estColumn = c;
    }
    if (estColumn == header.size()) throw MalformedPlan("no estRows column in header", 1);
    std::vector<TabularRow> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& cells = records[r];
        if (cells.size() != header.size()) throw MalformedPlan("row width differs from header", r + 1);
        TabularRow row;
        row.id = cells[0];
        row.estRows = std::string(trim(cells[estColumn]));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (c != estColumn) row.info.emplace_back(std::string(trim(header[c])), std::string(trim(cells[c])));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<TabularRow> mysqlTreeToRows(std::string_view text) {
    std::vector<TabularRow> rows;
    std::size_t lineNo = 0;
    for (auto line : splitLines(text)) {
        ++lineNo;
        const auto arrow = line.find("-> ");
        if (arrow == std::string_view::npos || !trim(line.substr(0, arrow)).empty()) continue;
        const std::size_t depth = arrow / 4;
        auto body = trim(line.substr(arrow + 3));
        std::string estimate;
        const auto costParen = body.rfind("  (");
        if (costParen != std::string_view::npos && body.back() == ')') {
            const auto stats = body.substr(costParen + 3, body.size() - costParen - 4);
            const auto r = stats.find("rows=");
            if (r != std::string_view::npos) {
                auto v = stats.substr(r + 5);
                v = v.substr(0, v.find_first_of(" )"));
                estimate = std::string(v);
            }
            body = trim(body.substr(0, costParen));
        }
        std::string_view name = body.substr(0, body.find(':'));
        for (std::string_view sep : {" on ", " using "}) {
            const auto pos = name.find(sep);
            if (pos != std::string_view::npos) name = name.substr(0, pos);
        }
        TabularRow row;
        for (std::size_t d = 1; d < depth; ++d) row.id += "\xE2\x94\x82 ";
        if (depth > 0) row.id += "\xE2\x94\x94\xE2\x94\x80";
        if (depth > 0 && rows.empty()) throw MalformedPlan("indented first operator", lineNo);
        row.id += std::string(trim(name));
        row.estRows = estimate;
        row.info.emplace_back("operator", std::string(body));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MalformedPlan("no operators in tree output", 0);
    return rows;
}

namespace {

// Splits "Seq Scan on t0  (cost=0.00..1.02 rows=2 width=8)" into name and rows.
std::pair<std::string, std::string> postgresNode(std::string_view body) {
    std::string estimate;
    const auto costParen = body.find("  (");
    if (costParen != std::string_view::npos) {
        const auto stats = body.substr(costParen + 3);
        const auto r = stats.find("rows=");
        if (r != std::string_view::npos) {
            auto v = stats.substr(r + 5);
            estimate = std::string(v.substr(0, v.find_first_of(" )")));
        }
        body = trim(body.substr(0, costParen));
    }
    for (std::string_view sep : {" on ", " using "}) {
        const auto pos = body.find(sep);
        if (pos != std::string_view::npos) body = body.substr(0, pos);
    }
    return {std::string(trim(body)), estimate};
}

}  // namespace

std::vector<TabularRow> postgresPlanToRows(std::string_view text) {
    std::vector<TabularRow> rows;
    std::vector<std::size_t> columns;  // arrow column per open ancestor
    std::size_t lineNo = 0;
    for (auto line : splitLines(text)) {
        ++lineNo;
        if (trim(line).empty()) continue;
        const auto arrow = line.find("->");
        const bool isChild = arrow != std::string_view::npos && trim(line.substr(0, arrow)).empty();
        std::size_t depth = 0;
        std::string_view body;
        if (rows.empty()) {
            if (isChild) throw MalformedPlan("plan starts with a child operator", lineNo);
            body = trim(line);
        } else if (isChild) {
            while (!columns.empty() && columns.back() >= arrow) columns.pop_back();
            columns.push_back(arrow);
            depth = columns.size();
            body = trim(line.substr(arrow + 2));
        } else {
            if (rows.back().info.size() < 8) rows.back().info.emplace_back("detail", std::string(trim(line)));
            continue;
        }
        auto [name, estimate] = postgresNode(body);
        TabularRow row;
        for (std::size_t d = 1; d < depth; ++d) row.id += "\xE2\x94\x82 ";
        if (depth > 0) row.id += "\xE2\x94\x94\xE2\x94\x80";
        row.id += name;
        row.estRows = estimate;
        row.info.emplace_back("operator", std::string(body));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MalformedPlan("no operators in plan output", 0);
    return rows;
}

namespace {

std::string formatEstimate(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void renderNode(const PlanNode& node, const std::string& first, const std::string& rest, std::ostringstream& out) {
    out << first << kBullet << ' ' << node.opName;
    for (const auto& [k, v] : node.rawAttributes) {
        if (k == "qualifier") {
            out << " (" << v << ")";
            break;
        }
    }
    out << '\n';
    const std::string body = rest + (node.children.empty() ? "  " : "\xE2\x94\x82 ");
    if (node.estimatedRows) out << body << "estimated row: " << formatEstimate(*node.estimatedRows) << '\n';
    bool qualifierSeen = false;
    for (const auto& [k, v] : node.rawAttributes) {
        if (k == "qualifier" && !qualifierSeen) {
            qualifierSeen = true;
            continue;
        }
        out << body << k;
        if (!v.empty()) out << ": " << v;
        out << '\n';
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const bool last = i + 1 == node.children.size();
        renderNode(node.children[i], rest + (last ? "\xE2\x94\x94\xE2\x94\x80\xE2\x94\x80 " : "\xE2\x94\x9C\xE2\x94\x80\xE2\x94\x80 "),
                   rest + (last ? "    " : "\xE2\x94\x82   "), out);
    }
}

void flattenInto(const PlanNode& node, std::vector<std::string>& out) {
    out.push_back(node.opName);
    for (const auto& c : node.children) flattenInto(c, out);
}

}  // namespace

std::string renderTextPlan(const PlanNode& root) {
    std::ostringstream out;
    renderNode(root, "", "", out);
    return out.str();
}

std::vector<std::string> flatten(const PlanNode& root) {
    std::vector<std::string> out;
    flattenInto(root, out);
    return out;
}

std::size_t nodeCount(const PlanNode& root) {
    std::size_t n = 1;
    for (const auto& c : root.children) n += nodeCount(c);
    return n;
}

double rootEstimate(const PlanNode& root) {
    if (!root.estimatedRows) throw MissingEstimate("plan root '" + root.opName + "' carries no estimate");
    return *root.estimatedRows;
}

PlanSummary summarize(const PlanNode& root) { return {flatten(root), rootEstimate(root)}; }

}  // namespace monocard
