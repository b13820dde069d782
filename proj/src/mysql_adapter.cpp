#include <cstring>

#include "monocard/errors.hpp"
#include "monocard/wire.hpp"

namespace monocard {

namespace {

constexpr std::uint32_t kLongPassword = 0x1;
constexpr std::uint32_t kConnectWithDb = 0x8;
constexpr std::uint32_t kProtocol41 = 0x200;
constexpr std::uint32_t kTransactions = 0x2000;
constexpr std::uint32_t kSecureConnection = 0x8000;
constexpr std::uint32_t kMultiResults = 0x20000;
constexpr std::uint32_t kPluginAuth = 0x80000;
constexpr std::uint16_t kMoreResultsExist = 0x0008;
constexpr std::size_t kMaxPayload = 0xFFFFFF;

std::string le(std::uint64_t v, int bytes) {
    std::string out;
    for (int i = 0; i < bytes; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
    return out;
}

std::uint64_t readLe(std::string_view s, std::size_t at, int bytes) {
    if (at + static_cast<std::size_t>(bytes) > s.size()) throw TargetError("truncated server packet");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
    return v;
}

// Length-encoded integer; returns nullopt for the NULL marker 0xFB.
std::optional<std::uint64_t> readLenenc(std::string_view s, std::size_t& at) {
    if (at >= s.size()) throw TargetError("truncated length-encoded integer");
    const auto first = static_cast<unsigned char>(s[at++]);
    if (first < 0xFB) return first;
    if (first == 0xFB) return std::nullopt;
    const int bytes = first == 0xFC ? 2 : first == 0xFD ? 3 : 8;
    const auto v = readLe(s, at, bytes);
    at += static_cast<std::size_t>(bytes);
    return v;
}

std::optional<std::string> readLenencString(std::string_view s, std::size_t& at) {
    const auto len = readLenenc(s, at);
    if (!len) return std::nullopt;
    if (at + *len > s.size()) throw TargetError("truncated length-encoded string");
    std::string out(s.substr(at, *len));
    at += *len;
    return out;
}

std::string readCString(std::string_view s, std::size_t& at) {
    const auto end = s.find('\0', at);
    const auto stop = end == std::string_view::npos ? s.size() : end;
    std::string out(s.substr(at, stop - at));
    at = stop + 1;
    return out;
}

bool isErr(std::string_view p) { return !p.empty() && static_cast<unsigned char>(p[0]) == 0xFF; }
bool isOk(std::string_view p) { return !p.empty() && p[0] == 0x00; }
bool isEof(std::string_view p) { return !p.empty() && static_cast<unsigned char>(p[0]) == 0xFE && p.size() < 9; }

std::string errText(std::string_view p) {
    const auto code = readLe(p, 1, 2);
    std::size_t at = 3;
    std::string state;
    if (at < p.size() && p[at] == '#') {
        state = std::string(p.substr(at + 1, 5));
        at += 6;
    }
    return "ERROR " + std::to_string(code) + (state.empty() ? "" : " (" + state + ")") + ": " +
           std::string(p.substr(std::min(at, p.size())));
}

std::uint16_t okStatus(std::string_view p) {
    std::size_t at = 1;
    readLenenc(p, at);
    readLenenc(p, at);
    return static_cast<std::uint16_t>(readLe(p, at, 2));
}

std::string quoteIdent(const std::string& name) {
    std::string out = "`";
    for (char c : name) {
        if (c == '`') out += '`';
        out += c;
    }
    return out + "`";
}

}  // namespace

MySqlAdapter::MySqlAdapter(ConnectionUrl url, int worker)
    : url_(std::move(url)), worker_(worker), tidb_(url_.scheme == "tidb") {
    if (url_.port == 0) url_.port = tidb_ ? 4000 : 3306;
    if (url_.user.empty()) url_.user = "root";
    identity_ = url_.scheme + "://" + url_.host + ":" + std::to_string(url_.port);
    connect();
    if (version_.find("TiDB") != std::string::npos) tidb_ = true;
    resetNamespace();
}

MySqlAdapter::~MySqlAdapter() {
    if (socket_.isOpen()) {
        try {
            sequence_ = 0;
            writePacket(std::string(1, '\x01'));  // COM_QUIT
        } catch (const Error&) {
        }
    }
}

std::string MySqlAdapter::readPacket() {
    std::string payload;
    while (true) {
        const std::string header = socket_.recvExact(4);
        const auto len = static_cast<std::size_t>(readLe(header, 0, 3));
        sequence_ = static_cast<std::uint8_t>(static_cast<unsigned char>(header[3]) + 1);
        payload += socket_.recvExact(len);
        if (len < kMaxPayload) return payload;
    }
}

void MySqlAdapter::writePacket(std::string_view payload) {
    do {
        const std::size_t len = std::min(payload.size(), kMaxPayload);
        std::string packet = le(len, 3);
        packet += static_cast<char>(sequence_++);
        packet.append(payload.substr(0, len));
        socket_.sendAll(packet);
        payload.remove_prefix(len);
        if (len < kMaxPayload) break;
    } while (true);
}

std::string MySqlAdapter::authResponse(const std::string& plugin, const std::string& scramble) const {
    if (plugin == "mysql_native_password") return wirecrypto::mysqlNativePassword(url_.password, scramble);
    if (plugin == "caching_sha2_password") return wirecrypto::cachingSha2Password(url_.password, scramble);
    throw AdapterUnavailable("unsupported authentication plugin " + plugin);
}

void MySqlAdapter::connect() {
    socket_.connect(url_.host, url_.port);
    sequence_ = 0;
    const std::string greeting = readPacket();
    if (isErr(greeting)) throw AdapterUnavailable("connection rejected: " + errText(greeting));
    if (greeting.empty() || greeting[0] != 10) throw AdapterUnavailable("unsupported handshake protocol");
    std::size_t at = 1;
    version_ = readCString(greeting, at);
    at += 4;  // connection id
    std::string scramble = greeting.substr(at, 8);
    at += 9;  // part 1 + filler
    std::uint32_t serverCaps = static_cast<std::uint32_t>(readLe(greeting, at, 2));
    at += 2;
    std::string plugin = "mysql_native_password";
    if (at < greeting.size()) {
        at += 3;  // charset, status
        serverCaps |= static_cast<std::uint32_t>(readLe(greeting, at, 2)) << 16;
        at += 2;
        const auto authLen = static_cast<std::size_t>(static_cast<unsigned char>(greeting[at]));
        at += 11;  // length + reserved
        if (serverCaps & kSecureConnection) {
            const std::size_t part2 = std::max<std::size_t>(13, authLen > 8 ? authLen - 8 : 0);
            scramble += greeting.substr(at, part2);
            at += part2;
            while (!scramble.empty() && scramble.back() == '\0') scramble.pop_back();
        }
        if ((serverCaps & kPluginAuth) && at < greeting.size()) plugin = readCString(greeting, at);
    }
    if (!(serverCaps & kProtocol41)) throw AdapterUnavailable("server lacks protocol 4.1 support");

    std::uint32_t caps = kLongPassword | kProtocol41 | kTransactions | kSecureConnection | kMultiResults | kPluginAuth;
    if (!url_.database.empty()) caps |= kConnectWithDb;
    std::string response = le(caps, 4) + le(kMaxPayload, 4);
    response += static_cast<char>(45);  // utf8mb4_general_ci
    response += std::string(23, '\0');
    response += url_.user;
    response += '\0';
    const std::string auth = authResponse(plugin, scramble);
    response += static_cast<char>(auth.size());
    response += auth;
    if (!url_.database.empty()) {
        response += url_.database;
        response += '\0';
    }
    response += plugin;
    response += '\0';
    writePacket(response);

    while (true) {
        const std::string packet = readPacket();
        if (isOk(packet)) return;
        if (isErr(packet)) throw AdapterUnavailable("authentication failed: " + errText(packet));
        const auto tag = static_cast<unsigned char>(packet[0]);
        if (tag == 0xFE) {  // AuthSwitchRequest
            std::size_t p = 1;
            plugin = readCString(packet, p);
            scramble = packet.substr(std::min(p, packet.size()));
            while (!scramble.empty() && scramble.back() == '\0') scramble.pop_back();
            writePacket(authResponse(plugin, scramble));
        } else if (tag == 0x01) {  // AuthMoreData
            if (packet.size() == 2 && packet[1] == 0x03) continue;  // fast auth ok, OK follows
            if (packet.size() == 2 && packet[1] == 0x04) {
                writePacket(std::string(1, '\x02'));  // request public key
                const std::string key = readPacket();
                if (key.empty() || key[0] != 0x01) throw AdapterUnavailable("server did not send its public key");
                std::string pw = url_.password;
                pw += '\0';
                writePacket(wirecrypto::rsaOaepEncrypt(key.substr(1), wirecrypto::xorBytes(pw, scramble)));
                continue;
            }
            throw AdapterUnavailable("unexpected auth continuation from server");
        } else {
            throw AdapterUnavailable("unexpected packet during authentication");
        }
    }
}

QueryResult MySqlAdapter::query(const std::string& sql) {
    sequence_ = 0;
    std::string command(1, '\x03');
    command += sql;
    writePacket(command);
    QueryResult result;
    while (true) {
        const std::string first = readPacket();
        if (isErr(first)) throw TargetError(errText(first));
        if (isOk(first)) {
            if (okStatus(first) & kMoreResultsExist) continue;
            return result;
        }
        std::size_t at = 0;
        const auto count = readLenenc(first, at).value_or(0);
        QueryResult current;
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::string def = readPacket();
            std::size_t p = 0;
            for (int skip = 0; skip < 4; ++skip) readLenencString(def, p);  // catalog, schema, table, org_table
            current.columns.push_back(readLenencString(def, p).value_or(""));
        }
        const std::string eof = readPacket();
        if (!isEof(eof)) throw TargetError("expected EOF after column definitions");
        std::uint16_t status = 0;
        while (true) {
            const std::string row = readPacket();
            if (isErr(row)) throw TargetError(errText(row));
            if (isEof(row)) {
                status = static_cast<std::uint16_t>(readLe(row, 3, 2));
                break;
            }
            std::size_t p = 0;
            std::vector<std::optional<std::string>> values;
            for (std::uint64_t i = 0; i < count; ++i) values.push_back(readLenencString(row, p));
            current.rows.push_back(std::move(values));
        }
        result = std::move(current);
        if (!(status & kMoreResultsExist)) return result;
    }
}

void MySqlAdapter::executeStatement(const std::string& sql) { query(sql); }

RawPlan MySqlAdapter::explain(const std::string& selectSql) {
    RawPlan raw;
    raw.format = RawPlan::Format::Tabular;
    if (tidb_) {
        const QueryResult r = query("EXPLAIN " + selectSql);
        std::size_t estCol = 1;
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            if (r.columns[i] == "estRows" || r.columns[i] == "rows") estCol = i;
        }
        for (const auto& row : r.rows) {
            TabularRow t;
            t.id = row.empty() ? "" : row[0].value_or("");
            t.estRows = estCol < row.size() ? row[estCol].value_or("") : "";
            for (std::size_t i = 1; i < row.size() && i < r.columns.size(); ++i) {
                if (i != estCol) t.info.emplace_back(r.columns[i], row[i].value_or("NULL"));
            }
            raw.text += t.id + "\t" + t.estRows + "\n";
            raw.rows.push_back(std::move(t));
        }
        return raw;
    }
    const QueryResult r = query("EXPLAIN FORMAT=TREE " + selectSql);
    for (const auto& row : r.rows) {
        if (!row.empty() && row[0]) raw.text += *row[0] + "\n";
    }
    raw.rows = mysqlTreeToRows(raw.text);
    return raw;
}

void MySqlAdapter::resetNamespace() {
    const std::string db = quoteIdent("monocard_w" + std::to_string(worker_));
    query("DROP DATABASE IF EXISTS " + db);
    query("CREATE DATABASE " + db);
    query("USE " + db);
}

std::int64_t MySqlAdapter::countRows(const std::string& table) {
    const QueryResult r = query("SELECT COUNT(*) FROM " + table);
    if (r.rows.empty() || r.rows[0].empty() || !r.rows[0][0]) throw TargetError("COUNT(*) returned no value");
    return std::stoll(*r.rows[0][0]);
}

}  // namespace monocard
