#include <arpa/inet.h>

#include <cstring>

#include "monocard/errors.hpp"
#include "monocard/wire.hpp"

namespace monocard {

namespace {

constexpr int kProtocolVersion = 196608;  // 3.0

std::string int32(std::int32_t v) {
    const std::uint32_t n = htonl(static_cast<std::uint32_t>(v));
    return std::string(reinterpret_cast<const char*>(&n), 4);
}

std::int32_t readInt32(std::string_view s, std::size_t at) {
    if (at + 4 > s.size()) throw TargetError("truncated server message");
    std::uint32_t n;
    std::memcpy(&n, s.data() + at, 4);
    return static_cast<std::int32_t>(ntohl(n));
}

std::int16_t readInt16(std::string_view s, std::size_t at) {
    if (at + 2 > s.size()) throw TargetError("truncated server message");
    std::uint16_t n;
    std::memcpy(&n, s.data() + at, 2);
    return static_cast<std::int16_t>(ntohs(n));
}

std::string readCString(std::string_view s, std::size_t& at) {
    const auto end = s.find('\0', at);
    if (end == std::string_view::npos) throw TargetError("unterminated string in server message");
    std::string out(s.substr(at, end - at));
    at = end + 1;
    return out;
}

// ErrorResponse / NoticeResponse fields: severity, code and message.
std::string errorText(std::string_view body) {
    std::string severity, code, message;
    std::size_t at = 0;
    while (at < body.size() && body[at] != '\0') {
        const char field = body[at++];
        const std::string value = readCString(body, at);
        if (field == 'S') severity = value;
        if (field == 'C') code = value;
        if (field == 'M') message = value;
    }
    return severity + " " + code + ": " + message;
}

std::string quoteIdent(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

PostgresAdapter::PostgresAdapter(ConnectionUrl url, int worker) : url_(std::move(url)), worker_(worker) {
    if (url_.port == 0) url_.port = url_.scheme == "cockroach" ? 26257 : 5432;
    if (url_.user.empty()) url_.user = url_.scheme == "cockroach" ? "root" : "postgres";
    if (url_.database.empty()) url_.database = url_.scheme == "cockroach" ? "defaultdb" : url_.user;
    identity_ = url_.scheme + "://" + url_.host + ":" + std::to_string(url_.port) + "/" + url_.database;
    connect();
    resetNamespace();
}

PostgresAdapter::~PostgresAdapter() {
    if (socket_.isOpen()) {
        try {
            sendMessage('X', {});
        } catch (const Error&) {
        }
    }
}

void PostgresAdapter::sendMessage(char type, std::string_view body) {
    std::string msg;
    msg += type;
    msg += int32(static_cast<std::int32_t>(body.size() + 4));
    msg.append(body);
    socket_.sendAll(msg);
}

char PostgresAdapter::readMessage(std::string& body) {
    const std::string header = socket_.recvExact(5);
    const std::int32_t len = readInt32(header, 1);
    if (len < 4) throw TargetError("bad message length from server");
    body = socket_.recvExact(static_cast<std::size_t>(len - 4));
    return header[0];
}

void PostgresAdapter::connect() {
    socket_.connect(url_.host, url_.port);
    std::string startup = int32(kProtocolVersion);
    auto param = [&](const std::string& k, const std::string& v) {
        startup += k;
        startup += '\0';
        startup += v;
        startup += '\0';
    };
    param("user", url_.user);
    param("database", url_.database);
    param("client_encoding", "UTF8");
    param("application_name", "monocard");
    startup += '\0';
    socket_.sendAll(int32(static_cast<std::int32_t>(startup.size() + 4)) + startup);

    std::optional<ScramClient> scram;
    std::string body;
    while (true) {
        const char type = readMessage(body);
        if (type == 'E') throw AdapterUnavailable("connection rejected: " + errorText(body));
        if (type == 'R') {
            const std::int32_t code = readInt32(body, 0);
            switch (code) {
                case 0:  // AuthenticationOk
                    break;
                case 3: {  // cleartext
                    std::string pw = url_.password;
                    pw += '\0';
                    sendMessage('p', pw);
                    break;
                }
                case 5: {  // md5
                    if (body.size() < 8) throw TargetError("short md5 salt");
                    std::string pw = wirecrypto::pgMd5Password(url_.user, url_.password, body.substr(4, 4));
                    pw += '\0';
                    sendMessage('p', pw);
                    break;
                }
                case 10: {  // SASL mechanisms
                    std::size_t at = 4;
                    bool offered = false;
                    while (at < body.size() && body[at] != '\0') {
                        if (readCString(body, at) == "SCRAM-SHA-256") offered = true;
                    }
                    if (!offered) throw AdapterUnavailable("server offers no supported SASL mechanism");
                    scram.emplace(url_.user, url_.password, wirecrypto::randomNonce(18));
                    const std::string first = scram->clientFirst();
                    std::string msg = "SCRAM-SHA-256";
                    msg += '\0';
                    msg += int32(static_cast<std::int32_t>(first.size()));
                    msg += first;
                    sendMessage('p', msg);
                    break;
                }
                case 11: {  // SASL continue
                    if (!scram) throw TargetError("unexpected SASL continue");
                    sendMessage('p', scram->clientFinal(body.substr(4)));
                    break;
                }
                case 12: {  // SASL final
                    if (!scram || !scram->verifyServerFinal(body.substr(4))) {
                        throw AdapterUnavailable("server signature mismatch in SCRAM exchange");
                    }
                    break;
                }
                default:
                    throw AdapterUnavailable("unsupported authentication method " + std::to_string(code));
            }
        } else if (type == 'S') {
            std::size_t at = 0;
            const std::string key = readCString(body, at);
            const std::string value = readCString(body, at);
            if (key == "server_version") version_ = value;
        } else if (type == 'Z') {
            break;
        }
        // 'K' (backend key) and 'N' (notice) need no action.
    }
    if (version_.empty()) version_ = "unknown";
}

QueryResult PostgresAdapter::query(const std::string& sql) {
    std::string text = sql;
    text += '\0';
    sendMessage('Q', text);
    QueryResult result;
    std::optional<std::string> error;
    std::string body;
    while (true) {
        const char type = readMessage(body);
        switch (type) {
            case 'T': {
                result.columns.clear();
                const int n = readInt16(body, 0);
                std::size_t at = 2;
                for (int i = 0; i < n; ++i) {
                    result.columns.push_back(readCString(body, at));
                    at += 18;
                }
                break;
            }
            case 'D': {
                const int n = readInt16(body, 0);
                std::size_t at = 2;
                std::vector<std::optional<std::string>> row;
                for (int i = 0; i < n; ++i) {
                    const std::int32_t len = readInt32(body, at);
                    at += 4;
                    if (len < 0) {
                        row.emplace_back(std::nullopt);
                    } else {
                        if (at + static_cast<std::size_t>(len) > body.size()) throw TargetError("truncated data row");
                        row.emplace_back(body.substr(at, static_cast<std::size_t>(len)));
                        at += static_cast<std::size_t>(len);
                    }
                }
                result.rows.push_back(std::move(row));
                break;
            }
            case 'E':
                if (!error) error = errorText(body);
                break;
            case 'Z':
                if (error) throw TargetError(*error);
                return result;
            default:
                break;  // CommandComplete, EmptyQueryResponse, notices
        }
    }
}

void PostgresAdapter::executeStatement(const std::string& sql) { query(sql); }

RawPlan PostgresAdapter::explain(const std::string& selectSql) {
    const QueryResult r = query("EXPLAIN " + selectSql);
    std::string text;
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += '\t';
            if (row[i]) text += *row[i];
        }
        text += '\n';
    }
    RawPlan raw;
    if (text.find("\xE2\x80\xA2") != std::string::npos) {
        raw.format = RawPlan::Format::Text;
        raw.text = std::move(text);
    } else {
        raw.format = RawPlan::Format::Tabular;
        raw.text = text;
        raw.rows = postgresPlanToRows(text);
    }
    return raw;
}

void PostgresAdapter::resetNamespace() {
    const std::string schema = quoteIdent("monocard_w" + std::to_string(worker_));
    query("DROP SCHEMA IF EXISTS " + schema + " CASCADE");
    query("CREATE SCHEMA " + schema);
    query("SET search_path TO " + schema);
}

std::int64_t PostgresAdapter::countRows(const std::string& table) {
    const QueryResult r = query("SELECT COUNT(*) FROM " + table);
    if (r.rows.empty() || r.rows[0].empty() || !r.rows[0][0]) throw TargetError("COUNT(*) returned no value");
    return std::stoll(*r.rows[0][0]);
}

}  // namespace monocard
