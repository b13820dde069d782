#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "monocard/adapter.hpp"

namespace monocard {

struct ConnectionUrl {
    std::string scheme;  // lower case
    std::string user;
    std::string password;
    std::string host = "127.0.0.1";
    int port = 0;  // 0: scheme default
    std::string database;
};

/// scheme://[user[:password]@]host[:port][/database]; percent-escapes decoded.
ConnectionUrl parseUrl(const std::string& url);

/// Blocking TCP client with a per-operation timeout.
class TcpSocket {
public:
    TcpSocket() = default;
    ~TcpSocket();
    TcpSocket(const TcpSocket&) = delete;
    TcpSocket& operator=(const TcpSocket&) = delete;
    TcpSocket(TcpSocket&& other) noexcept;
    TcpSocket& operator=(TcpSocket&& other) noexcept;

    /// Throws AdapterUnavailable.
    void connect(const std::string& host, int port, int timeoutMs = 5000);
    void sendAll(std::string_view data);
    std::string recvExact(std::size_t n);
    void close();
    bool isOpen() const { return fd_ >= 0; }

private:
    int fd_ = -1;
    int timeoutMs_ = 5000;
};

/// Hash and key-derivation helpers shared by the wire protocols (raw bytes in and out).
namespace wirecrypto {
std::string sha1(std::string_view data);
std::string sha256(std::string_view data);
std::string md5Hex(std::string_view data);
std::string hmacSha256(std::string_view key, std::string_view data);
std::string pbkdf2Sha256(std::string_view password, std::string_view salt, int iterations);
std::string base64Encode(std::string_view data);
std::string base64Decode(std::string_view text);
std::string randomNonce(std::size_t bytes);
std::string xorBytes(std::string_view a, std::string_view b);  // b repeats when shorter
/// RSA-OAEP (SHA-1) encryption with a PEM public key.
std::string rsaOaepEncrypt(std::string_view pemPublicKey, std::string_view data);

/// PostgreSQL md5 auth: "md5" + md5hex(md5hex(password + user) + salt).
std::string pgMd5Password(std::string_view user, std::string_view password, std::string_view salt);
/// mysql_native_password: SHA1(pw) XOR SHA1(scramble + SHA1(SHA1(pw))).
std::string mysqlNativePassword(std::string_view password, std::string_view scramble);
/// caching_sha2_password fast path: SHA256(pw) XOR SHA256(SHA256(SHA256(pw)) + scramble).
std::string cachingSha2Password(std::string_view password, std::string_view scramble);
}  // namespace wirecrypto

/// SCRAM-SHA-256 client side (RFC 5802 / RFC 7677) without channel binding.
class ScramClient {
public:
    ScramClient(std::string user, std::string password, std::string clientNonce);
    std::string clientFirst() const;
    /// Throws TargetError on a malformed server message or foreign nonce.
    std::string clientFinal(const std::string& serverFirst);
    bool verifyServerFinal(const std::string& serverFinal) const;

private:
    std::string user_, password_, nonce_;
    std::string expectedServerSignature_;
};

struct QueryResult {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<std::string>>> rows;
};

/// PostgreSQL v3 wire protocol (PostgreSQL, CockroachDB). Auth: trust,
/// cleartext, md5, SCRAM-SHA-256. Scratch namespace: schema monocard_w<worker>.
class PostgresAdapter : public DbmsAdapter {
public:
    PostgresAdapter(ConnectionUrl url, int worker);
    ~PostgresAdapter() override;

    QueryResult query(const std::string& sql);

    void executeStatement(const std::string& sql) override;
    RawPlan explain(const std::string& selectSql) override;
    Dialect dialect() const override { return Dialect::PostgresFamily; }
    void resetNamespace() override;
    std::int64_t countRows(const std::string& table) override;
    std::string identity() const override { return identity_; }
    std::string version() const override { return version_; }

private:
    void connect();
    char readMessage(std::string& body);
    void sendMessage(char type, std::string_view body);

    ConnectionUrl url_;
    int worker_;
    TcpSocket socket_;
    std::string identity_;
    std::string version_;
};

/// MySQL client/server protocol (MySQL, TiDB). Auth: mysql_native_password,
/// caching_sha2_password (RSA public-key exchange without TLS). Scratch
/// namespace: database monocard_w<worker>.
class MySqlAdapter : public DbmsAdapter {
public:
    MySqlAdapter(ConnectionUrl url, int worker);
    ~MySqlAdapter() override;

    QueryResult query(const std::string& sql);

    void executeStatement(const std::string& sql) override;
    RawPlan explain(const std::string& selectSql) override;
    Dialect dialect() const override { return Dialect::MySQLFamily; }
    void resetNamespace() override;
    std::int64_t countRows(const std::string& table) override;
    std::string identity() const override { return identity_; }
    std::string version() const override { return version_; }

private:
    void connect();
    std::string readPacket();
    void writePacket(std::string_view payload);
    std::string authResponse(const std::string& plugin, const std::string& scramble) const;

    ConnectionUrl url_;
    int worker_;
    bool tidb_;
    TcpSocket socket_;
    std::uint8_t sequence_ = 0;
    std::string identity_;
    std::string version_;
};

}  // namespace monocard
