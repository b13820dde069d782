#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstring>
#include <memory>

#include "monocard/errors.hpp"
#include "monocard/wire.hpp"

namespace monocard {

// ---------------------------------------------------------------------------
// URL
// ---------------------------------------------------------------------------

namespace {

std::string percentDecode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

ConnectionUrl parseUrl(const std::string& url) {
    ConnectionUrl out;
    const auto sep = url.find("://");
    if (sep == std::string::npos || sep == 0) throw ConfigError("target URL needs a scheme: " + url);
    for (char c : url.substr(0, sep)) out.scheme += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string rest = url.substr(sep + 3);
    const auto q = rest.find('?');
    if (q != std::string::npos) rest.erase(q);
    const auto slash = rest.find('/');
    if (slash != std::string::npos) {
        out.database = percentDecode(rest.substr(slash + 1));
        rest.erase(slash);
    }
    const auto at = rest.rfind('@');
    if (at != std::string::npos) {
        const std::string cred = rest.substr(0, at);
        const auto colon = cred.find(':');
        out.user = percentDecode(cred.substr(0, colon));
        if (colon != std::string::npos) out.password = percentDecode(cred.substr(colon + 1));
        rest.erase(0, at + 1);
    }
    std::string hostPort = rest;
    if (!hostPort.empty() && hostPort.front() == '[') {
        const auto close = hostPort.find(']');
        if (close == std::string::npos) throw ConfigError("bad IPv6 host in " + url);
        out.host = hostPort.substr(1, close - 1);
        hostPort.erase(0, close + 1);
        if (!hostPort.empty() && hostPort.front() == ':') out.port = std::stoi(hostPort.substr(1));
    } else {
        const auto colon = hostPort.rfind(':');
        if (colon != std::string::npos) {
            try {
                out.port = std::stoi(hostPort.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad port in " + url);
            }
            hostPort.erase(colon);
        }
        if (!hostPort.empty()) out.host = hostPort;
    }
    if (out.port < 0 || out.port > 65535) throw ConfigError("bad port in " + url);
    return out;
}

// ---------------------------------------------------------------------------
// TCP
// ---------------------------------------------------------------------------

TcpSocket::~TcpSocket() { close(); }

TcpSocket::TcpSocket(TcpSocket&& other) noexcept : fd_(other.fd_), timeoutMs_(other.timeoutMs_) { other.fd_ = -1; }

TcpSocket& TcpSocket::operator=(TcpSocket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        timeoutMs_ = other.timeoutMs_;
        other.fd_ = -1;
    }
    return *this;
}

void TcpSocket::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void TcpSocket::connect(const std::string& host, int port, int timeoutMs) {
    close();
    timeoutMs_ = timeoutMs;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0) {
        throw AdapterUnavailable("cannot resolve " + host + ": " + gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(result, &::freeaddrinfo);
    std::string lastError = "no address";
    for (addrinfo* ai = result; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            fd_ = fd;
            return;
        }
        lastError = std::strerror(errno);
        ::close(fd);
    }
    throw AdapterUnavailable("cannot connect to " + host + ":" + service + ": " + lastError);
}

void TcpSocket::sendAll(std::string_view data) {
    if (fd_ < 0) throw AdapterUnavailable("socket is closed");
    while (!data.empty()) {
        const auto n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw AdapterUnavailable(std::string("send failed: ") + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

std::string TcpSocket::recvExact(std::size_t n) {
    if (fd_ < 0) throw AdapterUnavailable("socket is closed");
    std::string out(n, '\0');
    std::size_t got = 0;
    while (got < n) {
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, timeoutMs_);
        if (ready == 0) throw AdapterUnavailable("read timed out");
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw AdapterUnavailable(std::string("poll failed: ") + std::strerror(errno));
        }
        const auto r = ::recv(fd_, out.data() + got, n - got, 0);
        if (r == 0) throw AdapterUnavailable("connection closed by server");
        if (r < 0) {
            if (errno == EINTR) continue;
            throw AdapterUnavailable(std::string("recv failed: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Crypto
// ---------------------------------------------------------------------------

namespace wirecrypto {

namespace {

std::string digest(const EVP_MD* md, std::string_view data) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out, &len, md, nullptr) != 1) throw Error("digest failed");
    return std::string(reinterpret_cast<char*>(out), len);
}

std::string hex(std::string_view bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned char c : bytes) {
        out += digits[c >> 4];
        out += digits[c & 15];
    }
    return out;
}

}  // namespace

std::string sha1(std::string_view data) { return digest(EVP_sha1(), data); }
std::string sha256(std::string_view data) { return digest(EVP_sha256(), data); }
std::string md5Hex(std::string_view data) { return hex(digest(EVP_md5(), data)); }

std::string hmacSha256(std::string_view key, std::string_view data) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), reinterpret_cast<const unsigned char*>(data.data()),
              data.size(), out, &len)) {
        throw Error("HMAC failed");
    }
    return std::string(reinterpret_cast<char*>(out), len);
}

std::string pbkdf2Sha256(std::string_view password, std::string_view salt, int iterations) {
    std::string out(32, '\0');
    if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                          reinterpret_cast<const unsigned char*>(salt.data()), static_cast<int>(salt.size()), iterations,
                          EVP_sha256(), 32, reinterpret_cast<unsigned char*>(out.data())) != 1) {
        throw Error("PBKDF2 failed");
    }
    return out;
}

std::string base64Encode(std::string_view data) {
    std::string out(4 * ((data.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64Decode(std::string_view text) {
    if (text.size() % 4 != 0) throw Error("bad base64 length");
    std::string out(3 * text.size() / 4 + 1, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw Error("bad base64");
    std::size_t len = static_cast<std::size_t>(n);
    // EVP_DecodeBlock counts padding bytes as output.
    if (!text.empty() && text.back() == '=') --len;
    if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
    out.resize(len);
    return out;
}

std::string randomNonce(std::size_t bytes) {
    std::string raw(bytes, '\0');
    if (RAND_bytes(reinterpret_cast<unsigned char*>(raw.data()), static_cast<int>(bytes)) != 1) {
        throw Error("RAND_bytes failed");
    }
    return base64Encode(raw);
}

std::string xorBytes(std::string_view a, std::string_view b) {
    std::string out(a);
    if (b.empty()) return out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<char>(out[i] ^ b[i % b.size()]);
    return out;
}

std::string rsaOaepEncrypt(std::string_view pemPublicKey, std::string_view data) {
    std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new_mem_buf(pemPublicKey.data(), static_cast<int>(pemPublicKey.size())),
                                                  &BIO_free);
    if (!bio) throw Error("BIO_new_mem_buf failed");
    std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr),
                                                            &EVP_PKEY_free);
    if (!key) throw TargetError("server sent an unreadable RSA public key");
    std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(EVP_PKEY_CTX_new(key.get(), nullptr),
                                                                     &EVP_PKEY_CTX_free);
    if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1) {
        throw Error("RSA context setup failed");
    }
    std::size_t len = 0;
    const auto* in = reinterpret_cast<const unsigned char*>(data.data());
    if (EVP_PKEY_encrypt(ctx.get(), nullptr, &len, in, data.size()) != 1) throw Error("RSA encrypt failed");
    std::string out(len, '\0');
    if (EVP_PKEY_encrypt(ctx.get(), reinterpret_cast<unsigned char*>(out.data()), &len, in, data.size()) != 1) {
        throw Error("RSA encrypt failed");
    }
    out.resize(len);
    return out;
}

std::string pgMd5Password(std::string_view user, std::string_view password, std::string_view salt) {
    const std::string inner = md5Hex(std::string(password) + std::string(user));
    return "md5" + md5Hex(inner + std::string(salt));
}

std::string mysqlNativePassword(std::string_view password, std::string_view scramble) {
    if (password.empty()) return {};
    const std::string stage1 = sha1(password);
    const std::string stage2 = sha1(stage1);
    return xorBytes(stage1, sha1(std::string(scramble) + stage2));
}

std::string cachingSha2Password(std::string_view password, std::string_view scramble) {
    if (password.empty()) return {};
    const std::string p1 = sha256(password);
    const std::string p2 = sha256(p1);
    return xorBytes(p1, sha256(p2 + std::string(scramble)));
}

}  // namespace wirecrypto

// ---------------------------------------------------------------------------
// SCRAM-SHA-256
// ---------------------------------------------------------------------------

ScramClient::ScramClient(std::string user, std::string password, std::string clientNonce)
    : user_(std::move(user)), password_(std::move(password)), nonce_(std::move(clientNonce)) {}

std::string ScramClient::clientFirst() const { return "n,,n=" + user_ + ",r=" + nonce_; }

std::string ScramClient::clientFinal(const std::string& serverFirst) {
    std::string nonce, salt;
    int iterations = 0;
    std::size_t start = 0;
    while (start < serverFirst.size()) {
        auto end = serverFirst.find(',', start);
        if (end == std::string::npos) end = serverFirst.size();
        const std::string attr = serverFirst.substr(start, end - start);
        if (attr.size() >= 2 && attr[1] == '=') {
            const std::string value = attr.substr(2);
            if (attr[0] == 'r') nonce = value;
            if (attr[0] == 's') salt = wirecrypto::base64Decode(value);
            if (attr[0] == 'i') iterations = std::stoi(value);
        }
        start = end + 1;
    }
    if (nonce.compare(0, nonce_.size(), nonce_) != 0 || iterations <= 0 || salt.empty()) {
        throw TargetError("malformed SCRAM server-first message");
    }
    using namespace wirecrypto;
    const std::string salted = pbkdf2Sha256(password_, salt, iterations);
    const std::string clientKey = hmacSha256(salted, "Client Key");
    const std::string storedKey = sha256(clientKey);
    const std::string withoutProof = "c=biws,r=" + nonce;
    const std::string authMessage = "n=" + user_ + ",r=" + nonce_ + "," + serverFirst + "," + withoutProof;
    const std::string proof = xorBytes(clientKey, hmacSha256(storedKey, authMessage));
    const std::string serverKey = hmacSha256(salted, "Server Key");
    expectedServerSignature_ = base64Encode(hmacSha256(serverKey, authMessage));
    return withoutProof + ",p=" + base64Encode(proof);
}

bool ScramClient::verifyServerFinal(const std::string& serverFinal) const {
    return serverFinal.rfind("v=", 0) == 0 && serverFinal.substr(2) == expectedServerSignature_;
}

}  // namespace monocard
