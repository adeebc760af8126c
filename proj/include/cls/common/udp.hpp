#pragma once

#include <netinet/in.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cls {

/// IPv4 address + port.
struct Endpoint {
    std::uint32_t addr = 0;  ///< network byte order
    std::uint16_t port = 0;  ///< host byte order

    static Endpoint resolve(const std::string& host, std::uint16_t port);
    sockaddr_in to_sockaddr() const;
    static Endpoint from_sockaddr(const sockaddr_in& sa);
    std::string to_string() const;

    bool operator==(const Endpoint&) const = default;
    auto operator<=>(const Endpoint&) const = default;
};

/// Non-blocking UDP socket. Throws std::system_error on setup failures.
class UdpSocket {
public:
    UdpSocket() = default;
    ~UdpSocket();
    UdpSocket(UdpSocket&& o) noexcept;
    UdpSocket& operator=(UdpSocket&& o) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    /// Binds to host:port; port 0 picks an ephemeral port.
    static UdpSocket bind(const std::string& host, std::uint16_t port);

    int fd() const { return fd_; }
    bool is_open() const { return fd_ >= 0; }
    std::uint16_t local_port() const;

    /// Returns false if the datagram could not be queued (never blocks).
    bool send_to(const Endpoint& to, std::string_view payload) const;

    struct Datagram {
        Endpoint from;
        std::string payload;
    };

    /// Next datagram, waiting at most `timeout`. nullopt on timeout.
    std::optional<Datagram> receive(std::chrono::milliseconds timeout) const;

    /// Next datagram if one is queued.
    std::optional<Datagram> try_receive() const;

    void close();

private:
    explicit UdpSocket(int fd) : fd_(fd) {}
    int fd_ = -1;
};

}  // namespace cls
