#include "cls/common/udp.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <system_error>

namespace cls {

namespace {

[[noreturn]] void throw_errno(const char* what) { throw std::system_error(errno, std::generic_category(), what); }

constexpr std::size_t kMaxDatagram = 65536;

}  // namespace

Endpoint Endpoint::resolve(const std::string& host, std::uint16_t port) {
    Endpoint e;
    e.port = port;
    in_addr a{};
    if (::inet_pton(AF_INET, host.c_str(), &a) == 1) {
        e.addr = a.s_addr;
        return e;
    }
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
        throw std::system_error(std::make_error_code(std::errc::host_unreachable), "resolve " + host);
    e.addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr.s_addr;
    ::freeaddrinfo(res);
    return e;
}

sockaddr_in Endpoint::to_sockaddr() const {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = addr;
    sa.sin_port = htons(port);
    return sa;
}

Endpoint Endpoint::from_sockaddr(const sockaddr_in& sa) { return {sa.sin_addr.s_addr, ntohs(sa.sin_port)}; }

std::string Endpoint::to_string() const {
    char buf[INET_ADDRSTRLEN] = {};
    in_addr a{};
    a.s_addr = addr;
    ::inet_ntop(AF_INET, &a, buf, sizeof buf);
    return std::string(buf) + ":" + std::to_string(port);
}

UdpSocket::~UdpSocket() { close(); }

UdpSocket::UdpSocket(UdpSocket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

void UdpSocket::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

UdpSocket UdpSocket::bind(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0);
    if (fd < 0) throw_errno("socket");
    UdpSocket s(fd);
    int buf = 1 << 20;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
    const sockaddr_in sa = Endpoint::resolve(host, port).to_sockaddr();
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) throw_errno("bind");
    return s;
}

std::uint16_t UdpSocket::local_port() const {
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0) throw_errno("getsockname");
    return ntohs(sa.sin_port);
}

bool UdpSocket::send_to(const Endpoint& to, std::string_view payload) const {
    const sockaddr_in sa = to.to_sockaddr();
    const ssize_t n =
        ::sendto(fd_, payload.data(), payload.size(), MSG_NOSIGNAL, reinterpret_cast<const sockaddr*>(&sa), sizeof sa);
    return n == static_cast<ssize_t>(payload.size());
}

std::optional<UdpSocket::Datagram> UdpSocket::try_receive() const {
    std::string buf(kMaxDatagram, '\0');
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&sa), &len);
    if (n < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    return Datagram{Endpoint::from_sockaddr(sa), std::move(buf)};
}

std::optional<UdpSocket::Datagram> UdpSocket::receive(std::chrono::milliseconds timeout) const {
    if (auto d = try_receive()) return d;
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(std::max<long long>(0, timeout.count())));
    if (r <= 0) return std::nullopt;
    return try_receive();
}

}  // namespace cls
