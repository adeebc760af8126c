#include "cls/rpc/http2.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace cls::rpc {

namespace {

constexpr std::int64_t kRecvWindow = 1 << 24;
constexpr std::size_t kMaxAcceptedFrame = 1 << 24;

enum : std::uint16_t {
    kSettingsHeaderTableSize = 1,
    kSettingsEnablePush = 2,
    kSettingsMaxConcurrentStreams = 3,
    kSettingsInitialWindowSize = 4,
    kSettingsMaxFrameSize = 5,
};

std::uint32_t be32(std::string_view s, std::size_t at) {
    return (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[at])) << 24) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[at + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[at + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[at + 3]));
}

void put32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

std::string settings_payload(std::initializer_list<std::pair<std::uint16_t, std::uint32_t>> kv) {
    std::string out;
    for (auto [id, v] : kv) {
        out.push_back(static_cast<char>(id >> 8));
        out.push_back(static_cast<char>(id));
        put32(out, v);
    }
    return out;
}

Frame window_update(std::uint32_t stream, std::uint32_t increment) {
    Frame f{FrameType::WindowUpdate, 0, stream, {}};
    put32(f.payload, increment);
    return f;
}

int remaining_ms(SteadyClock::time_point deadline) {
    const auto left = std::chrono::ceil<std::chrono::milliseconds>(deadline - SteadyClock::now()).count();
    return static_cast<int>(std::clamp<long long>(left, 0, 1'000'000));
}

}  // namespace

std::string encode_frame(const Frame& f) {
    std::string out;
    out.reserve(kFrameHeaderSize + f.payload.size());
    const auto len = static_cast<std::uint32_t>(f.payload.size());
    out.push_back(static_cast<char>(len >> 16));
    out.push_back(static_cast<char>(len >> 8));
    out.push_back(static_cast<char>(len));
    out.push_back(static_cast<char>(f.type));
    out.push_back(static_cast<char>(f.flags));
    put32(out, f.stream & 0x7fffffffu);
    out += f.payload;
    return out;
}

std::optional<Frame> parse_frame(std::string_view buf, std::size_t& consumed) {
    if (buf.size() < kFrameHeaderSize) return std::nullopt;
    const std::size_t len = (static_cast<std::size_t>(static_cast<std::uint8_t>(buf[0])) << 16) |
                            (static_cast<std::size_t>(static_cast<std::uint8_t>(buf[1])) << 8) |
                            static_cast<std::size_t>(static_cast<std::uint8_t>(buf[2]));
    if (buf.size() < kFrameHeaderSize + len) return std::nullopt;
    Frame f;
    f.type = static_cast<FrameType>(buf[3]);
    f.flags = static_cast<std::uint8_t>(buf[4]);
    f.stream = be32(buf, 5) & 0x7fffffffu;
    f.payload.assign(buf.substr(kFrameHeaderSize, len));
    consumed = kFrameHeaderSize + len;
    return f;
}

Http2Session::Http2Session(int fd, Role role, bool threaded_reader)
    : fd_(fd), role_(role), threaded_reader_(threaded_reader) {}

Http2Session::~Http2Session() {
    if (fd_ >= 0) ::close(fd_);
}

bool Http2Session::start(SteadyClock::time_point deadline) {
    if (role_ == Role::Server) {
        while (rbuf_.size() < kClientPreface.size()) {
            if (fill(deadline) != Wait::Event) return false;
        }
        if (std::string_view(rbuf_).substr(0, kClientPreface.size()) != kClientPreface) {
            mark_closed();
            return false;
        }
        rbuf_.erase(0, kClientPreface.size());
    }
    std::string out;
    if (role_ == Role::Client) out += kClientPreface;
    const auto settings =
        role_ == Role::Client
            ? settings_payload({{kSettingsEnablePush, 0}, {kSettingsInitialWindowSize, kRecvWindow}})
            : settings_payload({{kSettingsMaxConcurrentStreams, 1000}, {kSettingsInitialWindowSize, kRecvWindow}});
    out += encode_frame({FrameType::Settings, 0, 0, settings});
    out += encode_frame(window_update(0, static_cast<std::uint32_t>(kRecvWindow - 65535)));
    write_raw(out);
    return !closed();
}

bool Http2Session::closed() const {
    std::lock_guard lk(mu_);
    return closed_;
}

void Http2Session::mark_closed() {
    {
        std::lock_guard lk(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

void Http2Session::shutdown() {
    ::shutdown(fd_, SHUT_RDWR);
    mark_closed();
}

void Http2Session::write_raw(std::string_view bytes) {
    std::lock_guard lk(write_mu_);
    while (!bytes.empty()) {
        const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            mark_closed();
            return;
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
}

Http2Session::Wait Http2Session::fill(SteadyClock::time_point deadline) {
    for (;;) {
        pollfd p{fd_, POLLIN, 0};
        const int r = ::poll(&p, 1, remaining_ms(deadline));
        if (r < 0) {
            if (errno == EINTR) continue;
            mark_closed();
            return Wait::Closed;
        }
        if (r == 0) return Wait::Timeout;
        char buf[16384];
        const auto n = ::recv(fd_, buf, sizeof buf, MSG_DONTWAIT);
        if (n > 0) {
            rbuf_.append(buf, static_cast<std::size_t>(n));
            return Wait::Event;
        }
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) continue;
        mark_closed();
        return Wait::Closed;
    }
}

Http2Session::Wait Http2Session::pump(SteadyClock::time_point deadline) {
    for (;;) {
        if (closed()) return Wait::Closed;
        std::size_t used = 0;
        if (auto f = parse_frame(rbuf_, used)) {
            rbuf_.erase(0, used);
            if (f->payload.size() > kMaxAcceptedFrame) {
                send_goaway(0, h2error::kProtocol);
                mark_closed();
                return Wait::Closed;
            }
            handle(std::move(*f));
            return Wait::Event;
        }
        const auto r = fill(deadline);
        if (r != Wait::Event) return r;
    }
}

Http2Session::Wait Http2Session::next_event(H2Event& out, SteadyClock::time_point deadline) {
    for (;;) {
        if (!pending_.empty()) {
            out = std::move(pending_.front());
            pending_.pop_front();
            return Wait::Event;
        }
        const auto r = pump(deadline);
        if (r != Wait::Event) return r;
    }
}

void Http2Session::handle(Frame f) {
    const bool in_block = cont_stream_.has_value();
    if (in_block != (f.type == FrameType::Continuation) || (in_block && f.stream != *cont_stream_)) {
        send_goaway(0, h2error::kProtocol);
        mark_closed();
        return;
    }
    try {
        switch (f.type) {
            case FrameType::Data: {
                recv_consumed_ += static_cast<std::int64_t>(f.payload.size());
                if (recv_consumed_ >= kRecvWindow / 2) {
                    write_frame(window_update(0, static_cast<std::uint32_t>(recv_consumed_)));
                    recv_consumed_ = 0;
                }
                std::string data = std::move(f.payload);
                if (f.flags & h2flag::kPadded) {
                    if (data.empty() || static_cast<std::uint8_t>(data[0]) >= data.size())
                        throw HpackError("bad padding");
                    data = data.substr(1, data.size() - 1 - static_cast<std::uint8_t>(data[0]));
                }
                H2Event e;
                e.kind = H2Event::Kind::Data;
                e.stream = f.stream;
                e.data = std::move(data);
                e.end_stream = f.flags & h2flag::kEndStream;
                pending_.push_back(std::move(e));
                break;
            }
            case FrameType::Headers: {
                std::string_view p = f.payload;
                std::size_t pad = 0;
                if (f.flags & h2flag::kPadded) {
                    if (p.empty()) throw HpackError("bad padding");
                    pad = static_cast<std::uint8_t>(p[0]);
                    p.remove_prefix(1);
                }
                if (f.flags & h2flag::kPriority) {
                    if (p.size() < 5) throw HpackError("bad priority");
                    p.remove_prefix(5);
                }
                if (pad > p.size()) throw HpackError("bad padding");
                p.remove_suffix(pad);
                cont_block_.assign(p);
                cont_end_stream_ = f.flags & h2flag::kEndStream;
                cont_stream_ = f.stream;
                [[fallthrough]];
            }
            case FrameType::Continuation: {
                if (f.type == FrameType::Continuation) cont_block_ += f.payload;
                if (!(f.flags & h2flag::kEndHeaders)) break;
                H2Event e;
                e.kind = H2Event::Kind::Headers;
                e.stream = *cont_stream_;
                e.headers = decoder_.decode(cont_block_);
                e.end_stream = cont_end_stream_;
                cont_stream_.reset();
                cont_block_.clear();
                pending_.push_back(std::move(e));
                break;
            }
            case FrameType::RstStream: {
                H2Event e;
                e.kind = H2Event::Kind::Reset;
                e.stream = f.stream;
                e.error_code = f.payload.size() >= 4 ? be32(f.payload, 0) : 0;
                forget_stream(f.stream);
                pending_.push_back(std::move(e));
                break;
            }
            case FrameType::Settings: {
                if (f.flags & h2flag::kAck) break;
                {
                    std::lock_guard lk(mu_);
                    for (std::size_t i = 0; i + 6 <= f.payload.size(); i += 6) {
                        const auto id = static_cast<std::uint16_t>((static_cast<std::uint8_t>(f.payload[i]) << 8) |
                                                                   static_cast<std::uint8_t>(f.payload[i + 1]));
                        const auto v = be32(f.payload, i + 2);
                        if (id == kSettingsInitialWindowSize) {
                            const std::int64_t delta = static_cast<std::int64_t>(v) - peer_initial_window_;
                            peer_initial_window_ = v;
                            for (auto& [_, w] : stream_send_window_) w += delta;
                        } else if (id == kSettingsMaxFrameSize) {
                            peer_max_frame_ = v;
                        }
                    }
                }
                cv_.notify_all();
                write_frame({FrameType::Settings, h2flag::kAck, 0, {}});
                break;
            }
            case FrameType::Ping:
                if (!(f.flags & h2flag::kAck)) write_frame({FrameType::Ping, h2flag::kAck, 0, std::move(f.payload)});
                break;
            case FrameType::GoAway: {
                H2Event e;
                e.kind = H2Event::Kind::GoAway;
                e.stream = f.payload.size() >= 4 ? be32(f.payload, 0) & 0x7fffffffu : 0;
                e.error_code = f.payload.size() >= 8 ? be32(f.payload, 4) : 0;
                pending_.push_back(std::move(e));
                break;
            }
            case FrameType::WindowUpdate: {
                if (f.payload.size() < 4) break;
                const auto inc = be32(f.payload, 0) & 0x7fffffffu;
                {
                    std::lock_guard lk(mu_);
                    if (f.stream == 0) {
                        conn_send_window_ += inc;
                    } else if (auto it = stream_send_window_.find(f.stream); it != stream_send_window_.end()) {
                        it->second += inc;
                    }
                }
                cv_.notify_all();
                break;
            }
            default:
                break;
        }
    } catch (const HpackError&) {
        send_goaway(0, h2error::kProtocol);
        mark_closed();
    }
}

void Http2Session::send_headers(std::uint32_t stream, const HeaderList& headers, bool end_stream) {
    const std::string block = encoder_.encode(headers);
    std::size_t max_frame;
    {
        std::lock_guard lk(mu_);
        max_frame = peer_max_frame_;
    }
    std::string out;
    std::size_t off = 0;
    bool first = true;
    do {
        const auto n = std::min(max_frame, block.size() - off);
        const bool last = off + n == block.size();
        Frame f{first ? FrameType::Headers : FrameType::Continuation, 0, stream, block.substr(off, n)};
        if (last) f.flags |= h2flag::kEndHeaders;
        if (first && end_stream) f.flags |= h2flag::kEndStream;
        out += encode_frame(f);
        off += n;
        first = false;
    } while (off < block.size());
    write_raw(out);
}

bool Http2Session::send_data(std::uint32_t stream, std::string_view data, bool end_stream,
                             SteadyClock::time_point deadline) {
    std::size_t off = 0;
    do {
        std::size_t chunk = 0;
        {
            std::unique_lock lk(mu_);
            for (;;) {
                if (closed_) return false;
                auto [it, _] = stream_send_window_.try_emplace(stream, peer_initial_window_);
                const auto avail = std::min<std::int64_t>({conn_send_window_, it->second,
                                                           static_cast<std::int64_t>(peer_max_frame_)});
                const auto left = static_cast<std::int64_t>(data.size() - off);
                if (left == 0 || avail > 0) {
                    chunk = static_cast<std::size_t>(std::min(left, avail));
                    conn_send_window_ -= static_cast<std::int64_t>(chunk);
                    it->second -= static_cast<std::int64_t>(chunk);
                    break;
                }
                if (threaded_reader_) {
                    if (cv_.wait_until(lk, deadline) == std::cv_status::timeout) return false;
                } else {
                    lk.unlock();
                    if (pump(deadline) != Wait::Event) return false;
                    lk.lock();
                }
            }
        }
        const bool last = off + chunk == data.size();
        write_frame({FrameType::Data, static_cast<std::uint8_t>(last && end_stream ? h2flag::kEndStream : 0), stream,
                     std::string(data.substr(off, chunk))});
        off += chunk;
    } while (off < data.size());
    return !closed();
}

void Http2Session::send_rst(std::uint32_t stream, std::uint32_t code) {
    Frame f{FrameType::RstStream, 0, stream, {}};
    put32(f.payload, code);
    write_frame(f);
    forget_stream(stream);
}

void Http2Session::send_goaway(std::uint32_t last_stream, std::uint32_t code) {
    Frame f{FrameType::GoAway, 0, 0, {}};
    put32(f.payload, last_stream);
    put32(f.payload, code);
    write_frame(f);
}

void Http2Session::forget_stream(std::uint32_t stream) {
    std::lock_guard lk(mu_);
    stream_send_window_.erase(stream);
}

// ---- TCP --------------------------------------------------------------------------

namespace {

std::optional<sockaddr_in> resolve_v4(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res) return std::nullopt;
    sockaddr_in sa = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
    ::freeaddrinfo(res);
    sa.sin_port = htons(static_cast<std::uint16_t>(port));
    return sa;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

int tcp_connect(const std::string& host, int port, std::chrono::milliseconds timeout) {
    const auto sa = resolve_v4(host, port);
    if (!sa) return -1;
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) return -1;
    const int fl = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, fl | O_NONBLOCK);
    int r = ::connect(fd, reinterpret_cast<const sockaddr*>(&*sa), sizeof *sa);
    if (r < 0 && errno == EINPROGRESS) {
        pollfd p{fd, POLLOUT, 0};
        r = ::poll(&p, 1, static_cast<int>(timeout.count()));
        int err = 0;
        socklen_t len = sizeof err;
        if (r == 1 && ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) == 0 && err == 0) r = 0;
        else r = -1;
    }
    if (r != 0) {
        ::close(fd);
        return -1;
    }
    ::fcntl(fd, F_SETFL, fl);
    set_nodelay(fd);
    return fd;
}

int tcp_listen(const std::string& host, int port, int& bound_port) {
    const auto sa = resolve_v4(host, port);
    if (!sa) throw std::runtime_error("cannot resolve " + host);
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&*sa), sizeof *sa) < 0 || ::listen(fd, 128) < 0) {
        const std::string err = std::strerror(errno);
        ::close(fd);
        throw std::runtime_error("listen on " + host + ":" + std::to_string(port) + ": " + err);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    bound_port = ntohs(bound.sin_port);
    return fd;
}

}  // namespace cls::rpc
