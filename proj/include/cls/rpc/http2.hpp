#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "cls/rpc/hpack.hpp"

namespace cls::rpc {

using SteadyClock = std::chrono::steady_clock;

enum class FrameType : std::uint8_t {
    Data = 0,
    Headers = 1,
    Priority = 2,
    RstStream = 3,
    Settings = 4,
    PushPromise = 5,
    Ping = 6,
    GoAway = 7,
    WindowUpdate = 8,
    Continuation = 9,
};

namespace h2flag {
inline constexpr std::uint8_t kEndStream = 0x1;
inline constexpr std::uint8_t kAck = 0x1;
inline constexpr std::uint8_t kEndHeaders = 0x4;
inline constexpr std::uint8_t kPadded = 0x8;
inline constexpr std::uint8_t kPriority = 0x20;
}  // namespace h2flag

namespace h2error {
inline constexpr std::uint32_t kNoError = 0x0;
inline constexpr std::uint32_t kProtocol = 0x1;
inline constexpr std::uint32_t kCancel = 0x8;
}  // namespace h2error

inline constexpr std::string_view kClientPreface = "PRI * HTTP/2.0\r\n\r\nSM\r\n\r\n";
inline constexpr std::size_t kFrameHeaderSize = 9;

struct Frame {
    FrameType type = FrameType::Data;
    std::uint8_t flags = 0;
    std::uint32_t stream = 0;
    std::string payload;
};

std::string encode_frame(const Frame& f);

/// Parses one frame from the front of `buf`; nullopt if incomplete.
std::optional<Frame> parse_frame(std::string_view buf, std::size_t& consumed);

/// Application-level event surfaced by a session; control frames are
/// handled internally.
struct H2Event {
    enum class Kind { Headers, Data, Reset, GoAway };
    Kind kind = Kind::Headers;
    std::uint32_t stream = 0;
    HeaderList headers;
    std::string data;
    bool end_stream = false;
    std::uint32_t error_code = 0;
};

/// One HTTP/2 connection over a connected TCP socket (cleartext, prior
/// knowledge). Owns the descriptor.
///
/// Exactly one thread reads (next_event). Senders may be other threads when
/// `threaded_reader` is set; otherwise the reading thread also sends, and a
/// sender short of flow-control window pumps the socket itself.
class Http2Session {
public:
    enum class Role { Client, Server };
    enum class Wait { Event, Timeout, Closed };

    Http2Session(int fd, Role role, bool threaded_reader);
    ~Http2Session();
    Http2Session(const Http2Session&) = delete;
    Http2Session& operator=(const Http2Session&) = delete;

    /// Client: writes preface and settings. Server: also reads and checks
    /// the client preface. Returns false if the connection failed.
    bool start(SteadyClock::time_point deadline);

    Wait next_event(H2Event& out, SteadyClock::time_point deadline);

    void send_headers(std::uint32_t stream, const HeaderList& headers, bool end_stream);
    /// Splits by max frame size and waits for flow-control window. False on
    /// timeout or closed connection.
    bool send_data(std::uint32_t stream, std::string_view data, bool end_stream, SteadyClock::time_point deadline);
    void send_rst(std::uint32_t stream, std::uint32_t code);
    void send_goaway(std::uint32_t last_stream, std::uint32_t code);
    void forget_stream(std::uint32_t stream);

    /// Wakes a blocked reader; the session reports Closed afterwards.
    void shutdown();
    bool closed() const;

private:
    Wait pump(SteadyClock::time_point deadline);
    Wait fill(SteadyClock::time_point deadline);
    void handle(Frame f);
    void write_raw(std::string_view bytes);
    void write_frame(const Frame& f) { write_raw(encode_frame(f)); }
    void mark_closed();

    int fd_;
    Role role_;
    bool threaded_reader_;

    std::string rbuf_;
    std::deque<H2Event> pending_;
    HpackDecoder decoder_;
    HpackEncoder encoder_;

    // Header block under assembly (HEADERS followed by CONTINUATION).
    std::optional<std::uint32_t> cont_stream_;
    std::string cont_block_;
    bool cont_end_stream_ = false;

    mutable std::mutex mu_;  // windows, settings, closed flag
    std::condition_variable cv_;
    bool closed_ = false;
    std::int64_t conn_send_window_ = 65535;
    std::int64_t peer_initial_window_ = 65535;
    std::size_t peer_max_frame_ = 16384;
    std::map<std::uint32_t, std::int64_t> stream_send_window_;
    std::int64_t recv_consumed_ = 0;

    std::mutex write_mu_;
};

// ---- TCP helpers ----------------------------------------------------------------

/// Connects with a timeout. Returns -1 on failure.
int tcp_connect(const std::string& host, int port, std::chrono::milliseconds timeout);

/// Listening socket; `port` 0 picks an ephemeral port, reported in
/// `bound_port`. Throws std::runtime_error.
int tcp_listen(const std::string& host, int port, int& bound_port);

}  // namespace cls::rpc
