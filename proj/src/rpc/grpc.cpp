#include "cls/rpc/grpc.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cstdlib>
#include <map>

#include "cls/rpc/http2.hpp"

namespace cls::rpc {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethods = {{
    {Method::SendInitMessage, "SendInitMessage"},
    {Method::SendServerParams, "SendServerParams"},
    {Method::SendPlayerParams, "SendPlayerParams"},
    {Method::SendPlayerType, "SendPlayerType"},
    {Method::GetPlayerActions, "GetPlayerActions"},
    {Method::GetCoachActions, "GetCoachActions"},
    {Method::GetTrainerActions, "GetTrainerActions"},
}};

constexpr std::string_view kServicePrefix = "/clsgame.Game/";

template <typename Req, typename Resp, typename F>
int run(std::string_view request, std::string& reply, std::string& error, F&& f) {
    Req req;
    if (!req.ParseFromArray(request.data(), static_cast<int>(request.size()))) {
        error = "malformed request";
        return grpc_code::kInvalidArgument;
    }
    const Resp resp = f(req);
    reply = resp.SerializeAsString();
    return grpc_code::kOk;
}

std::string find_header(const HeaderList& h, std::string_view name) {
    for (const auto& [k, v] : h)
        if (k == name) return v;
    return {};
}

}  // namespace

std::string_view method_name(Method m) {
    for (const auto& [k, n] : kMethods)
        if (k == m) return n;
    return "?";
}

std::string method_path(Method m) { return std::string(kServicePrefix) + std::string(method_name(m)); }

std::optional<Method> method_from_path(std::string_view path) {
    if (!path.starts_with(kServicePrefix)) return std::nullopt;
    path.remove_prefix(kServicePrefix.size());
    for (const auto& [k, n] : kMethods)
        if (n == path) return k;
    return std::nullopt;
}

std::string_view call_status_name(CallStatus s) {
    switch (s) {
        case CallStatus::Ok: return "ok";
        case CallStatus::Timeout: return "timeout";
        case CallStatus::ChannelDown: return "channel_down";
        case CallStatus::RemoteError: return "remote_error";
    }
    return "?";
}

std::string grpc_frame(std::string_view message) {
    std::string out;
    out.reserve(5 + message.size());
    const auto n = static_cast<std::uint32_t>(message.size());
    out.push_back('\0');
    out.push_back(static_cast<char>(n >> 24));
    out.push_back(static_cast<char>(n >> 16));
    out.push_back(static_cast<char>(n >> 8));
    out.push_back(static_cast<char>(n));
    out += message;
    return out;
}

std::optional<std::string> grpc_unframe(std::string_view body) {
    if (body.size() < 5 || body[0] != '\0') return std::nullopt;
    const std::size_t n = (static_cast<std::size_t>(static_cast<std::uint8_t>(body[1])) << 24) |
                          (static_cast<std::size_t>(static_cast<std::uint8_t>(body[2])) << 16) |
                          (static_cast<std::size_t>(static_cast<std::uint8_t>(body[3])) << 8) |
                          static_cast<std::size_t>(static_cast<std::uint8_t>(body[4]));
    if (body.size() != 5 + n) return std::nullopt;
    return std::string(body.substr(5));
}

int dispatch(GameHandler& h, Method m, std::string_view request, std::string& reply, std::string& error) {
    try {
        switch (m) {
            case Method::SendInitMessage:
                return run<pb::InitMessage, pb::Empty>(request, reply, error, [&](const auto& r) {
                    h.send_init_message(r);
                    return pb::Empty{};
                });
            case Method::SendServerParams:
                return run<pb::ServerParam, pb::Empty>(request, reply, error, [&](const auto& r) {
                    h.send_server_params(r);
                    return pb::Empty{};
                });
            case Method::SendPlayerParams:
                return run<pb::PlayerParam, pb::Empty>(request, reply, error, [&](const auto& r) {
                    h.send_player_params(r);
                    return pb::Empty{};
                });
            case Method::SendPlayerType:
                return run<pb::PlayerType, pb::Empty>(request, reply, error, [&](const auto& r) {
                    h.send_player_type(r);
                    return pb::Empty{};
                });
            case Method::GetPlayerActions:
                return run<pb::State, pb::PlayerActions>(request, reply, error,
                                                 [&](const auto& r) { return h.get_player_actions(r); });
            case Method::GetCoachActions:
                return run<pb::State, pb::CoachActions>(request, reply, error,
                                                [&](const auto& r) { return h.get_coach_actions(r); });
            case Method::GetTrainerActions:
                return run<pb::State, pb::TrainerActions>(request, reply, error,
                                                  [&](const auto& r) { return h.get_trainer_actions(r); });
        }
    } catch (const RpcError& e) {
        error = e.what();
        return e.code();
    } catch (const std::exception& e) {
        error = e.what();
        return grpc_code::kInternal;
    }
    error = "unknown method";
    return grpc_code::kUnimplemented;
}

// ---- server ---------------------------------------------------------------------

GrpcServer::GrpcServer(GameHandler& handler, const std::string& host, int port) : handler_(handler) {
    listen_fd_ = tcp_listen(host, port, port_);
}

GrpcServer::~GrpcServer() { stop(); }

void GrpcServer::start() { acceptor_ = std::thread([this] { accept_loop(); }); }

void GrpcServer::stop() {
    if (stopping_.exchange(true)) return;
    if (acceptor_.joinable()) acceptor_.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
    std::vector<std::thread> conns;
    {
        std::lock_guard lk(mu_);
        for (auto& w : sessions_)
            if (auto s = w.lock()) s->shutdown();
        conns.swap(connections_);
    }
    for (auto& t : conns) t.join();
    std::unique_lock lk(mu_);
    idle_.wait(lk, [&] { return active_handlers_ == 0; });
}

void GrpcServer::accept_loop() {
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 100) <= 0) continue;
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto session = std::make_shared<Http2Session>(fd, Http2Session::Role::Server, true);
        std::lock_guard lk(mu_);
        sessions_.push_back(session);
        connections_.emplace_back([this, session] { serve(session); });
    }
}

void GrpcServer::serve(std::shared_ptr<Http2Session> session) {
    if (!session->start(SteadyClock::now() + std::chrono::seconds(5))) return;

    struct Pending {
        std::string path;
        std::string body;
        std::shared_ptr<std::atomic<bool>> cancelled = std::make_shared<std::atomic<bool>>(false);
    };
    std::map<std::uint32_t, Pending> streams;

    auto launch = [&](std::uint32_t id, Pending p) {
        {
            std::lock_guard lk(mu_);
            ++active_handlers_;
        }
        std::thread([this, session, id, p = std::move(p)] {
            static const HeaderList kResponseHeaders = {{":status", "200"}, {"content-type", "application/grpc"}};
            const auto method = method_from_path(p.path);
            const auto message = grpc_unframe(p.body);
            std::string reply, error;
            int code = grpc_code::kUnimplemented;
            if (!method) {
                error = "unknown method " + p.path;
            } else if (!message) {
                code = grpc_code::kInternal;
                error = "bad message framing";
            } else {
                code = dispatch(handler_, *method, *message, reply, error);
            }
            if (!p.cancelled->load()) {
                if (code == grpc_code::kOk) {
                    session->send_headers(id, kResponseHeaders, false);
                    session->send_data(id, grpc_frame(reply), false, SteadyClock::now() + std::chrono::seconds(5));
                    session->send_headers(id, {{"grpc-status", "0"}}, true);
                } else {
                    HeaderList h = kResponseHeaders;
                    h.emplace_back("grpc-status", std::to_string(code));
                    h.emplace_back("grpc-message", error);
                    session->send_headers(id, h, true);
                }
                session->forget_stream(id);
                ++calls_;
            }
            std::lock_guard lk(mu_);
            if (--active_handlers_ == 0) idle_.notify_all();
        }).detach();
    };

    H2Event ev;
    while (!stopping_) {
        const auto r = session->next_event(ev, SteadyClock::now() + std::chrono::milliseconds(200));
        if (r == Http2Session::Wait::Closed) break;
        if (r == Http2Session::Wait::Timeout) continue;
        switch (ev.kind) {
            case H2Event::Kind::Headers: {
                auto& p = streams[ev.stream];
                if (p.path.empty()) p.path = find_header(ev.headers, ":path");
                break;
            }
            case H2Event::Kind::Data:
                if (auto it = streams.find(ev.stream); it != streams.end()) it->second.body += ev.data;
                break;
            case H2Event::Kind::Reset:
                if (auto it = streams.find(ev.stream); it != streams.end()) {
                    it->second.cancelled->store(true);
                    streams.erase(it);
                }
                break;
            case H2Event::Kind::GoAway:
                break;
        }
        if (ev.end_stream && (ev.kind == H2Event::Kind::Headers || ev.kind == H2Event::Kind::Data)) {
            if (auto it = streams.find(ev.stream); it != streams.end()) {
                launch(ev.stream, std::move(it->second));
                streams.erase(it);
            }
        }
    }
    for (auto& [_, p] : streams) p.cancelled->store(true);
    session->shutdown();
}

// ---- client ---------------------------------------------------------------------

GrpcChannel::GrpcChannel(std::string host, int port, std::chrono::milliseconds backoff)
    : host_(std::move(host)), port_(port), backoff_(backoff) {}

GrpcChannel::~GrpcChannel() = default;

void GrpcChannel::disconnect() {
    session_.reset();
    retry_at_ = {};
}

CallResult GrpcChannel::fail_down(std::string why) {
    session_.reset();
    retry_at_ = SteadyClock::now() + backoff_;
    return {CallStatus::ChannelDown, grpc_code::kUnavailable, std::move(why), {}};
}

CallResult GrpcChannel::call(Method m, const google::protobuf::Message& request, google::protobuf::Message& response,
                             std::chrono::milliseconds timeout) {
    const auto start = SteadyClock::now();
    const auto deadline = start + timeout;
    auto finish = [&](CallResult r) {
        r.latency = std::chrono::duration_cast<std::chrono::microseconds>(SteadyClock::now() - start);
        return r;
    };

    if (!session_) {
        if (start < retry_at_) return finish({CallStatus::ChannelDown, grpc_code::kUnavailable, "backing off", {}});
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SteadyClock::now());
        const int fd = tcp_connect(host_, port_, std::max(left, std::chrono::milliseconds(1)));
        if (fd < 0) return finish(fail_down("connect failed"));
        session_ = std::make_unique<Http2Session>(fd, Http2Session::Role::Client, false);
        next_stream_ = 1;
        if (!session_->start(deadline)) return finish(fail_down("handshake failed"));
    }

    const std::uint32_t stream = next_stream_;
    next_stream_ += 2;
    session_->send_headers(stream,
                           {{":method", "POST"},
                            {":scheme", "http"},
                            {":path", method_path(m)},
                            {":authority", host_ + ":" + std::to_string(port_)},
                            {"content-type", "application/grpc"},
                            {"te", "trailers"},
                            {"grpc-timeout", std::to_string(std::max<long long>(1, timeout.count())) + "m"}},
                           false);
    if (!session_->send_data(stream, grpc_frame(request.SerializeAsString()), true, deadline)) {
        if (session_->closed()) return finish(fail_down("connection lost"));
        session_->send_rst(stream, h2error::kCancel);
        return finish({CallStatus::Timeout, grpc_code::kDeadlineExceeded, "deadline exceeded", {}});
    }

    std::string body;
    std::optional<int> status;
    std::string message;
    bool goaway = false;
    H2Event ev;
    for (;;) {
        const auto r = session_->next_event(ev, deadline);
        if (r == Http2Session::Wait::Closed) return finish(fail_down("connection lost"));
        if (r == Http2Session::Wait::Timeout) {
            session_->send_rst(stream, h2error::kCancel);
            return finish({CallStatus::Timeout, grpc_code::kDeadlineExceeded, "deadline exceeded", {}});
        }
        if (ev.kind == H2Event::Kind::GoAway) {
            if (ev.stream < stream) return finish(fail_down("server going away"));
            goaway = true;
            continue;
        }
        if (ev.stream != stream) continue;  // late reply to a cancelled call
        if (ev.kind == H2Event::Kind::Reset) {
            session_->forget_stream(stream);
            return finish({CallStatus::RemoteError, grpc_code::kCancelled, "stream reset by server", {}});
        }
        if (ev.kind == H2Event::Kind::Headers) {
            if (auto s = find_header(ev.headers, "grpc-status"); !s.empty()) {
                status = std::atoi(s.c_str());
                message = find_header(ev.headers, "grpc-message");
            }
        } else {
            body += ev.data;
        }
        if (ev.end_stream) break;
    }
    session_->forget_stream(stream);
    if (goaway) session_.reset();

    if (!status) return finish({CallStatus::RemoteError, grpc_code::kInternal, "missing grpc-status", {}});
    // The server may enforce the propagated grpc-timeout a moment before our own timer.
    if (*status == grpc_code::kDeadlineExceeded) return finish({CallStatus::Timeout, *status, message, {}});
    if (*status != grpc_code::kOk) return finish({CallStatus::RemoteError, *status, message, {}});
    const auto payload = grpc_unframe(body);
    if (!payload || !response.ParseFromString(*payload))
        return finish({CallStatus::RemoteError, grpc_code::kInternal, "malformed response", {}});
    return finish({CallStatus::Ok, grpc_code::kOk, {}, {}});
}

}  // namespace cls::rpc
