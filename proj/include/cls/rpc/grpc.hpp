#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "game.pb.h"

namespace cls::rpc {

namespace pb = ::clsgame;

class Http2Session;

enum class Method {
    SendInitMessage,
    SendServerParams,
    SendPlayerParams,
    SendPlayerType,
    GetPlayerActions,
    GetCoachActions,
    GetTrainerActions,
};

std::string_view method_name(Method m);
/// "/clsgame.Game/<name>"
std::string method_path(Method m);
std::optional<Method> method_from_path(std::string_view path);

inline constexpr std::chrono::milliseconds kDefaultDeadline{70};
inline constexpr std::chrono::milliseconds kReconnectBackoff{500};
inline constexpr int kDefaultPort = 50051;

/// gRPC status codes used here.
namespace grpc_code {
inline constexpr int kOk = 0;
inline constexpr int kCancelled = 1;
inline constexpr int kInvalidArgument = 3;
inline constexpr int kDeadlineExceeded = 4;
inline constexpr int kFailedPrecondition = 9;
inline constexpr int kUnimplemented = 12;
inline constexpr int kInternal = 13;
inline constexpr int kUnavailable = 14;
}  // namespace grpc_code

/// Length-prefixed message: flag byte 0, 4-byte big-endian length, payload.
std::string grpc_frame(std::string_view message);
/// Exactly one uncompressed message; nullopt otherwise.
std::optional<std::string> grpc_unframe(std::string_view body);

/// Thrown by a handler to answer with a specific gRPC status. Any other
/// exception becomes INTERNAL.
class RpcError : public std::runtime_error {
public:
    RpcError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

/// Server-side implementation of the Game service. Handlers may run
/// concurrently for different connections.
class GameHandler {
public:
    virtual ~GameHandler() = default;
    virtual void send_init_message(const pb::InitMessage&) {}
    virtual void send_server_params(const pb::ServerParam&) {}
    virtual void send_player_params(const pb::PlayerParam&) {}
    virtual void send_player_type(const pb::PlayerType&) {}
    virtual pb::PlayerActions get_player_actions(const pb::State&) { return {}; }
    virtual pb::CoachActions get_coach_actions(const pb::State&) { return {}; }
    virtual pb::TrainerActions get_trainer_actions(const pb::State&) { return {}; }
};

/// Decodes `request`, runs the handler and encodes the reply. Returns a gRPC
/// status code; on failure `error` holds a message.
int dispatch(GameHandler& handler, Method m, std::string_view request, std::string& reply, std::string& error);

/// gRPC over cleartext HTTP/2. One thread per connection reads; each
/// request runs on its own thread so a slow handler never stalls the
/// connection.
class GrpcServer {
public:
    /// Binds immediately; port 0 picks an ephemeral port. Throws on failure.
    GrpcServer(GameHandler& handler, const std::string& host, int port);
    ~GrpcServer();
    GrpcServer(const GrpcServer&) = delete;
    GrpcServer& operator=(const GrpcServer&) = delete;

    int port() const { return port_; }
    void start();
    void stop();
    std::uint64_t calls_served() const { return calls_.load(); }

private:
    void accept_loop();
    void serve(std::shared_ptr<Http2Session> session);

    GameHandler& handler_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> calls_{0};
    std::thread acceptor_;

    std::mutex mu_;
    std::condition_variable idle_;
    std::vector<std::thread> connections_;
    std::vector<std::weak_ptr<Http2Session>> sessions_;
    int active_handlers_ = 0;
};

enum class CallStatus { Ok, Timeout, ChannelDown, RemoteError };
std::string_view call_status_name(CallStatus s);

struct CallResult {
    CallStatus status = CallStatus::Ok;
    int grpc_status = 0;
    std::string message;
    std::chrono::microseconds latency{0};
    bool ok() const { return status == CallStatus::Ok; }
};

/// Client side of the Game service. Calls are sequential.
class Channel {
public:
    virtual ~Channel() = default;
    virtual CallResult call(Method m, const google::protobuf::Message& request, google::protobuf::Message& response,
                            std::chrono::milliseconds deadline) = 0;
};

/// Lazily connecting gRPC client. A call that cannot reach the server
/// returns ChannelDown and blocks reconnect attempts for the backoff period;
/// a call that outlives its deadline is cancelled with RST_STREAM and
/// returns Timeout. Replies to cancelled streams are discarded by stream id.
class GrpcChannel : public Channel {
public:
    GrpcChannel(std::string host, int port, std::chrono::milliseconds backoff = kReconnectBackoff);
    ~GrpcChannel() override;

    CallResult call(Method m, const google::protobuf::Message& request, google::protobuf::Message& response,
                    std::chrono::milliseconds deadline) override;

    bool connected() const { return session_ != nullptr; }
    /// Drops the connection; the next call reconnects without backoff.
    void disconnect();

private:
    CallResult fail_down(std::string why);

    std::string host_;
    int port_;
    std::chrono::milliseconds backoff_;
    std::unique_ptr<Http2Session> session_;
    std::uint32_t next_stream_ = 1;
    std::chrono::steady_clock::time_point retry_at_{};
};

}  // namespace cls::rpc
