#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cls/codec/server_message.hpp"
#include "cls/common/udp.hpp"
#include "cls/sim/config.hpp"
#include "cls/sim/world.hpp"

namespace cls::sim {

/// Receives the world once per cycle, starting with cycle 0.
class ReplaySink {
public:
    virtual ~ReplaySink() = default;
    /// `body_senders`: players that sent a body command during the cycle.
    virtual void record(const SimWorld& world, const std::vector<Event>& events,
                        const std::vector<AgentId>& body_senders) = 0;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    /// Close a tick as soon as every responsive player has sent a command.
    bool fast = false;
    /// Start gate: number of registrations (any role) awaited before cycle 0.
    int expected_agents = 0;
    std::chrono::milliseconds start_timeout{10000};
    /// Upper bound of an accelerated tick; a player that misses it is not
    /// waited for again until it sends.
    std::chrono::milliseconds fast_tick_limit{1000};
};

struct ServerStats {
    int cycles = 0;
    int protocol_errors = 0;
    int rejected_commands = 0;
    std::map<AgentId, int> body_command_cycles;  ///< per player
};

/// UDP front end of the simulator: one thread runs registration, the tick
/// loop and all sends.
class SimServer {
public:
    SimServer(SimConfig cfg, ServerOptions opts, ReplaySink* replay = nullptr);
    ~SimServer();

    /// Binds the player, trainer and coach sockets. Ports configured as 0
    /// pick ephemeral ports. Throws std::system_error.
    void bind();
    std::uint16_t player_port() const { return player_port_; }
    std::uint16_t trainer_port() const { return trainer_port_; }
    std::uint16_t coach_port() const { return coach_port_; }

    /// Runs the match to TimeOver or until stop().
    void run();
    /// Thread-safe.
    void stop() { stop_.store(true); }

    /// Number of agents registered so far. Thread-safe.
    int registered() const { return registered_.load(); }

    const SimWorld& world() const { return world_; }
    ServerStats stats() const;

private:
    struct Client;

    void poll_once(std::chrono::milliseconds timeout);
    void handle(int port_kind, UdpSocket::Datagram d);
    void handle_init(int port_kind, const Endpoint& from, const codec::InitCmd& init);
    void send(const Client& c, const codec::ServerMessage& m);
    void send_error(int port_kind, const Endpoint& to, const std::string& text);
    void send_observations(const std::vector<codec::HearMsg>& hears);
    void tick();
    bool all_players_ready() const;

    SimConfig cfg_;
    ServerOptions opts_;
    ReplaySink* replay_;
    SimWorld world_;

    UdpSocket sockets_[3];
    std::uint16_t player_port_ = 0, trainer_port_ = 0, coach_port_ = 0;

    std::map<Endpoint, std::unique_ptr<Client>> clients_;
    std::vector<AgentCommand> pending_;

    std::atomic<bool> stop_{false};
    std::atomic<int> registered_{0};
    mutable std::mutex stats_mu_;
    ServerStats stats_;
};

}  // namespace cls::sim
