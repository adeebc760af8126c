#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cls/proxy/compile.hpp"
#include "cls/rpc/grpc.hpp"

namespace cls::proxy {

class ServerUnreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The sim server answered the init with an error.
class RegistrationRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AgentConfig {
    std::string team_name;
    AgentRole role = AgentRole::Player;
    bool goalie = false;

    std::string server_host = "127.0.0.1";
    int server_port = 6000;  ///< the port for this role

    std::string playmaker_host = "127.0.0.1";
    int playmaker_port = rpc::kDefaultPort;  ///< 0: no playmaker, always fall back
    /// Overrides the playmaker endpoint when set.
    std::shared_ptr<rpc::Channel> channel;

    std::chrono::milliseconds deadline = rpc::kDefaultDeadline;
    std::chrono::milliseconds registration_deadline{1000};
    int cycle_ms = 100;
    FallbackPolicy fallback = FallbackPolicy::Standard;

    /// Silence from the sim server for this long ends the loop.
    std::chrono::milliseconds server_timeout{5000};
    /// Line-delimited JSON, one line per decided cycle. Empty: no log.
    std::filesystem::path log_path;
    bool debug = false;

    /// Throws std::invalid_argument.
    void validate() const;
};

struct AgentStats {
    AgentRole role = AgentRole::Player;
    Side side = Side::Left;
    int unum = 0;
    int register_id = 0;

    int cycles = 0;           ///< cycles with an observation to act on
    int command_cycles = 0;   ///< cycles in which a command datagram went out
    int playmaker_cycles = 0; ///< body command taken from the playmaker reply
    int fallback_cycles = 0;
    int preprocess_cycles = 0;
    int timeouts = 0;
    int channel_down = 0;
    int remote_errors = 0;
    int schema_violations = 0;
    int rpc_calls = 0;
    double latency_sum_ms = 0.0;
    double latency_max_ms = 0.0;
    bool playmaker_registered = false;
    int protocol_errors = 0;  ///< undecodable datagrams and server error replies
    std::string end_reason;   ///< "time_over", "server_silent", "stopped"
};

/// One agent's loop: registers with the sim server and the playmaker, then
/// each cycle folds observations into its world model, asks the playmaker
/// under a deadline and sends the compiled commands in a single datagram.
/// Returns after time_over, server silence or `stop`.
/// Throws ServerUnreachable or RegistrationRefused during registration.
AgentStats run_agent(const AgentConfig& cfg, const std::atomic<bool>* stop = nullptr);

struct TeamConfig {
    std::string team_name;
    std::string server_host = "127.0.0.1";
    int player_port = 6000;
    int coach_port = 6002;
    int trainer_port = 6001;
    int players = 11;
    bool coach = true;
    bool trainer = false;

    std::string playmaker_host = "127.0.0.1";
    int playmaker_port = rpc::kDefaultPort;
    /// Per agent (index 0.. in launch order); overrides the endpoint when set.
    std::function<std::shared_ptr<rpc::Channel>(int index)> channel_for;

    std::chrono::milliseconds deadline = rpc::kDefaultDeadline;
    std::chrono::milliseconds stagger{10};
    std::chrono::milliseconds server_timeout{5000};
    int cycle_ms = 100;
    FallbackPolicy fallback = FallbackPolicy::Standard;
    std::filesystem::path log_dir;  ///< empty: no logs
};

struct TeamResult {
    std::vector<AgentStats> agents;  ///< agents that registered
    std::vector<std::string> errors; ///< one per agent that failed to start
};

/// Runs the players, then the coach and trainer, each on its own thread with
/// init sends staggered. An agent that cannot register is reported in
/// `errors`; its siblings keep running. Returns when all loops end.
TeamResult run_team(const TeamConfig& cfg, const std::atomic<bool>* stop = nullptr);

}  // namespace cls::proxy
