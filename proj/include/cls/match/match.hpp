#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cls/match/playmaker.hpp"
#include "cls/match/replay.hpp"
#include "cls/proxy/agent.hpp"
#include "cls/sim/config.hpp"
#include "cls/sim/server.hpp"

namespace cls::match {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A component could not be started.
class LaunchFailure : public std::runtime_error {
public:
    LaunchFailure(std::string component, const std::string& what)
        : std::runtime_error(component + ": " + what), component_(std::move(component)) {}
    const std::string& component() const { return component_; }

private:
    std::string component_;
};

struct TeamSpec {
    std::string name;
    /// "builtin", "none" (no playmaker) or "host:port".
    std::string endpoint = "builtin";
};

struct MatchConfig {
    sim::SimConfig sim;
    TeamSpec left{"Left", "builtin"};
    TeamSpec right{"Right", "builtin"};
    std::filesystem::path replay_path;
    std::filesystem::path log_dir;
    /// Close each tick as soon as every player has acted.
    bool accelerated = true;
    std::chrono::milliseconds deadline = rpc::kDefaultDeadline;
    bool coaches = true;
    proxy::FallbackPolicy fallback = proxy::FallbackPolicy::Standard;
    int protocol_error_budget = 0;
    std::chrono::milliseconds start_timeout{10000};

    /// Throws ConfigError.
    void validate() const;
};

/// Sets one key, e.g. "sim.half_cycles", "match.seed", "left.endpoint".
/// Throws ConfigError for unknown keys or bad values.
void set_config_value(MatchConfig& cfg, const std::string& key, const std::string& value);

/// Every settable key, "section.name".
std::vector<std::string> config_keys();

/// INI file with sections [match], [sim], [left], [right]. Throws ConfigError.
MatchConfig load_match_config(const std::filesystem::path& path);

struct PlaymakerEndpoint {
    std::string host;
    int port = 0;  ///< 0: none
};

/// "host:port" or "port". Throws ConfigError.
PlaymakerEndpoint parse_endpoint(const std::string& text);

struct TeamSummary {
    std::string name;
    std::string endpoint;
    int agents = 0;
    int player_cycles = 0;
    int command_cycles = 0;
    int playmaker_cycles = 0;
    int fallback_cycles = 0;
    int preprocess_cycles = 0;
    int rpc_calls = 0;
    int deadline_misses = 0;
    int channel_down = 0;
    int remote_errors = 0;
    int schema_violations = 0;
    int protocol_errors = 0;
    double latency_max_ms = 0.0;
    double latency_mean_ms = 0.0;
    std::vector<std::string> errors;

    double deadline_miss_rate() const { return player_cycles ? double(deadline_misses) / player_cycles : 0.0; }
    double command_rate() const { return player_cycles ? double(command_cycles) / player_cycles : 0.0; }
    double fallback_rate() const { return player_cycles ? double(fallback_cycles) / player_cycles : 0.0; }
};

struct MatchResult {
    int cycles = 0;
    int score_left = 0;
    int score_right = 0;
    std::string final_mode;
    TeamSummary left, right;
    sim::ServerStats server;
    std::vector<CallRecord> call_log;  ///< builtin playmaker calls, if used
    int registration_violations = 0;
    std::optional<ReplaySummary> replay;
    double wall_seconds = 0.0;

    /// Server protocol errors plus everything the agents counted as one.
    int protocol_errors() const;
};

/// Starts the sim server, the builtin playmaker if a team uses it and both
/// teams, runs to time_over and collects the results. The replay is
/// validated when written. Throws LaunchFailure.
MatchResult run_match(const MatchConfig& cfg);

/// 0 success, 3 protocol-error budget exceeded.
int match_exit_code(const MatchResult& r, const MatchConfig& cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitLaunchFailure = 2;
inline constexpr int kExitProtocolErrors = 3;

}  // namespace cls::match
