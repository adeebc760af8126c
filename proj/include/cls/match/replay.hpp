#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cls/sim/server.hpp"

namespace cls::match {

inline constexpr const char* kReplaySchema = "cls-replay/1";
inline constexpr int kReplayFlushInterval = 100;

class OutOfOrderCycle : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Line-delimited JSON: a header line (schema, config snapshot, team names)
/// written with the first record, then one record per cycle with the full
/// world and the cycle's events. Output is a pure function of its inputs.
class ReplayLog {
public:
    ReplayLog(std::ostream& out, const sim::SimConfig& cfg) : out_(out), cfg_(cfg) {}

    /// Throws OutOfOrderCycle unless the world is the cycle after the last
    /// record (or any cycle for the first).
    void append(const sim::SimWorld& world, const std::vector<sim::Event>& events,
                const std::vector<sim::AgentId>& body_senders = {});
    void flush() { out_.flush(); }

    int records() const { return records_; }
    std::optional<int> last_cycle() const { return last_cycle_; }

private:
    std::ostream& out_;
    sim::SimConfig cfg_;
    int records_ = 0;
    std::optional<int> last_cycle_;
};

void append_replay(ReplayLog& log, const sim::SimWorld& world, const std::vector<sim::Event>& events);

/// Replay sink writing to a file; flushes every kReplayFlushInterval records
/// and on destruction.
class ReplayFile : public sim::ReplaySink {
public:
    ReplayFile(const std::filesystem::path& path, const sim::SimConfig& cfg);
    ~ReplayFile() override;
    void record(const sim::SimWorld& world, const std::vector<sim::Event>& events,
                const std::vector<sim::AgentId>& body_senders) override;
    const ReplayLog& log() const { return log_; }

private:
    std::ofstream file_;
    ReplayLog log_;
};

struct ReplaySummary {
    int records = 0;
    int first_cycle = -1;
    int last_cycle = -1;
    std::string team_left, team_right;
    int score_left = 0, score_right = 0;
    int goals_left = 0, goals_right = 0;  ///< goal events seen
    std::string final_mode;
    std::vector<std::string> errors;  ///< empty when valid
    bool ok() const { return errors.empty(); }
};

/// Checks the schema, consecutive cycles from 0, goal events against the
/// scores, non-decreasing scores and a final time_over record.
ReplaySummary validate_replay(std::istream& in);
ReplaySummary validate_replay_file(const std::filesystem::path& path);

}  // namespace cls::match
