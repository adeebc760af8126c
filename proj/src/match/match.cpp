#include "cls/match/match.hpp"

#include <thread>

namespace cls::match {

using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

int MatchResult::protocol_errors() const {
    int n = server.protocol_errors;
    for (const auto* t : {&left, &right}) n += t->protocol_errors + t->remote_errors + t->schema_violations;
    return n;
}

int match_exit_code(const MatchResult& r, const MatchConfig& cfg) {
    return r.protocol_errors() > cfg.protocol_error_budget ? kExitProtocolErrors : kExitOk;
}

namespace {

TeamSummary summarize(const TeamSpec& spec, const proxy::TeamResult& r) {
    TeamSummary s;
    s.name = spec.name;
    s.endpoint = spec.endpoint;
    s.agents = static_cast<int>(r.agents.size());
    s.errors = r.errors;
    double latency_sum = 0.0;
    int latency_n = 0;
    for (const auto& a : r.agents) {
        s.rpc_calls += a.rpc_calls;
        s.deadline_misses += a.timeouts;
        s.channel_down += a.channel_down;
        s.remote_errors += a.remote_errors;
        s.schema_violations += a.schema_violations;
        s.protocol_errors += a.protocol_errors;
        s.latency_max_ms = std::max(s.latency_max_ms, a.latency_max_ms);
        latency_sum += a.latency_sum_ms;
        latency_n += a.rpc_calls;
        if (a.role != AgentRole::Player) continue;
        s.player_cycles += a.cycles;
        s.command_cycles += a.command_cycles;
        s.playmaker_cycles += a.playmaker_cycles;
        s.fallback_cycles += a.fallback_cycles;
        s.preprocess_cycles += a.preprocess_cycles;
    }
    s.latency_mean_ms = latency_n ? latency_sum / latency_n : 0.0;
    return s;
}

}  // namespace

MatchResult run_match(const MatchConfig& cfg_in) {
    cfg_in.validate();
    MatchConfig cfg = cfg_in;
    cfg.sim.player_port = cfg.sim.trainer_port = cfg.sim.coach_port = 0;
    const auto t0 = Clock::now();

    std::unique_ptr<BuiltinPlaymaker> builtin;
    std::unique_ptr<rpc::GrpcServer> playmaker;
    if (cfg.left.endpoint == "builtin" || cfg.right.endpoint == "builtin") {
        builtin = std::make_unique<BuiltinPlaymaker>();
        try {
            playmaker = std::make_unique<rpc::GrpcServer>(*builtin, "127.0.0.1", 0);
            playmaker->start();
        } catch (const std::exception& e) {
            throw LaunchFailure("playmaker", e.what());
        }
    }

    std::unique_ptr<ReplayFile> replay;
    if (!cfg.replay_path.empty()) {
        try {
            if (cfg.replay_path.has_parent_path()) std::filesystem::create_directories(cfg.replay_path.parent_path());
            replay = std::make_unique<ReplayFile>(cfg.replay_path, cfg.sim);
        } catch (const std::exception& e) {
            throw LaunchFailure("replay", e.what());
        }
    }

    const int per_team = 11 + (cfg.coaches ? 1 : 0);
    sim::ServerOptions opts;
    opts.fast = cfg.accelerated;
    opts.expected_agents = 2 * per_team;
    opts.start_timeout = cfg.start_timeout;
    sim::SimServer server(cfg.sim, opts, replay.get());
    try {
        server.bind();
    } catch (const std::exception& e) {
        throw LaunchFailure("sim-server", e.what());
    }

    std::exception_ptr sim_error;
    std::thread sim_thread([&] {
        try {
            server.run();
        } catch (...) {
            sim_error = std::current_exception();
        }
    });

    auto team_config = [&](const TeamSpec& spec) {
        proxy::TeamConfig tc;
        tc.team_name = spec.name;
        tc.player_port = server.player_port();
        tc.coach_port = server.coach_port();
        tc.trainer_port = server.trainer_port();
        tc.coach = cfg.coaches;
        if (spec.endpoint == "builtin") {
            tc.playmaker_port = playmaker->port();
        } else if (spec.endpoint == "none") {
            tc.playmaker_port = 0;
        } else {
            const auto ep = parse_endpoint(spec.endpoint);
            tc.playmaker_host = ep.host;
            tc.playmaker_port = ep.port;
        }
        tc.deadline = cfg.deadline;
        tc.cycle_ms = cfg.sim.cycle_ms;
        tc.fallback = cfg.fallback;
        tc.log_dir = cfg.log_dir;
        return tc;
    };

    std::atomic<bool> stop{false};
    proxy::TeamResult left_result, right_result;
    std::thread left_thread([&] { left_result = proxy::run_team(team_config(cfg.left), &stop); });
    // The first team to send an init takes the left side.
    for (auto until = Clock::now() + 2s; server.registered() < 1 && Clock::now() < until;) std::this_thread::sleep_for(1ms);
    std::thread right_thread([&] { right_result = proxy::run_team(team_config(cfg.right), &stop); });

    bool launched = false;
    for (auto until = Clock::now() + cfg.start_timeout; Clock::now() < until;) {
        if (server.registered() >= opts.expected_agents) {
            launched = true;
            break;
        }
        std::this_thread::sleep_for(5ms);
    }
    if (!launched) {
        stop = true;
        server.stop();
    }
    left_thread.join();
    right_thread.join();
    server.stop();
    sim_thread.join();
    if (playmaker) playmaker->stop();
    replay.reset();

    if (!launched) {
        std::string why = std::to_string(server.registered()) + " of " + std::to_string(opts.expected_agents) +
                          " agents registered";
        for (const auto* r : {&left_result, &right_result})
            for (const auto& e : r->errors) why += "; " + e;
        throw LaunchFailure("agents", why);
    }
    if (sim_error) std::rethrow_exception(sim_error);

    MatchResult result;
    result.cycles = server.world().cycle;
    result.score_left = server.world().score_left;
    result.score_right = server.world().score_right;
    result.final_mode = to_wire(server.world().play_mode);
    result.left = summarize(cfg.left, left_result);
    result.right = summarize(cfg.right, right_result);
    result.server = server.stats();
    if (builtin) {
        result.call_log = builtin->call_log();
        result.registration_violations = registration_order_violations(result.call_log, cfg.sim.player_types);
    }
    if (!cfg.replay_path.empty()) result.replay = validate_replay_file(cfg.replay_path);
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
}

}  // namespace cls::match
