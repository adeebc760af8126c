// clsoccer: run matches, servers, teams and the builtin playmaker; check replays.

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cls/match/match.hpp"

using namespace cls;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

json team_json(const match::TeamSummary& t) {
    return {{"name", t.name},
            {"endpoint", t.endpoint},
            {"agents", t.agents},
            {"player_cycles", t.player_cycles},
            {"command_rate", t.command_rate()},
            {"fallback_rate", t.fallback_rate()},
            {"deadline_miss_rate", t.deadline_miss_rate()},
            {"deadline_misses", t.deadline_misses},
            {"channel_down", t.channel_down},
            {"rpc_calls", t.rpc_calls},
            {"latency_mean_ms", t.latency_mean_ms},
            {"latency_max_ms", t.latency_max_ms},
            {"errors", t.errors}};
}

json result_json(const match::MatchResult& r) {
    json j = {{"cycles", r.cycles},
              {"score", {r.score_left, r.score_right}},
              {"final_mode", r.final_mode},
              {"left", team_json(r.left)},
              {"right", team_json(r.right)},
              {"protocol_errors", r.protocol_errors()},
              {"rejected_commands", r.server.rejected_commands},
              {"registration_violations", r.registration_violations},
              {"wall_seconds", r.wall_seconds}};
    if (r.replay) j["replay"] = {{"records", r.replay->records}, {"valid", r.replay->ok()}, {"errors", r.replay->errors}};
    return j;
}

struct ConfigFlags {
    std::string config_path;
    std::vector<std::string> sets;

    void add(CLI::App* app) {
        app->add_option("-c,--config", config_path, "INI match configuration")->check(CLI::ExistingFile);
        app->add_option("--set", sets, "Override a key, e.g. --set sim.half_cycles=300");
    }

    match::MatchConfig load() const {
        match::MatchConfig cfg = config_path.empty() ? match::MatchConfig{} : match::load_match_config(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw match::ConfigError("--set expects key=value: " + s);
            match::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        return cfg;
    }
};

int run_match_cmd(const ConfigFlags& flags, const std::optional<std::uint64_t>& seed, const std::string& replay,
                  const std::string& left, const std::string& right, bool realtime, const std::string& log_dir) {
    match::MatchConfig cfg = flags.load();
    if (seed) cfg.sim.seed = *seed;
    if (!replay.empty()) cfg.replay_path = replay;
    if (!left.empty()) cfg.left.endpoint = left;
    if (!right.empty()) cfg.right.endpoint = right;
    if (realtime) cfg.accelerated = false;
    if (!log_dir.empty()) cfg.log_dir = log_dir;
    cfg.validate();

    match::MatchResult r;
    try {
        r = match::run_match(cfg);
    } catch (const match::LaunchFailure& e) {
        std::cerr << "launch failure: " << e.what() << "\n";
        return match::kExitLaunchFailure;
    }
    std::cout << result_json(r).dump(2) << "\n";
    if (r.replay && !r.replay->ok()) std::cerr << "replay failed validation\n";
    return match::match_exit_code(r, cfg);
}

int run_server_cmd(const ConfigFlags& flags, const std::string& host, int port, int trainer_port, int coach_port,
                   bool fast, int expect, const std::string& replay) {
    match::MatchConfig cfg = flags.load();
    cfg.sim.player_port = port;
    cfg.sim.trainer_port = trainer_port;
    cfg.sim.coach_port = coach_port;
    std::unique_ptr<match::ReplayFile> sink;
    if (!replay.empty()) sink = std::make_unique<match::ReplayFile>(replay, cfg.sim);
    sim::ServerOptions opts;
    opts.host = host;
    opts.fast = fast;
    opts.expected_agents = expect;
    opts.start_timeout = std::chrono::hours(24);
    sim::SimServer server(cfg.sim, opts, sink.get());
    try {
        server.bind();
    } catch (const std::exception& e) {
        std::cerr << "cannot bind: " << e.what() << "\n";
        return match::kExitLaunchFailure;
    }
    std::cerr << "sim server on " << host << " player " << server.player_port() << " trainer "
              << server.trainer_port() << " coach " << server.coach_port() << "\n";
    std::thread watcher([&] {
        while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server.stop();
    });
    server.run();
    g_interrupted = true;
    watcher.join();
    const auto st = server.stats();
    std::cout << json{{"cycles", st.cycles},
                      {"score", {server.world().score_left, server.world().score_right}},
                      {"protocol_errors", st.protocol_errors},
                      {"rejected_commands", st.rejected_commands}}
                     .dump()
              << "\n";
    return match::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soccer simulation proxy, server and match runner"};
    app.require_subcommand(1);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    // run-match
    auto* rm = app.add_subcommand("run-match", "Run a full match with both teams and the builtin playmaker");
    ConfigFlags rm_flags;
    rm_flags.add(rm);
    std::optional<std::uint64_t> rm_seed;
    std::string rm_replay, rm_left, rm_right, rm_logs;
    bool rm_realtime = false;
    rm->add_option("--seed", rm_seed, "Match seed");
    rm->add_option("--replay", rm_replay, "Replay output path");
    rm->add_option("--left", rm_left, "Left playmaker: builtin, none or host:port");
    rm->add_option("--right", rm_right, "Right playmaker: builtin, none or host:port");
    rm->add_flag("--realtime", rm_realtime, "Tick every cycle_ms instead of accelerating");
    rm->add_option("--log-dir", rm_logs, "Per-agent JSONL logs");

    // run-server
    auto* rs = app.add_subcommand("run-server", "Run the sim server alone");
    ConfigFlags rs_flags;
    rs_flags.add(rs);
    std::string rs_host = "127.0.0.1", rs_replay;
    int rs_port = 6000, rs_trainer = 6001, rs_coach = 6002, rs_expect = 0;
    bool rs_fast = false;
    rs->add_option("--host", rs_host);
    rs->add_option("--port", rs_port, "Player port");
    rs->add_option("--trainer-port", rs_trainer);
    rs->add_option("--coach-port", rs_coach);
    rs->add_flag("--fast", rs_fast, "Close ticks once every player has acted");
    rs->add_option("--expect", rs_expect, "Registrations to wait for before kick-off");
    rs->add_option("--replay", rs_replay, "Replay output path");

    // run-team
    auto* rt = app.add_subcommand("run-team", "Connect a team of proxy agents to a sim server");
    proxy::TeamConfig tc;
    std::string rt_playmaker = "127.0.0.1:50051", rt_fallback = "standard";
    int rt_deadline = 70;
    bool rt_no_coach = false;
    std::string rt_logs;
    rt->add_option("--team", tc.team_name, "Team name")->required();
    rt->add_option("--host", tc.server_host, "Sim server host");
    rt->add_option("--port", tc.player_port, "Player port");
    rt->add_option("--coach-port", tc.coach_port);
    rt->add_option("--trainer-port", tc.trainer_port);
    rt->add_option("--players", tc.players)->check(CLI::Range(0, 11));
    rt->add_flag("--no-coach", rt_no_coach);
    rt->add_flag("--trainer", tc.trainer, "Also run a trainer agent");
    rt->add_option("--playmaker", rt_playmaker, "host:port or none");
    rt->add_option("--deadline-ms", rt_deadline);
    rt->add_option("--cycle-ms", tc.cycle_ms);
    rt->add_option("--fallback", rt_fallback, "standard or scan");
    rt->add_option("--log-dir", rt_logs);

    // run-playmaker
    auto* rp = app.add_subcommand("run-playmaker", "Serve the builtin playmaker over gRPC");
    std::string rp_host = "127.0.0.1";
    int rp_port = rpc::kDefaultPort;
    rp->add_option("--host", rp_host);
    rp->add_option("--port", rp_port);

    // validate-replay
    auto* vr = app.add_subcommand("validate-replay", "Check a replay file");
    std::string vr_path;
    vr->add_option("replay", vr_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rm->parsed())
            return run_match_cmd(rm_flags, rm_seed, rm_replay, rm_left, rm_right, rm_realtime, rm_logs);
        if (rs->parsed())
            return run_server_cmd(rs_flags, rs_host, rs_port, rs_trainer, rs_coach, rs_fast, rs_expect, rs_replay);
        if (rt->parsed()) {
            tc.coach = !rt_no_coach;
            tc.deadline = std::chrono::milliseconds(rt_deadline);
            tc.log_dir = rt_logs;
            auto fb = proxy::fallback_policy_from_name(rt_fallback);
            if (!fb) throw match::ConfigError("unknown fallback policy " + rt_fallback);
            tc.fallback = *fb;
            if (rt_playmaker == "none") {
                tc.playmaker_port = 0;
            } else {
                const auto ep = match::parse_endpoint(rt_playmaker);
                tc.playmaker_host = ep.host;
                tc.playmaker_port = ep.port;
            }
            const auto r = proxy::run_team(tc, &g_interrupted);
            for (const auto& e : r.errors) std::cerr << e << "\n";
            json agents = json::array();
            for (const auto& a : r.agents)
                agents.push_back({{"role", role_name(a.role)},
                                  {"unum", a.unum},
                                  {"cycles", a.cycles},
                                  {"commands", a.command_cycles},
                                  {"fallback", a.fallback_cycles},
                                  {"timeouts", a.timeouts},
                                  {"end", a.end_reason}});
            std::cout << agents.dump(2) << "\n";
            return r.agents.empty() ? match::kExitLaunchFailure : match::kExitOk;
        }
        if (rp->parsed()) {
            match::BuiltinPlaymaker handler;
            rpc::GrpcServer server(handler, rp_host, rp_port);
            server.start();
            std::cerr << "builtin playmaker on " << rp_host << ":" << server.port() << "\n";
            while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
            server.stop();
            return match::kExitOk;
        }
        if (vr->parsed()) {
            const auto s = match::validate_replay_file(vr_path);
            std::cout << json{{"records", s.records},
                              {"last_cycle", s.last_cycle},
                              {"score", {s.score_left, s.score_right}},
                              {"final_mode", s.final_mode},
                              {"valid", s.ok()},
                              {"errors", s.errors}}
                             .dump(2)
                      << "\n";
            return s.ok() ? 0 : 1;
        }
    } catch (const match::ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return match::kExitLaunchFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return match::kExitLaunchFailure;
    }
    return 0;
}
