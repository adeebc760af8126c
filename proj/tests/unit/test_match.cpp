#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cls/match/match.hpp"
#include "cls/sim/world.hpp"
#include "cls/world/model.hpp"

using namespace cls;
using namespace cls::match;
using namespace std::chrono_literals;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("cls_test_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// A short replay: cycles 0..n, a goal for the right side at `goal_at`, then
/// time_over on the last record.
std::string short_replay(int n, int goal_at) {
    sim::SimConfig cfg;
    sim::SimWorld w = sim::make_world(cfg);
    w.team_left = "A";
    w.team_right = "B";
    w.add_player(Side::Left, 1, cfg);
    std::ostringstream out;
    ReplayLog log(out, cfg);
    for (int c = 0; c <= n; ++c) {
        w.cycle = c;
        std::vector<sim::Event> events;
        if (c == goal_at) {
            ++w.score_right;
            events.push_back({sim::EventKind::Goal, {AgentRole::Player, Side::Right, 0}, "1"});
        }
        if (c == n) w.set_mode(PlayMode::time_over());
        log.append(w, events);
    }
    return out.str();
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string join(const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s;
}

ReplaySummary check(const std::string& text) {
    std::istringstream in(text);
    return validate_replay(in);
}

rpc::pb::State state_for(const world::WorldState& ws) { return rpc::marshal_state(ws, {AgentRole::Player, 1, false}); }

world::WorldState player_at(int unum, Vec2 pos) {
    world::WorldState ws = world::make_world_state(AgentRole::Player, "A");
    ws.self_unum = unum;
    ws.self.pos = pos;
    ws.self.valid = true;
    ws.play_mode = PlayMode::play_on();
    ws.teammates[static_cast<std::size_t>(unum - 1)].pos = pos;
    ws.teammates[static_cast<std::size_t>(unum - 1)].confidence = 1.0;
    ws.teammates[static_cast<std::size_t>(unum - 1)].last_seen_cycle = 0;
    return ws;
}

world::WorldState with_ball(world::WorldState ws, Vec2 pos) {
    ws.ball.pos = pos;
    ws.ball.confidence = 1.0;
    ws.ball.last_seen_cycle = 0;
    ws.intercept = world::build_intercept_table(ws);
    return ws;
}

MatchConfig short_match(int half_cycles) {
    MatchConfig cfg;
    cfg.sim.half_cycles = half_cycles;
    return cfg;
}

}  // namespace

// ---- replay -----------------------------------------------------------------------

TEST(Replay, FirstRecord) {
    sim::SimConfig cfg;
    std::ostringstream out;
    ReplayLog log(out, cfg);
    sim::SimWorld w = sim::make_world(cfg);
    append_replay(log, w, {});
    EXPECT_EQ(log.records(), 1);
    EXPECT_EQ(log.last_cycle(), 0);
    const auto lines = lines_of(out.str());
    ASSERT_EQ(lines.size(), 2u);  // header + record
    EXPECT_NE(lines[0].find("cls-replay/1"), std::string::npos);
}

TEST(Replay, CycleGapIsOutOfOrder) {
    sim::SimConfig cfg;
    std::ostringstream out;
    ReplayLog log(out, cfg);
    sim::SimWorld w = sim::make_world(cfg);
    append_replay(log, w, {});
    w.cycle = 2;
    EXPECT_THROW(append_replay(log, w, {}), OutOfOrderCycle);
    w.cycle = 0;
    EXPECT_THROW(append_replay(log, w, {}), OutOfOrderCycle);
    w.cycle = 1;
    EXPECT_NO_THROW(append_replay(log, w, {}));
}

TEST(Replay, SixThousandAppendsReparse) {
    sim::SimConfig cfg;
    const auto path = temp_path("6000.jsonl");
    {
        ReplayFile file(path, cfg);
        sim::SimWorld w = sim::make_world(cfg);
        w.team_left = "A";
        w.team_right = "B";
        for (int i = 1; i <= 11; ++i) {
            w.add_player(Side::Left, i, cfg);
            w.add_player(Side::Right, i, cfg);
        }
        for (int c = 0; c < 6000; ++c) {
            w.cycle = c;
            if (c == 5999) w.set_mode(PlayMode::time_over());
            file.record(w, {}, {});
        }
    }
    const auto s = validate_replay_file(path);
    EXPECT_TRUE(s.ok()) << (s.errors.empty() ? "" : s.errors[0]);
    EXPECT_EQ(s.records, 6000);
    EXPECT_EQ(s.first_cycle, 0);
    EXPECT_EQ(s.last_cycle, 5999);
    EXPECT_EQ(s.team_left, "A");
    std::filesystem::remove(path);
}

TEST(Replay, FlushesAtLeastEveryHundredRecords) {
    sim::SimConfig cfg;
    const auto path = temp_path("flush.jsonl");
    ReplayFile file(path, cfg);
    sim::SimWorld w = sim::make_world(cfg);
    for (int c = 0; c < 150; ++c) {
        w.cycle = c;
        file.record(w, {}, {});
    }
    // Still open: what is on disk is what has been flushed.
    EXPECT_GE(lines_of(slurp(path)).size(), 1u + 100u);
    std::filesystem::remove(path);
}

TEST(Replay, DeterministicBytes) { EXPECT_EQ(short_replay(50, 20), short_replay(50, 20)); }

TEST(Replay, ValidationAcceptsWellFormed) {
    const auto s = check(short_replay(30, 10));
    EXPECT_TRUE(s.ok());
    EXPECT_EQ(s.records, 31);
    EXPECT_EQ(s.score_right, 1);
    EXPECT_EQ(s.goals_right, 1);
    EXPECT_EQ(s.final_mode, "time_over");
}

TEST(Replay, ValidationRejectsDefects) {
    const auto good = lines_of(short_replay(30, 10));

    auto gap = good;
    gap.erase(gap.begin() + 5);
    EXPECT_FALSE(check(join(gap)).ok());

    auto truncated = good;
    truncated.pop_back();
    EXPECT_FALSE(check(join(truncated)).ok());

    auto no_goal_event = good;
    const auto goal_line = std::size_t{1 + 10};
    const auto pos = no_goal_event[goal_line].find("\"kind\":\"goal\"");
    ASSERT_NE(pos, std::string::npos);
    no_goal_event[goal_line].replace(pos, 13, "\"kind\":\"mode\"");
    EXPECT_FALSE(check(join(no_goal_event)).ok());

    auto bad_schema = good;
    bad_schema[0].replace(bad_schema[0].find("cls-replay/1"), 12, "cls-replay/9");
    EXPECT_FALSE(check(join(bad_schema)).ok());

    auto garbage = good;
    garbage[7] = "{not json";
    EXPECT_FALSE(check(join(garbage)).ok());

    EXPECT_FALSE(check("").ok());
}

// ---- builtin playmaker ----------------------------------------------------------

TEST(BuiltinPolicy, KickableBallShootsAtGoal) {
    const auto ws = with_ball(player_at(9, {30, 5}), {30.5, 5.2});
    const auto a = builtin_playmaker_decide(state_for(ws));
    ASSERT_FALSE(a.empty());
    const auto* k = std::get_if<rpc::BodySmartKick>(&a[0]);
    ASSERT_TRUE(k);
    EXPECT_EQ(k->target, (Vec2{52.5, 0}));
    EXPECT_EQ(k->first_speed, 2.5);
}

TEST(BuiltinPolicy, FastestInterceptsAndWatchesBall) {
    const auto ws = with_ball(player_at(9, {30, 5}), {25, 5});
    ASSERT_EQ(ws.intercept.fastest_ours, 9);
    const auto a = builtin_playmaker_decide(state_for(ws));
    EXPECT_EQ(a, (std::vector<rpc::PlayerAction>{rpc::BodyInterceptBall{}, rpc::NeckTurnToBall{}}));
}

TEST(BuiltinPolicy, OthersHoldShiftedFormation) {
    auto ws = with_ball(player_at(4, {0, 0}), {20, 10});
    ws.teammates[8].pos = {20, 9};
    ws.teammates[8].confidence = 1.0;
    ws.teammates[8].last_seen_cycle = 0;
    ws.intercept = world::build_intercept_table(ws);
    ASSERT_EQ(ws.intercept.fastest_ours, 9);
    const auto a = builtin_playmaker_decide(state_for(ws));
    ASSERT_EQ(a.size(), 2u);
    const auto& g = std::get<rpc::BodyGoToPoint>(a[0]);
    const Vec2 want = sim::home_position(4) + Vec2{6, 3};
    EXPECT_NEAR(g.target.x, want.x, 1e-12);
    EXPECT_NEAR(g.target.y, want.y, 1e-12);
    EXPECT_EQ(g.dist_thr, 1.0);
    EXPECT_EQ(g.max_power, 80.0);
    EXPECT_EQ(a[1], rpc::PlayerAction(rpc::NeckTurnToBall{}));
}

TEST(BuiltinPolicy, UnknownBallUsesUnshiftedFormation) {
    const auto ws = player_at(7, {0, 0});
    const auto a = builtin_playmaker_decide(state_for(ws));
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(std::get<rpc::BodyGoToPoint>(a[0]).target, sim::home_position(7));
    EXPECT_EQ(formation_point(7, std::nullopt), sim::home_position(7));
}

TEST(BuiltinPolicy, FormationIsFourThreeThree) {
    int defenders = 0, midfielders = 0, forwards = 0;
    for (int u = 2; u <= 11; ++u) {
        const double x = formation_point(u, std::nullopt).x;
        defenders += x < -30;
        midfielders += x > -30 && x < -10;
        forwards += x > -10 && x < 0;
    }
    EXPECT_EQ(defenders, 4);
    EXPECT_EQ(midfielders, 3);
    EXPECT_EQ(forwards, 3);
    EXPECT_LT(formation_point(1, std::nullopt).x, -45);
}

TEST(BuiltinPlaymakerService, EnforcesRegistrationOrder) {
    BuiltinPlaymaker pm;
    rpc::pb::State st;
    st.set_register_id(7);
    try {
        pm.get_player_actions(st);
        FAIL() << "unregistered call served";
    } catch (const rpc::RpcError& e) {
        EXPECT_EQ(e.code(), rpc::grpc_code::kFailedPrecondition);
    }
    rpc::pb::InitMessage init;
    init.set_register_id(7);
    pm.send_init_message(init);
    rpc::pb::PlayerParam pp;
    pp.set_register_id(7);
    pp.set_player_types(1);
    EXPECT_THROW(pm.send_player_params(pp), rpc::RpcError);  // server params first

    pm.send_init_message(init);
    rpc::pb::ServerParam sp;
    sp.set_register_id(7);
    pm.send_server_params(sp);
    pm.send_player_params(pp);
    rpc::pb::PlayerType pt;
    pt.set_register_id(7);
    pm.send_player_type(pt);
    EXPECT_NO_THROW(pm.get_player_actions(st));
    EXPECT_EQ(pm.refused_calls(), 2);
    EXPECT_EQ(registration_order_violations(pm.call_log(), 1), 2);
}

TEST(RegistrationLog, CountsViolationsPerAgent) {
    using rpc::Method;
    const std::vector<CallRecord> ok = {{Method::SendInitMessage, 1},  {Method::SendInitMessage, 2},
                                        {Method::SendServerParams, 1}, {Method::SendPlayerParams, 1},
                                        {Method::SendServerParams, 2}, {Method::SendPlayerType, 1},
                                        {Method::GetPlayerActions, 1}, {Method::SendPlayerParams, 2},
                                        {Method::SendPlayerType, 2},   {Method::GetCoachActions, 2}};
    EXPECT_EQ(registration_order_violations(ok, 1), 0);
    auto bad = ok;
    bad.insert(bad.begin() + 2, {Method::GetPlayerActions, 2});
    EXPECT_EQ(registration_order_violations(bad, 1), 1);
    EXPECT_EQ(registration_order_violations(ok, 2), 2);  // one type short for both agents
}

// ---- config -------------------------------------------------------------------------

TEST(Config, SampleFileLoads) {
    const auto cfg = load_match_config(CLS_SOURCE_DIR "/configs/match.ini");
    EXPECT_EQ(cfg.sim.seed, 1u);
    EXPECT_EQ(cfg.left.endpoint, "builtin");
    EXPECT_EQ(cfg.right.name, "Right");
    EXPECT_EQ(cfg.sim.half_cycles, 3000);
    EXPECT_EQ(cfg.deadline, 70ms);
    EXPECT_TRUE(cfg.accelerated);
    EXPECT_EQ(cfg.sim.observation_mode, sim::ObservationMode::See);
}

TEST(Config, EveryKeyIsSettable) {
    const auto keys = config_keys();
    EXPECT_GT(keys.size(), 30u);
    for (const auto& k : keys) EXPECT_NE(k.find('.'), std::string::npos) << k;
    MatchConfig cfg;
    set_config_value(cfg, "match.seed", "42");
    set_config_value(cfg, "sim.observation_mode", "fullstate");
    set_config_value(cfg, "right.endpoint", "10.0.0.2:50051");
    set_config_value(cfg, "match.fallback", "scan");
    EXPECT_EQ(cfg.sim.seed, 42u);
    EXPECT_EQ(cfg.sim.observation_mode, sim::ObservationMode::FullState);
    EXPECT_EQ(cfg.fallback, proxy::FallbackPolicy::Scan);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, Rejections) {
    MatchConfig cfg;
    EXPECT_THROW(set_config_value(cfg, "sim.nope", "1"), ConfigError);
    EXPECT_THROW(set_config_value(cfg, "sim.ball_decay", "fast"), ConfigError);
    EXPECT_THROW(set_config_value(cfg, "match.seed", "-1"), ConfigError);
    EXPECT_THROW(set_config_value(cfg, "match.accelerated", "maybe"), ConfigError);

    auto same_names = cfg;
    same_names.right.name = same_names.left.name;
    EXPECT_THROW(same_names.validate(), ConfigError);
    auto long_name = cfg;
    long_name.left.name = "ABCDEFGHIJKLMNOP";
    EXPECT_THROW(long_name.validate(), ConfigError);
    auto slow = cfg;
    slow.deadline = 100ms;
    EXPECT_THROW(slow.validate(), ConfigError);
    auto bad_sim = cfg;
    bad_sim.sim.ball_decay = 1.5;
    EXPECT_THROW(bad_sim.validate(), ConfigError);
    auto bad_endpoint = cfg;
    bad_endpoint.right.endpoint = "host:99999";
    EXPECT_THROW(bad_endpoint.validate(), ConfigError);

    const auto path = temp_path("bad.ini");
    std::ofstream(path) << "[match]\nseed = x\n";
    EXPECT_THROW(load_match_config(path), ConfigError);
    std::ofstream(path) << "[match\n";
    EXPECT_THROW(load_match_config(path), ConfigError);
    std::filesystem::remove(path);
}

TEST(Config, Endpoints) {
    EXPECT_EQ(parse_endpoint("example.org:50051").host, "example.org");
    EXPECT_EQ(parse_endpoint("example.org:50051").port, 50051);
    EXPECT_EQ(parse_endpoint("7000").host, "127.0.0.1");
    EXPECT_THROW(parse_endpoint(":80"), ConfigError);
    EXPECT_THROW(parse_endpoint("h:0"), ConfigError);
    EXPECT_THROW(parse_endpoint("h:port"), ConfigError);
}

// ---- full matches --------------------------------------------------------------------

TEST(Match, SameSeedSameReplayBytes) {
    auto cfg = short_match(300);
    cfg.sim.seed = 3;
    cfg.replay_path = temp_path("det_a.jsonl");
    const auto a = run_match(cfg);
    cfg.replay_path = temp_path("det_b.jsonl");
    const auto b = run_match(cfg);
    ASSERT_TRUE(a.replay && b.replay);
    EXPECT_TRUE(a.replay->ok());
    EXPECT_EQ(a.replay->records, 601);
    EXPECT_EQ(a.cycles, 600);
    EXPECT_EQ(a.final_mode, "time_over");
    EXPECT_EQ(a.score_left, b.score_left);
    EXPECT_EQ(a.score_right, b.score_right);
    EXPECT_EQ(slurp(temp_path("det_a.jsonl")), slurp(temp_path("det_b.jsonl")));
    EXPECT_EQ(a.protocol_errors(), 0);
    EXPECT_EQ(a.registration_violations, 0);
    EXPECT_EQ(match_exit_code(a, cfg), kExitOk);
    // Two full teams against one endpoint, all within the deadline.
    EXPECT_EQ(a.left.deadline_misses + a.right.deadline_misses, 0);
    EXPECT_EQ(a.left.agents + a.right.agents, 24);
    std::filesystem::remove(temp_path("det_a.jsonl"));
    std::filesystem::remove(temp_path("det_b.jsonl"));
}

TEST(Match, OneBodyCommandPerPlayerPerCycle) {
    auto cfg = short_match(100);
    const auto r = run_match(cfg);
    EXPECT_EQ(r.server.rejected_commands, 0);
    ASSERT_EQ(r.server.body_command_cycles.size(), 22u);
    for (const auto& [agent, n] : r.server.body_command_cycles) {
        EXPECT_LE(n, r.cycles + 1);
        EXPECT_GE(n, r.cycles * 99 / 100);
    }
}

TEST(Match, UnreachableRightEndpointStillCompletes) {
    auto cfg = short_match(100);
    cfg.right.endpoint = "127.0.0.1:9";
    cfg.replay_path = temp_path("down.jsonl");
    const auto r = run_match(cfg);
    EXPECT_EQ(r.final_mode, "time_over");
    ASSERT_TRUE(r.replay);
    EXPECT_TRUE(r.replay->ok());
    EXPECT_EQ(r.right.playmaker_cycles, 0);
    EXPECT_EQ(r.right.fallback_cycles + r.right.preprocess_cycles, r.right.player_cycles);
    EXPECT_EQ(r.right.command_cycles, r.right.player_cycles);
    EXPECT_GT(r.right.channel_down, 0);
    EXPECT_GT(r.left.playmaker_cycles, 0);
    EXPECT_EQ(r.left.channel_down, 0);
    EXPECT_EQ(r.protocol_errors(), 0);
    std::filesystem::remove(cfg.replay_path);
}

TEST(Match, UnwritableReplayIsLaunchFailure) {
    auto cfg = short_match(10);
    cfg.replay_path = "/proc/cls-no-such-dir/replay.jsonl";
    try {
        run_match(cfg);
        FAIL() << "expected LaunchFailure";
    } catch (const LaunchFailure& e) {
        EXPECT_EQ(e.component(), "replay");
    }
}

TEST(Match, ProtocolErrorBudgetSetsExitCode) {
    MatchConfig cfg;
    MatchResult r;
    EXPECT_EQ(match_exit_code(r, cfg), kExitOk);
    r.server.protocol_errors = 1;
    EXPECT_EQ(match_exit_code(r, cfg), kExitProtocolErrors);
    cfg.protocol_error_budget = 1;
    EXPECT_EQ(match_exit_code(r, cfg), kExitOk);
}
