#include <google/protobuf/util/message_differencer.h>
#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "cls/rpc/contract.hpp"
#include "cls/rpc/grpc.hpp"
#include "cls/rpc/hpack.hpp"
#include "cls/rpc/http2.hpp"
#include "cls/sim/config.hpp"
#include "world_gen.hpp"

using namespace cls;
using namespace cls::rpc;
using google::protobuf::util::MessageDifferencer;
using namespace std::chrono_literals;

namespace {

std::string unhex(std::string_view h) {
    std::string out;
    for (std::size_t i = 0; i + 1 < h.size(); i += 2) out.push_back(static_cast<char>(std::stoi(std::string(h.substr(i, 2)), nullptr, 16)));
    return out;
}

}  // namespace

// ---- HPACK (RFC 7541 Appendix C vectors) ----------------------------------------

TEST(Hpack, HuffmanVector) {
    EXPECT_EQ(huffman_encode("www.example.com"), unhex("f1e3c2e5f23a6ba0ab90f4ff"));
    EXPECT_EQ(huffman_decode(unhex("f1e3c2e5f23a6ba0ab90f4ff")), "www.example.com");
}

TEST(Hpack, RequestSequenceWithDynamicTable) {
    for (const auto& blocks :
         {std::vector<std::string>{"828684410f7777772e6578616d706c652e636f6d", "828684be58086e6f2d6361636865",
                                   "828785bf400a637573746f6d2d6b65790c637573746f6d2d76616c7565"},
          std::vector<std::string>{"828684418cf1e3c2e5f23a6ba0ab90f4ff", "828684be5886a8eb10649cbf",
                                   "828785bf408825a849e95ba97d7f8925a849e95bb8e8b4bf"}}) {
        HpackDecoder d;
        const auto h1 = d.decode(unhex(blocks[0]));
        EXPECT_EQ(h1, (HeaderList{{":method", "GET"}, {":scheme", "http"}, {":path", "/"}, {":authority", "www.example.com"}}));
        EXPECT_EQ(d.table_size(), 57u);
        const auto h2 = d.decode(unhex(blocks[1]));
        EXPECT_EQ(h2.back(), (Header{"cache-control", "no-cache"}));
        EXPECT_EQ(d.table_size(), 110u);
        const auto h3 = d.decode(unhex(blocks[2]));
        EXPECT_EQ(h3, (HeaderList{{":method", "GET"},
                                  {":scheme", "https"},
                                  {":path", "/index.html"},
                                  {":authority", "www.example.com"},
                                  {"custom-key", "custom-value"}}));
        EXPECT_EQ(d.table_size(), 164u);
    }
}

TEST(Hpack, EncoderRoundTrip) {
    testsupport::Gen g(5);
    for (int k = 0; k < 500; ++k) {
        HeaderList h;
        const int n = g.integer(0, 8);
        for (int i = 0; i < n; ++i) h.emplace_back(g.coin() ? ":path" : g.identifier(12), g.printable(200));
        HpackDecoder d;
        EXPECT_EQ(d.decode(HpackEncoder(false).encode(h)), h);
        EXPECT_EQ(d.decode(HpackEncoder(true).encode(h)), h);
        EXPECT_EQ(d.table_entries(), 0u);
    }
}

TEST(Hpack, HuffmanRoundTripAllBytes) {
    testsupport::Gen g(6);
    for (int k = 0; k < 500; ++k) {
        std::string s;
        const int n = g.integer(0, 64);
        for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(g.integer(0, 255)));
        ASSERT_EQ(huffman_decode(huffman_encode(s)), s);
    }
}

TEST(Hpack, RejectsBadInputWithoutCrashing) {
    EXPECT_THROW(huffman_decode(unhex("00")), HpackError);  // zero padding
    HpackDecoder d;
    EXPECT_THROW(d.decode(unhex("80")), HpackError);  // index 0
    EXPECT_THROW(d.decode(unhex("ff00")), HpackError);  // index past tables
    EXPECT_THROW(d.decode(unhex("410f77")), HpackError);  // truncated string
    testsupport::Gen g(7);
    for (int k = 0; k < 20000; ++k) {
        std::string s;
        const int n = g.integer(0, 40);
        for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(g.integer(0, 255)));
        HpackDecoder fresh;
        try {
            fresh.decode(s);
        } catch (const HpackError&) {
        }
    }
}

TEST(Http2, FrameRoundTrip) {
    Frame f{FrameType::Headers, h2flag::kEndHeaders | h2flag::kEndStream, 7, "abc"};
    const auto wire = encode_frame(f);
    ASSERT_EQ(wire.size(), kFrameHeaderSize + 3);
    std::size_t used = 0;
    EXPECT_FALSE(parse_frame(std::string_view(wire).substr(0, 10), used));
    const auto back = parse_frame(wire, used);
    ASSERT_TRUE(back);
    EXPECT_EQ(used, wire.size());
    EXPECT_EQ(back->type, FrameType::Headers);
    EXPECT_EQ(back->flags, f.flags);
    EXPECT_EQ(back->stream, 7u);
    EXPECT_EQ(back->payload, "abc");
}

TEST(Grpc, MessageFraming) {
    EXPECT_EQ(grpc_frame("hi"), std::string("\0\0\0\0\x02hi", 7));
    EXPECT_EQ(grpc_unframe(grpc_frame("")), "");
    EXPECT_EQ(grpc_unframe(std::string("\x01\0\0\0\0", 5)), std::nullopt);  // compressed
    EXPECT_EQ(grpc_unframe(std::string("\0\0\0\0\x03hi", 7)), std::nullopt);
}

TEST(Grpc, MethodPaths) {
    EXPECT_EQ(method_path(Method::GetPlayerActions), "/clsgame.Game/GetPlayerActions");
    for (auto m : {Method::SendInitMessage, Method::SendServerParams, Method::SendPlayerParams, Method::SendPlayerType,
                   Method::GetPlayerActions, Method::GetCoachActions, Method::GetTrainerActions})
        EXPECT_EQ(method_from_path(method_path(m)), m);
    EXPECT_EQ(method_from_path("/clsgame.Game/Nope"), std::nullopt);
    // The generated descriptor is the source of truth for method names.
    const auto* svc = pb::InitMessage::descriptor()->file()->FindServiceByName("Game");
    ASSERT_NE(svc, nullptr);
    ASSERT_EQ(svc->method_count(), 7);
    for (int i = 0; i < 7; ++i) EXPECT_TRUE(method_from_path("/clsgame.Game/" + svc->method(i)->name())) << i;
}

// ---- marshaling -------------------------------------------------------------------

TEST(Marshal, FreshStateHasNothingSeen) {
    const auto ws = world::make_world_state(AgentRole::Player, "A");
    const auto s = marshal_state(ws, {AgentRole::Player, 3, false});
    EXPECT_EQ(s.world().cycle(), 0);
    EXPECT_EQ(s.world().ball().confidence(), 0.0);
    EXPECT_FALSE(s.world().ball().seen());
    ASSERT_EQ(s.world().teammates_size(), 11);
    ASSERT_EQ(s.world().opponents_size(), 11);
    for (const auto& p : s.world().teammates()) {
        EXPECT_FALSE(p.seen());
        EXPECT_EQ(p.confidence(), 0.0);
        EXPECT_EQ(p.intercept_cycles(), -1);
    }
    EXPECT_FALSE(s.has_full_world());
    EXPECT_FALSE(s.world().has_ball_displacement());
    EXPECT_EQ(s.register_id(), 3);
}

TEST(Marshal, FullStateCarriesFullWorld) {
    auto ws = world::make_world_state(AgentRole::Player, "A");
    ws.full_state = true;
    ws.ball.last_seen_cycle = 4;
    ws.ball.confidence = 1.0;
    const auto s = marshal_state(ws, {AgentRole::Player, 1, true});
    ASSERT_TRUE(s.has_full_world());
    EXPECT_TRUE(MessageDifferencer::Equals(s.full_world(), s.world()));
    EXPECT_TRUE(s.need_preprocess());
}

TEST(Marshal, UnseenPlayersCarryZeroConfidence) {
    testsupport::Gen g(12);
    for (int k = 0; k < 200; ++k) {
        const auto s = marshal_world(testsupport::random_world_state(g));
        for (const auto& p : s.teammates())
            if (!p.seen()) { ASSERT_EQ(p.confidence(), 0.0); }
        for (const auto& p : s.opponents())
            if (!p.seen()) { ASSERT_EQ(p.confidence(), 0.0); }
    }
}

TEST(Marshal, RoundTripThroughWireIsIdentity) {
    testsupport::Gen g(11);
    for (int k = 0; k < 1000; ++k) {
        const auto role = static_cast<AgentRole>(g.integer(0, 2));
        const auto ws = testsupport::random_world_state(g, role);
        const pb::State sent = marshal_state(ws, {role, g.integer(0, 200), g.coin()});
        pb::State received;
        ASSERT_TRUE(received.ParseFromString(sent.SerializeAsString()));
        ASSERT_TRUE(MessageDifferencer::Equals(sent, received)) << k;
        const auto back = unmarshal_world(received.world(), from_proto(received.agent_type()));
        ASSERT_EQ(back, testsupport::carried_fields(ws)) << k;
        ASSERT_TRUE(MessageDifferencer::Equals(marshal_world(back), sent.world())) << k;
    }
}

TEST(Marshal, Deterministic) {
    testsupport::Gen g(13);
    const auto ws = testsupport::random_world_state(g);
    EXPECT_EQ(marshal_state(ws, {}).SerializeAsString(), marshal_state(ws, {}).SerializeAsString());
}

TEST(Actions, Examples) {
    pb::PlayerActions reply;
    reply.add_actions()->mutable_dash()->set_power(100);
    auto one = unmarshal_player_actions(reply);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(std::get<codec::DashCmd>(one[0]), (codec::DashCmd{100, 0}));

    EXPECT_TRUE(unmarshal_player_actions(pb::PlayerActions{}).empty());

    const std::vector<PlayerAction> mixed = {BodyGoToPoint{{10, 5}, 1.0, 80}, codec::TurnCmd{30}, NeckTurnToBall{},
                                             BodySmartKick{{52.5, 0}, 2.5, 0.1, 1}, codec::SayCmd{"hi"},
                                             BodyInterceptBall{}, codec::KickCmd{50, -20}, DoNothing{}};
    pb::PlayerActions wire;
    ASSERT_TRUE(wire.ParseFromString(marshal_player_actions(mixed).SerializeAsString()));
    EXPECT_EQ(unmarshal_player_actions(wire), mixed);
}

TEST(Actions, SchemaViolations) {
    pb::PlayerActions reply;
    reply.add_actions();  // no variant set
    EXPECT_THROW(unmarshal_player_actions(reply), SchemaViolation);
    pb::PlayerActions nan;
    nan.add_actions()->mutable_turn()->set_moment(std::nan(""));
    EXPECT_THROW(unmarshal_player_actions(nan), SchemaViolation);
    pb::TrainerActions t;
    t.add_actions()->mutable_change_play_mode()->mutable_play_mode()->set_kind(pb::KICK_IN);
    EXPECT_THROW(unmarshal_trainer_actions(t), SchemaViolation);
}

TEST(Actions, TrainerAndCoachRoundTrip) {
    const std::vector<TrainerAction> t = {MoveBall{{1, 2}, {0.5, 0}}, MovePlayer{Side::Right, 9, {-3, 4}, 90},
                                          ChangePlayMode{PlayMode::of(PlayModeKind::KickIn, Side::Left)}, Recover{}};
    EXPECT_EQ(unmarshal_trainer_actions(marshal_trainer_actions(t)), t);
    const std::vector<CoachAction> c = {codec::SayCmd{"go"}, DoNothing{}};
    EXPECT_EQ(unmarshal_coach_actions(marshal_coach_actions(c)), c);
}

TEST(RegisterId, Scheme) {
    EXPECT_EQ(register_id(AgentRole::Player, Side::Left, 7), 7);
    EXPECT_EQ(register_id(AgentRole::Player, Side::Right, 7), 107);
    EXPECT_EQ(register_id(AgentRole::Coach, Side::Left, 0), 0);
    EXPECT_EQ(register_id(AgentRole::Coach, Side::Right, 0), 100);
    EXPECT_EQ(register_id(AgentRole::Trainer, Side::Left, 0), 200);
}

// ---- registration -------------------------------------------------------------

namespace {

CapturedParams captured(const sim::SimConfig& cfg) {
    CapturedParams p;
    p.server = cfg.server_param_message();
    p.player = cfg.player_param_message();
    for (int id = 0; id < cfg.player_types; ++id) p.types[id] = cfg.player_type_message(id);
    return p;
}

}  // namespace

TEST(Registration, DefaultConfigIsFourCallsInOrder) {
    const auto calls = registration_sequence({AgentRole::Player, 5, "A", 5, false}, captured({}));
    ASSERT_EQ(calls.size(), 4u);
    EXPECT_EQ(calls[0].method, Method::SendInitMessage);
    EXPECT_EQ(calls[1].method, Method::SendServerParams);
    EXPECT_EQ(calls[2].method, Method::SendPlayerParams);
    EXPECT_EQ(calls[3].method, Method::SendPlayerType);
    const auto& init = dynamic_cast<const pb::InitMessage&>(*calls[0].request);
    EXPECT_EQ(init.register_id(), 5);
    EXPECT_EQ(init.team_name(), "A");
    EXPECT_EQ(init.version(), kContractVersion);
    const auto& sp = dynamic_cast<const pb::ServerParam&>(*calls[1].request);
    EXPECT_EQ(sp.params().at("ball_decay"), 0.94);
}

TEST(Registration, SevenPlayerTypes) {
    sim::SimConfig cfg;
    cfg.player_types = 7;
    const auto calls = registration_sequence({}, captured(cfg));
    ASSERT_EQ(calls.size(), 3u + 7u);
    for (int i = 0; i < 7; ++i) {
        EXPECT_EQ(calls[3 + static_cast<std::size_t>(i)].method, Method::SendPlayerType);
        EXPECT_EQ(dynamic_cast<const pb::PlayerType&>(*calls[3 + static_cast<std::size_t>(i)].request).id(), i);
    }
}

TEST(Registration, MissingParamsAreRejected) {
    CapturedParams p = captured({});
    p.server.reset();
    EXPECT_THROW(registration_sequence({}, p), MissingPrerequisite);
    p = captured({});
    p.types.clear();
    EXPECT_THROW(registration_sequence({}, p), MissingPrerequisite);
}

TEST(Registration, GateGuardsPerCycleCalls) {
    RegistrationGate gate(1);
    EXPECT_THROW(gate.require_complete(Method::GetPlayerActions), MissingPrerequisite);
    EXPECT_THROW(gate.acknowledge(Method::SendServerParams), MissingPrerequisite);
    gate.acknowledge(Method::SendInitMessage);
    gate.acknowledge(Method::SendServerParams);
    gate.acknowledge(Method::SendPlayerParams);
    EXPECT_THROW(gate.require_complete(Method::GetPlayerActions), MissingPrerequisite);
    gate.acknowledge(Method::SendPlayerType);
    EXPECT_TRUE(gate.complete());
    EXPECT_NO_THROW(gate.require_complete(Method::GetPlayerActions));
}

// ---- transport ------------------------------------------------------------------

namespace {

class TestHandler : public GameHandler {
public:
    std::atomic<int> sleep_ms{0};
    std::atomic<int> inits{0};

    void send_init_message(const pb::InitMessage&) override { ++inits; }
    /// Replies with register_id Say actions, each carrying the cycle.
    pb::PlayerActions get_player_actions(const pb::State& s) override {
        if (int ms = sleep_ms.load()) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        pb::PlayerActions r;
        for (int i = 0; i < s.register_id(); ++i)
            r.add_actions()->mutable_say()->set_text(std::to_string(s.world().cycle()) + std::string(90, 'x'));
        return r;
    }
};

pb::State state_with(int register_id, int cycle) {
    pb::State s;
    s.set_register_id(register_id);
    s.mutable_world()->set_cycle(cycle);
    return s;
}

}  // namespace

TEST(Transport, UnaryCallRoundTrip) {
    TestHandler h;
    GrpcServer server(h, "127.0.0.1", 0);
    server.start();
    GrpcChannel ch("127.0.0.1", server.port());
    pb::Empty empty;
    EXPECT_TRUE(ch.call(Method::SendInitMessage, pb::InitMessage{}, empty, 1000ms).ok());
    EXPECT_EQ(h.inits.load(), 1);
    for (int c = 0; c < 50; ++c) {
        pb::PlayerActions reply;
        const auto r = ch.call(Method::GetPlayerActions, state_with(3, c), reply, 1000ms);
        ASSERT_TRUE(r.ok()) << r.message;
        ASSERT_EQ(reply.actions_size(), 3);
        EXPECT_TRUE(reply.actions(0).say().text().starts_with(std::to_string(c)));
    }
}

TEST(Transport, LargeMessagesCrossFrameAndWindowLimits) {
    TestHandler h;
    GrpcServer server(h, "127.0.0.1", 0);
    server.start();
    GrpcChannel ch("127.0.0.1", server.port());
    pb::PlayerActions reply;
    // About 190 KB of reply: many DATA frames, beyond the 64 KB default window.
    const auto r = ch.call(Method::GetPlayerActions, state_with(2000, 1), reply, 5000ms);
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_EQ(reply.actions_size(), 2000);
    pb::ServerParam big;
    for (int i = 0; i < 20000; ++i) (*big.mutable_params())["k" + std::to_string(i)] = i;
    pb::Empty empty;
    EXPECT_TRUE(ch.call(Method::SendServerParams, big, empty, 5000ms).ok());
}

TEST(Transport, SlowHandlerTimesOutAtDeadline) {
    TestHandler h;
    GrpcServer server(h, "127.0.0.1", 0);
    server.start();
    GrpcChannel ch("127.0.0.1", server.port());
    pb::PlayerActions reply;
    ASSERT_TRUE(ch.call(Method::GetPlayerActions, state_with(1, 0), reply, 1000ms).ok());  // warm connection

    h.sleep_ms = 200;
    for (int i = 0; i < 5; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = ch.call(Method::GetPlayerActions, state_with(1, 10 + i), reply, kDefaultDeadline);
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        EXPECT_EQ(r.status, CallStatus::Timeout);
        EXPECT_NEAR(ms, 70.0, 10.0);
    }
    // Late replies to the cancelled calls must not be taken for this one.
    h.sleep_ms = 0;
    std::this_thread::sleep_for(300ms);
    const auto r = ch.call(Method::GetPlayerActions, state_with(1, 99), reply, 1000ms);
    ASSERT_TRUE(r.ok());
    EXPECT_TRUE(reply.actions(0).say().text().starts_with("99"));
}

TEST(Transport, AbsentServerIsChannelDownWithBackoff) {
    int port = 0;
    {
        TestHandler h;
        GrpcServer probe(h, "127.0.0.1", 0);
        port = probe.port();
    }
    GrpcChannel ch("127.0.0.1", port, 300ms);
    pb::PlayerActions reply;
    const auto r1 = ch.call(Method::GetPlayerActions, state_with(1, 0), reply, kDefaultDeadline);
    EXPECT_EQ(r1.status, CallStatus::ChannelDown);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r2 = ch.call(Method::GetPlayerActions, state_with(1, 0), reply, kDefaultDeadline);
    EXPECT_EQ(r2.status, CallStatus::ChannelDown);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, 5ms);  // backing off, no connect attempt

    TestHandler h;
    GrpcServer server(h, "127.0.0.1", port);
    server.start();
    std::this_thread::sleep_for(350ms);
    EXPECT_TRUE(ch.call(Method::GetPlayerActions, state_with(1, 0), reply, 1000ms).ok());
}

TEST(Transport, ServerLossMidSessionIsChannelDown) {
    TestHandler h;
    auto server = std::make_unique<GrpcServer>(h, "127.0.0.1", 0);
    server->start();
    GrpcChannel ch("127.0.0.1", server->port());
    pb::PlayerActions reply;
    ASSERT_TRUE(ch.call(Method::GetPlayerActions, state_with(1, 0), reply, 1000ms).ok());
    server.reset();
    const auto r = ch.call(Method::GetPlayerActions, state_with(1, 1), reply, kDefaultDeadline);
    EXPECT_EQ(r.status, CallStatus::ChannelDown);
}

TEST(Transport, MalformedRequestIsRemoteError) {
    TestHandler h;
    GrpcServer server(h, "127.0.0.1", 0);
    server.start();
    GrpcChannel ch("127.0.0.1", server.port());
    // proto3 strings must be valid UTF-8; the server's parse rejects this.
    pb::InitMessage bad;
    bad.set_team_name(std::string("\xff\xfe", 2));
    pb::Empty empty;
    const auto r = ch.call(Method::SendInitMessage, bad, empty, 1000ms);
    EXPECT_EQ(r.status, CallStatus::RemoteError);
    EXPECT_EQ(r.grpc_status, grpc_code::kInvalidArgument);
    EXPECT_EQ(h.inits.load(), 0);
    pb::PlayerActions reply;
    EXPECT_TRUE(ch.call(Method::GetPlayerActions, state_with(1, 0), reply, 1000ms).ok());
}

TEST(Transport, ServerSideDeadlineIsTimeout) {
    struct Expired : GameHandler {
        pb::PlayerActions get_player_actions(const pb::State&) override {
            throw RpcError(grpc_code::kDeadlineExceeded, "deadline exceeded");
        }
    } h;
    GrpcServer server(h, "127.0.0.1", 0);
    server.start();
    GrpcChannel ch("127.0.0.1", server.port());
    pb::PlayerActions reply;
    const auto r = ch.call(Method::GetPlayerActions, state_with(1, 0), reply, 1000ms);
    EXPECT_EQ(r.status, CallStatus::Timeout);
    EXPECT_EQ(r.grpc_status, grpc_code::kDeadlineExceeded);
}

TEST(Transport, ConcurrentAgents) {
    TestHandler h;
    GrpcServer server(h, "127.0.0.1", 0);
    server.start();
    std::atomic<int> failures{0};
    std::vector<std::thread> agents;
    for (int a = 0; a < 23; ++a) {
        agents.emplace_back([&, a] {
            GrpcChannel ch("127.0.0.1", server.port());
            for (int c = 0; c < 40; ++c) {
                pb::PlayerActions reply;
                const auto r = ch.call(Method::GetPlayerActions, state_with(1 + a % 3, c), reply, 1000ms);
                if (!r.ok() || reply.actions_size() != 1 + a % 3) ++failures;
            }
        });
    }
    for (auto& t : agents) t.join();
    EXPECT_EQ(failures.load(), 0);
    EXPECT_EQ(server.calls_served(), 23u * 40u);
}
