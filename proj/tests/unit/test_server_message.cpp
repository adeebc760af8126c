#include <gtest/gtest.h>

#include "cls/codec/error.hpp"
#include "cls/codec/server_message.hpp"

using namespace cls;
using namespace cls::codec;

TEST(ServerMessage, InitMapsFields) {
    auto m = decode_server_message("(init l 7 before_kick_off)");
    EXPECT_EQ(m, ServerMessage(InitMsg{Side::Left, 7, PlayMode::before_kick_off()}));
}

TEST(ServerMessage, SenseBodyZeroSpeed) {
    auto m = decode_server_message("(sense_body 3 (view_mode high normal) (stamina 8000 1) (speed 0 0) (head_angle 0))");
    ASSERT_TRUE(std::holds_alternative<SenseBodyMsg>(m));
    const auto& sb = std::get<SenseBodyMsg>(m);
    EXPECT_EQ(sb.cycle, 3);
    EXPECT_EQ(sb.stamina, 8000);
    EXPECT_EQ(sb.effort, 1);
    EXPECT_EQ(sb.speed_mag, 0);
    EXPECT_EQ(sb.speed_dir, 0);
}

TEST(ServerMessage, SeeKeepsOrderAndOptionalChanges) {
    auto m = decode_server_message("(see 12 ((f c) 10.5 -3) ((b) 4 20 0.1 -2) ((p \"Opp\" 9) 7 -45) ((g r) 60 0))");
    const auto& see = std::get<SeeMsg>(m);
    ASSERT_EQ(see.objects.size(), 4u);
    EXPECT_EQ(see.objects[0].kind, ObjectKind(FlagObject{"f c"}));
    EXPECT_EQ(see.objects[1].dist_change, 0.1);
    EXPECT_EQ(see.objects[2].kind, ObjectKind(PlayerObject{"Opp", 9}));
    EXPECT_EQ(see.objects[3].kind, ObjectKind(GoalObject{Side::Right}));
}

TEST(ServerMessage, Errors) {
    auto kind = [](std::string_view t) {
        try {
            decode_server_message(t);
        } catch (const CodecError& e) {
            return e.kind();
        }
        return ErrorKind::EmptyInput;
    };
    EXPECT_EQ(kind("(teleport 3)"), ErrorKind::UnknownMessageHead);
    EXPECT_EQ(kind("(init l)"), ErrorKind::FieldCountMismatch);
    EXPECT_EQ(kind("(see x)"), ErrorKind::NumericParseFailure);
    EXPECT_EQ(kind("(see -1)"), ErrorKind::OutOfRangeField);
    EXPECT_EQ(kind("(see 1 ((f z z) 1 1))"), ErrorKind::UnknownObject);
    EXPECT_EQ(kind("(see 1 ((b) 1 180))"), ErrorKind::OutOfRangeField);
    EXPECT_EQ(kind("(see 1 ((b) -1 0))"), ErrorKind::OutOfRangeField);
}

TEST(ServerMessage, FullStateIsExact) {
    WorldSnapshot w;
    w.cycle = 42;
    w.play_mode = PlayMode::of(PlayModeKind::KickIn, Side::Right);
    w.score_left = 2;
    w.team_left = "Alpha";
    w.team_right = "Beta Team";
    w.ball = {{0.1 + 0.2, -1.0 / 3.0}, {1e-17, 2.5}};
    w.players.push_back({Side::Left, 1, {-50, 0}, {0, 0}, 0, 0, 8000, 1});
    w.players.push_back({Side::Right, 11, {5.123456789, -20}, {0.3, -0.1}, -179.5, 45, 7123.25, 0.8});
    ServerMessage m = FullStateMsg{w};
    EXPECT_EQ(decode_server_message(encode_server_message(m)), m);
}

TEST(ServerMessage, ParamsRoundTrip) {
    ServerMessage sp = ServerParamMsg{{{"ball_decay", 0.94}, {"kickable_area", 1.085}}};
    EXPECT_EQ(decode_server_message(encode_server_message(sp)), sp);
    ServerMessage pt = PlayerTypeMsg{3, {{"player_speed_max", 1.05}}};
    EXPECT_EQ(decode_server_message(encode_server_message(pt)), pt);
    ServerMessage h = HearMsg{7, "referee", "goal_l_1"};
    EXPECT_EQ(decode_server_message(encode_server_message(h)), h);
}
