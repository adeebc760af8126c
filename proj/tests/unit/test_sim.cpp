#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cls/codec/server_message.hpp"
#include "cls/common/landmarks.hpp"
#include "cls/sim/observation.hpp"
#include "cls/sim/world.hpp"

using namespace cls;
using namespace cls::sim;
using codec::Command;

namespace {

AgentId player(Side s, int unum) { return {AgentRole::Player, s, unum}; }

SimWorld play_on_world(const SimConfig& cfg) {
    SimWorld w = make_world(cfg);
    w.team_left = "A";
    w.team_right = "B";
    w.set_mode(PlayMode::play_on());
    return w;
}

}  // namespace

TEST(Config, DefaultsValidate) {
    SimConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_DOUBLE_EQ(cfg.kickable_area(), 1.085);
    cfg.ball_decay = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Step, DashFromRest) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    auto& p = w.add_player(Side::Left, 1, cfg);
    p.pos = {0, 0};
    step_simulation(w, {{player(Side::Left, 1), codec::DashCmd{100, 0}}}, cfg);
    const auto* q = w.find(Side::Left, 1);
    EXPECT_NEAR(q->pos.x, 0.6, 1e-12);
    EXPECT_NEAR(q->pos.y, 0.0, 1e-12);
    EXPECT_NEAR(q->vel.x, 0.24, 1e-12);
    EXPECT_EQ(q->stamina, 8000.0 - 100.0 + 45.0);
    EXPECT_EQ(w.cycle, 1);
}

TEST(Step, DashDirectionIsDiscretized) {
    EXPECT_EQ(discretize_dash_dir(30), 45);
    EXPECT_EQ(discretize_dash_dir(-100), -90);
    EXPECT_EQ(discretize_dash_dir(170), -180);
    EXPECT_EQ(discretize_dash_dir(-22), 0);
}

TEST(Step, BallSpeedClampedBeforeMotion) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.ball = {{0, 0}, {3.5, 0}};
    step_simulation(w, {}, cfg);
    EXPECT_NEAR(w.ball.pos.x, 3.0, 1e-12);
    EXPECT_NEAR(w.ball.vel.x, 3.0 * 0.94, 1e-12);
}

TEST(Step, KickExample) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    auto& p = w.add_player(Side::Left, 1, cfg);
    p.pos = {0, 0};
    p.body_dir = 0;
    w.ball = {{0.5, 0}, {0, 0}};
    step_simulation(w, {{player(Side::Left, 1), codec::KickCmd{100, 0}}}, cfg);

    // Independent evaluation: power 100, rate 0.027, no angular loss, centre
    // distance 0.5 over kickable area 0.3 + 0.085 + 0.7.
    const double kickable = 0.3 + 0.085 + 0.7;
    const double accel = 100.0 * 0.027 * (1.0 - 0.0 - 0.25 * 0.5 / kickable);
    EXPECT_NEAR(accel, 2.38894, 1e-5);
    EXPECT_NEAR(w.ball.pos.x, 0.5 + accel, 1e-12);
    EXPECT_NEAR(w.ball.vel.x, accel * 0.94, 1e-12);
    EXPECT_NEAR(w.ball.pos.y, 0.0, 1e-12);
    EXPECT_EQ(w.last_touch, Side::Left);
}

TEST(Step, KickOutOfReachHasNoEffect) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.add_player(Side::Left, 1, cfg).pos = {0, 0};
    w.ball = {{1.2, 0}, {0, 0}};
    auto r = step_simulation(w, {{player(Side::Left, 1), codec::KickCmd{100, 0}}}, cfg);
    EXPECT_EQ(w.ball.pos, Vec2(1.2, 0));
    EXPECT_EQ(r.body_applied.size(), 1u);
}

TEST(Step, TurnScalesWithSpeed) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    auto& p = w.add_player(Side::Left, 1, cfg);
    p.body_dir = 0;
    p.vel = {0.2, 0};
    step_simulation(w, {{player(Side::Left, 1), codec::TurnCmd{60}}}, cfg);
    EXPECT_NEAR(w.find(Side::Left, 1)->body_dir, 60.0 / (1.0 + 5.0 * 0.2), 1e-12);
}

TEST(Step, SecondBodyCommandRejected) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.add_player(Side::Left, 1, cfg);
    auto r = step_simulation(w,
                             {{player(Side::Left, 1), codec::TurnCmd{10}},
                              {player(Side::Left, 1), codec::DashCmd{50, 0}},
                              {player(Side::Left, 1), codec::TurnNeckCmd{20}}},
                             cfg);
    ASSERT_EQ(r.events.size(), 1u);
    EXPECT_EQ(r.events[0].kind, EventKind::MultipleBodyCommands);
    EXPECT_EQ(r.events[0].detail, "dash");
    EXPECT_EQ(w.find(Side::Left, 1)->neck_dir, 20);
}

TEST(Step, MoveOnlyBeforeKickOff) {
    SimConfig cfg;
    SimWorld w = make_world(cfg);
    w.add_player(Side::Right, 2, cfg);
    step_simulation(w, {{player(Side::Right, 2), codec::MoveCmd{-10, 5}}}, cfg);
    EXPECT_EQ(w.find(Side::Right, 2)->pos, Vec2(10, -5));
    w.set_mode(PlayMode::play_on());
    auto r = step_simulation(w, {{player(Side::Right, 2), codec::MoveCmd{-20, 5}}}, cfg);
    ASSERT_EQ(r.events.size(), 1u);
    EXPECT_EQ(r.events[0].kind, EventKind::IllegalCommandForPlayMode);
}

TEST(Step, DeadBallKickByEntitledTeamResumesPlay) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.set_mode(PlayMode::of(PlayModeKind::KickIn, Side::Right));
    w.add_player(Side::Left, 1, cfg).pos = {0.5, 0};
    w.add_player(Side::Right, 1, cfg).pos = {-0.5, 0};
    w.ball = {};
    auto r = step_simulation(w, {{player(Side::Left, 1), codec::KickCmd{100, 0}}}, cfg);
    EXPECT_EQ(r.events.at(0).kind, EventKind::IllegalCommandForPlayMode);
    EXPECT_EQ(w.ball.pos, Vec2(0, 0));
    r = step_simulation(w, {{player(Side::Right, 1), codec::KickCmd{50, 180}}}, cfg);
    EXPECT_EQ(w.play_mode, PlayMode::play_on());
    EXPECT_GT(w.ball.pos.x, 0.0);
}

TEST(Step, TrainerCommands) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.add_player(Side::Left, 4, cfg).stamina = 10;
    const AgentId trainer{AgentRole::Trainer, Side::Left, 0};
    codec::TrainerMoveCmd mb{codec::BallTarget{}, 10, 5, 1.0, 0.0, std::nullopt};
    codec::TrainerMoveCmd mp{codec::PlayerTarget{Side::Left, 4}, -3, 2, std::nullopt, std::nullopt, 90.0};
    step_simulation(w,
                    {{trainer, mb}, {trainer, mp}, {trainer, codec::RecoverCmd{}},
                     {trainer, codec::ChangeModeCmd{PlayMode::of(PlayModeKind::GoalKick, Side::Left)}}},
                    cfg);
    EXPECT_EQ(w.play_mode, PlayMode::of(PlayModeKind::GoalKick, Side::Left));
    EXPECT_EQ(w.ball.pos, Vec2(10, 5));  // frozen by the dead-ball mode
    EXPECT_EQ(w.find(Side::Left, 4)->pos, Vec2(-3, 2));
    EXPECT_EQ(w.find(Side::Left, 4)->body_dir, 90);
    EXPECT_EQ(w.find(Side::Left, 4)->stamina, cfg.stamina_max);
}

TEST(Step, ClampsHoldUnderRandomCommands) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    for (int u = 1; u <= 11; ++u) {
        w.add_player(Side::Left, u, cfg);
        w.add_player(Side::Right, u, cfg);
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pw(-100, 100), ang(-180, 179.999);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int c = 0; c < 2000; ++c) {
        std::vector<AgentCommand> cmds;
        for (const auto& p : w.players) {
            Command cmd;
            switch (pick(rng)) {
                case 0: cmd = codec::DashCmd{pw(rng), ang(rng)}; break;
                case 1: cmd = codec::TurnCmd{ang(rng)}; break;
                case 2: cmd = codec::KickCmd{pw(rng), ang(rng)}; break;
                default: cmd = codec::TurnNeckCmd{ang(rng)}; break;
            }
            cmds.push_back({player(p.side, p.unum), cmd});
        }
        const int before = w.cycle;
        step_simulation(w, cmds, cfg);
        ASSERT_EQ(w.cycle, before + 1);
        ASSERT_LE(w.ball.vel.length(), cfg.ball_speed_max + 1e-9);
        ASSERT_LE(std::abs(w.ball.pos.x), 57.5 + 1e-9);
        ASSERT_LE(std::abs(w.ball.pos.y), 39.0 + 1e-9);
        for (const auto& p : w.players) {
            ASSERT_LE(p.vel.length(), cfg.player_speed_max + 1e-9);
            ASSERT_GE(p.stamina, 0.0);
            ASSERT_LE(p.stamina, cfg.stamina_max);
            ASSERT_LE(std::abs(p.neck_dir), cfg.max_neck_angle);
            ASSERT_LE(std::abs(p.pos.x), 57.5 + 1e-9);
            ASSERT_LE(std::abs(p.pos.y), 39.0 + 1e-9);
        }
        if (w.ball.pos.length() > 40) w.ball = {};
    }
}

TEST(Step, DeterministicForSameTrace) {
    SimConfig cfg;
    auto run = [&] {
        SimWorld w = play_on_world(cfg);
        for (int u = 1; u <= 3; ++u) w.add_player(Side::Left, u, cfg);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> pw(-100, 100);
        std::vector<Event> ev;
        for (int c = 0; c < 500; ++c) {
            std::vector<AgentCommand> cmds;
            for (int u = 3; u >= 1; --u) cmds.push_back({player(Side::Left, u), codec::DashCmd{pw(rng), 0}});
            step_simulation(w, cmds, cfg);
            referee_judge(w, cfg, ev);
        }
        return w.snapshot();
    };
    EXPECT_EQ(run(), run());
}

// ---- referee -----------------------------------------------------------------

TEST(Referee, GoalInsideMouth) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.ball = {{53.0, 0}, {1, 0}};
    std::vector<Event> ev;
    referee_judge(w, cfg, ev);
    EXPECT_EQ(w.play_mode, PlayMode::of(PlayModeKind::Goal, Side::Left));
    EXPECT_EQ(w.score_left, 1);
    EXPECT_EQ(w.score_right, 0);
    EXPECT_EQ(w.ball.pos, Vec2(0, 0));
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].kind, EventKind::Goal);

    for (int i = 0; i < cfg.goal_pause_cycles; ++i) {
        step_simulation(w, {}, cfg);
        referee_judge(w, cfg, ev);
    }
    EXPECT_EQ(w.play_mode, PlayMode::of(PlayModeKind::KickOff, Side::Right));
}

TEST(Referee, TouchlineGivesKickInToOtherTeam) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.ball = {{0, 35}, {0, 1}};
    w.last_touch = Side::Left;
    std::vector<Event> ev;
    referee_judge(w, cfg, ev);
    EXPECT_EQ(w.play_mode, PlayMode::of(PlayModeKind::KickIn, Side::Right));
    EXPECT_EQ(w.ball.pos, Vec2(0, 34));

    SimWorld u = play_on_world(cfg);
    u.ball = {{-10, -35}, {}};
    referee_judge(u, cfg, ev);
    EXPECT_EQ(u.play_mode, PlayMode::of(PlayModeKind::KickIn, Side::Left));
}

TEST(Referee, GoalLineOutsideMouth) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.ball = {{53.0, 20}, {}};
    w.last_touch = Side::Left;
    std::vector<Event> ev;
    referee_judge(w, cfg, ev);
    EXPECT_EQ(w.play_mode, PlayMode::of(PlayModeKind::GoalKick, Side::Right));

    SimWorld c = play_on_world(cfg);
    c.ball = {{53.0, -20}, {}};
    c.last_touch = Side::Right;
    referee_judge(c, cfg, ev);
    EXPECT_EQ(c.play_mode, PlayMode::of(PlayModeKind::CornerKick, Side::Left));
    EXPECT_EQ(c.ball.pos, Vec2(52.5, -34));
}

TEST(Referee, DeadBallTimesOut) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.set_mode(PlayMode::of(PlayModeKind::CornerKick, Side::Left));
    std::vector<Event> ev;
    for (int i = 0; i < cfg.dead_ball_timeout - 1; ++i) {
        step_simulation(w, {}, cfg);
        referee_judge(w, cfg, ev);
    }
    EXPECT_EQ(w.play_mode.kind, PlayModeKind::CornerKick);
    step_simulation(w, {}, cfg);
    referee_judge(w, cfg, ev);
    EXPECT_EQ(w.play_mode, PlayMode::play_on());
}

TEST(Referee, EmptyMatchRunsToTimeOver) {
    SimConfig cfg;
    SimWorld w = make_world(cfg);
    std::vector<Event> ev;
    while (w.play_mode.kind != PlayModeKind::TimeOver) {
        step_simulation(w, {}, cfg);
        referee_judge(w, cfg, ev);
        ASSERT_LE(w.cycle, 6000);
    }
    EXPECT_EQ(w.cycle, 6000);
    EXPECT_EQ(w.score_left + w.score_right, 0);
}

TEST(Referee, GoalAlwaysIncrementsExactlyOneScore) {
    SimConfig cfg;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> x(-58, 58), y(-40, 40);
    for (int i = 0; i < 5000; ++i) {
        SimWorld w = play_on_world(cfg);
        w.ball.pos = {x(rng), y(rng)};
        std::vector<Event> ev;
        referee_judge(w, cfg, ev);
        ASSERT_TRUE(w.play_mode.is_valid());
        const int goals = w.score_left + w.score_right;
        ASSERT_EQ(goals, w.play_mode.kind == PlayModeKind::Goal ? 1 : 0);
    }
}

// ---- observation ---------------------------------------------------------------

TEST(Quantize, Examples) {
    EXPECT_EQ(quantize_distance(0.0, 0.1), 0.0);
    EXPECT_NEAR(quantize_distance(5.0, 0.1), 5.0, 1e-12);
    // step 0.1234, rint(12.34 / 0.1234) = 100
    EXPECT_NEAR(quantize_distance(12.34, 0.1), 12.34, 1e-12);
    EXPECT_NEAR(quantize_distance(3.14159, 0.1), 3.1, 1e-12);
}

TEST(Quantize, BoundAndMonotonicityBruteForce) {
    double prev = 0.0;
    for (int i = 0; i <= 1'300'000; ++i) {
        const double d = i * 1e-4;
        const double q = quantize_distance(d, 0.1);
        const double step = 0.1 * std::max(1.0, d / 10.0);
        ASSERT_LE(std::abs(q - d), step / 2 + 1e-12) << d;
        if (d < 120.0) {
            ASSERT_GE(q, prev - 1e-12) << d;
        }
        prev = q;
    }
}

TEST(Observation, ConeBoundary) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    auto& self = w.add_player(Side::Left, 1, cfg);
    self.pos = {0, 0};
    self.body_dir = 0;
    w.ball.pos = polar(10, 60);
    auto see = render_see(w, self, cfg);
    for (const auto& o : see.objects) EXPECT_FALSE(std::holds_alternative<codec::BallObject>(o.kind));

    w.ball.pos = polar(10, 45);
    see = render_see(w, self, cfg);
    int balls = 0;
    for (const auto& o : see.objects) {
        if (!std::holds_alternative<codec::BallObject>(o.kind)) continue;
        ++balls;
        EXPECT_EQ(o.direction, 45);
    }
    EXPECT_EQ(balls, 1);
}

TEST(Observation, NeckShiftsCone) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    auto& self = w.add_player(Side::Left, 1, cfg);
    self.pos = {0, 0};
    self.body_dir = 0;
    self.neck_dir = 60;
    w.ball.pos = polar(10, 60);
    auto see = render_see(w, self, cfg);
    bool found = false;
    for (const auto& o : see.objects) {
        if (!std::holds_alternative<codec::BallObject>(o.kind)) continue;
        found = true;
        EXPECT_EQ(o.direction, 0);
    }
    EXPECT_TRUE(found);
}

TEST(Observation, FullStateIsIdentityChannel) {
    SimConfig cfg;
    SimWorld w = play_on_world(cfg);
    w.add_player(Side::Left, 3, cfg).vel = {0.123456789, -1.0 / 7.0};
    w.add_player(Side::Right, 9, cfg).body_dir = 33.3333333333;
    w.ball = {{1.0 / 3.0, 2.0 / 3.0}, {0.7, -0.01}};
    auto msgs = render_observation(w, player(Side::Left, 3), ObservationMode::FullState, cfg);
    ASSERT_EQ(msgs.size(), 1u);
    auto decoded = codec::decode_server_message(codec::encode_server_message(msgs[0]));
    EXPECT_EQ(std::get<codec::FullStateMsg>(decoded).world, w.snapshot());
    EXPECT_THROW(render_observation(w, player(Side::Left, 4), ObservationMode::See, cfg), UnknownAgent);
}

TEST(Observation, GoldenFullFlagSee) {
    // With a 360 degree view every landmark is visible; the encoded line is
    // decoded again and compared with the ground truth that produced it.
    SimConfig cfg;
    cfg.visible_angle = 360.0;
    SimWorld w = play_on_world(cfg);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(-50, 50), y(-32, 32), a(-180, 180);
    for (int k = 0; k < 50; ++k) {
        SimWorld g = w;
        auto& self = g.add_player(Side::Left, 1, cfg);
        self.pos = {x(rng), y(rng)};
        self.body_dir = a(rng);
        const std::string line = codec::encode_server_message(render_see(g, self, cfg));
        const auto see = std::get<codec::SeeMsg>(codec::decode_server_message(line));
        std::size_t flags = 0;
        for (const auto& o : see.objects) {
            const auto* f = std::get_if<codec::FlagObject>(&o.kind);
            if (!f) continue;
            const Vec2 truth = *landmark_position(f->id);
            const double d = self.pos.distance(truth);
            const double step = cfg.quantize_step * std::max(1.0, d / 10.0);
            EXPECT_LE(std::abs(o.distance - d), step / 2 + 0.005 + 1e-9) << f->id;
            const double dir = normalize_angle(bearing(self.pos, truth) - self.body_dir);
            EXPECT_LE(std::abs(normalize_angle(o.direction - dir)), 0.5 + 1e-9) << f->id;
            EXPECT_EQ(o.direction, std::rint(o.direction));
            EXPECT_EQ(std::string_view(f->id), flag_landmarks()[flags].name);
            ++flags;
        }
        EXPECT_EQ(flags, 53u) << line;
    }
}
