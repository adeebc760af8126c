#include "cls/proxy/compile.hpp"

#include <algorithm>
#include <cmath>

#include "cls/codec/error.hpp"
#include "cls/sim/world.hpp"

namespace cls::proxy {

namespace {

constexpr double kScanMoment = 60.0;
constexpr double kBallKnownConfidence = 0.3;
constexpr double kInterceptThreshold = 0.3;
constexpr double kPreprocessTolerance = 0.5;

bool ball_known(const world::WorldState& ws) { return ws.ball.seen() && ws.ball.confidence > 0.0; }

/// Kick and move legality mirrors the referee, with Left meaning us.
bool kick_legal(const PlayMode& m) {
    switch (m.kind) {
        case PlayModeKind::PlayOn: return true;
        case PlayModeKind::BeforeKickOff:
        case PlayModeKind::Goal:
        case PlayModeKind::TimeOver: return false;
        default: return m.side == Side::Left;
    }
}

bool move_legal(const PlayMode& m) { return m.kind == PlayModeKind::BeforeKickOff || m.kind == PlayModeKind::Goal; }

codec::TurnCmd turn_toward(const world::WorldState& ws, Vec2 target) {
    return {normalize_angle(bearing(ws.self.pos, target) - ws.self.body_dir)};
}

std::optional<codec::Command> go_to_point(const world::WorldState& ws, const rpc::BodyGoToPoint& g) {
    const double dist = ws.self.pos.distance(g.target);
    if (dist <= g.dist_thr) return std::nullopt;
    const codec::TurnCmd turn = turn_toward(ws, g.target);
    if (std::abs(turn.moment) > ws.params.turn_threshold) return turn;
    const double rate = ws.params.dash_power_rate * ws.effort;
    const double needed = rate > 0.0 ? dist / rate : codec::kMaxPower;
    return codec::DashCmd{std::clamp(std::min(g.max_power, needed), 0.0, codec::kMaxPower), 0.0};
}

std::optional<codec::Command> checked(codec::Command c) {
    try {
        codec::validate_command(c);
    } catch (const codec::CodecError&) {
        return std::nullopt;
    }
    return c;
}

}  // namespace

std::optional<KickPlan> plan_kick(const world::WorldState& ws, Vec2 target, double first_speed) {
    if (!ball_known(ws)) return std::nullopt;
    const auto& p = ws.params;
    const Vec2 rel = (ws.ball.pos - ws.self.pos).rotated_deg(-ws.self.body_dir);
    const double dist = rel.length();
    if (dist > p.kickable_area) return std::nullopt;

    const double eff = 1.0 - 0.25 * std::abs(rel.angle_deg()) / 180.0 - 0.25 * dist / p.kickable_area;
    const double per_power = p.kick_power_rate * eff;
    const double max_accel = codec::kMaxPower * per_power;
    const Vec2 bv = ws.ball.vel;
    const Vec2 to_target = target - ws.ball.pos;
    const Vec2 u = to_target.length() > 1e-9 ? to_target / to_target.length() : polar(1.0, ws.self.body_dir);
    const double speed = std::clamp(first_speed, 0.0, p.ball_speed_max);

    auto clamp_speed = [&](Vec2 v) {
        const double s = v.length();
        return s > p.ball_speed_max ? v * (p.ball_speed_max / s) : v;
    };
    auto make = [&](Vec2 accel) {
        const double power = std::min(accel.length() / per_power, codec::kMaxPower);
        const double dir = accel.length() > 0.0 ? normalize_angle(accel.angle_deg() - ws.self.body_dir) : 0.0;
        return KickPlan{{power, dir}, clamp_speed(bv + polar(power * per_power, ws.self.body_dir + dir))};
    };

    const Vec2 exact = u * speed - bv;
    if (exact.length() <= max_accel) return make(exact);

    // Out of reach in one kick: the fastest velocity still on the target line,
    // or failing that the full-power kick along it.
    const double along = u.dot(bv);
    const double across = u.cross(bv);
    const double disc = max_accel * max_accel - across * across;
    if (disc >= 0.0) {
        const double s = along + std::sqrt(disc);
        if (s > 0.0) return make(u * s - bv);
    }
    return make(u * max_accel);
}

std::optional<codec::Command> compile_action(const rpc::PlayerAction& a, const world::WorldState& ws) {
    return std::visit(
        [&](const auto& act) -> std::optional<codec::Command> {
            using T = std::decay_t<decltype(act)>;
            if constexpr (std::is_same_v<T, codec::KickCmd>) {
                if (!kick_legal(ws.play_mode)) return std::nullopt;
                return checked(act);
            } else if constexpr (std::is_same_v<T, codec::MoveCmd>) {
                if (!move_legal(ws.play_mode)) return std::nullopt;
                return checked(act);
            } else if constexpr (std::is_same_v<T, codec::DashCmd> || std::is_same_v<T, codec::TurnCmd> ||
                                 std::is_same_v<T, codec::TurnNeckCmd> || std::is_same_v<T, codec::SayCmd>) {
                return checked(act);
            } else if constexpr (std::is_same_v<T, rpc::BodyGoToPoint>) {
                return go_to_point(ws, act);
            } else if constexpr (std::is_same_v<T, rpc::BodyTurnToPoint>) {
                return turn_toward(ws, act.target);
            } else if constexpr (std::is_same_v<T, rpc::BodySmartKick>) {
                if (!kick_legal(ws.play_mode)) return std::nullopt;
                const auto plan = plan_kick(ws, act.target, act.first_speed);
                if (!plan) return std::nullopt;
                return plan->kick;
            } else if constexpr (std::is_same_v<T, rpc::BodyInterceptBall>) {
                if (!ball_known(ws) || !ws.intercept.self_cycles) return std::nullopt;
                const Vec2 meet = world::predict_ball_position(ws.ball, *ws.intercept.self_cycles, ws.params.ball_decay);
                return go_to_point(ws, {meet, kInterceptThreshold, codec::kMaxPower});
            } else if constexpr (std::is_same_v<T, rpc::NeckTurnToBall>) {
                if (!ball_known(ws)) return std::nullopt;
                const double max = ws.params.max_neck_angle;
                const double want =
                    std::clamp(normalize_angle(bearing(ws.self.pos, ws.ball.pos) - ws.self.body_dir), -max, max);
                return checked(codec::TurnNeckCmd{want - ws.self.neck_dir});
            } else {
                static_assert(std::is_same_v<T, rpc::DoNothing>);
                return codec::TurnCmd{0.0};
            }
        },
        a);
}

std::string_view fallback_policy_name(FallbackPolicy p) { return p == FallbackPolicy::Scan ? "scan" : "standard"; }

std::optional<FallbackPolicy> fallback_policy_from_name(std::string_view s) {
    if (s == "standard") return FallbackPolicy::Standard;
    if (s == "scan") return FallbackPolicy::Scan;
    return std::nullopt;
}

codec::Command fallback_command(const world::WorldState& ws, FallbackPolicy policy) {
    if (policy == FallbackPolicy::Scan || !ball_known(ws) || ws.ball.confidence < kBallKnownConfidence)
        return codec::TurnCmd{kScanMoment};
    if (ws.intercept.fastest_ours == ws.self_unum) {
        if (auto c = compile_action(rpc::BodyInterceptBall{}, ws)) return *c;
    }
    return turn_toward(ws, ws.ball.pos);
}

std::string_view action_source_name(ActionSource s) {
    switch (s) {
        case ActionSource::Playmaker: return "playmaker";
        case ActionSource::Fallback: return "fallback";
        case ActionSource::Preprocess: return "preprocess";
    }
    return "?";
}

Vec2 kickoff_position(int unum) { return sim::home_position(unum); }

bool needs_preprocess(const world::WorldState& ws) {
    if (ws.role != AgentRole::Player || !move_legal(ws.play_mode)) return false;
    if (ws.self_unum < 1 || ws.self_unum > 11) return false;
    return ws.self.pos.distance(kickoff_position(ws.self_unum)) > kPreprocessTolerance;
}

ActionPlan plan_commands(const std::vector<rpc::PlayerAction>& actions, bool from_playmaker, const world::WorldState& ws,
                         FallbackPolicy policy) {
    ActionPlan plan;
    plan.actions = actions;
    std::optional<codec::Command> body, neck, say;
    for (const auto& a : actions) {
        auto c = compile_action(a, ws);
        if (!c) continue;
        if (codec::is_body_command(*c)) {
            if (!body) body = std::move(c);
        } else if (std::holds_alternative<codec::TurnNeckCmd>(*c)) {
            if (!neck) neck = std::move(c);
        } else if (std::holds_alternative<codec::SayCmd>(*c)) {
            if (!say) say = std::move(c);
        }
    }
    if (needs_preprocess(ws)) {
        const Vec2 home = kickoff_position(ws.self_unum);
        body = codec::MoveCmd{home.x, home.y};
        plan.source = ActionSource::Preprocess;
    } else if (body && from_playmaker) {
        plan.source = ActionSource::Playmaker;
    } else {
        body = fallback_command(ws, policy);
        plan.source = ActionSource::Fallback;
    }
    plan.commands.push_back(std::move(*body));
    if (neck) plan.commands.push_back(std::move(*neck));
    if (say) plan.commands.push_back(std::move(*say));
    return plan;
}

std::vector<codec::Command> coach_commands(const std::vector<rpc::CoachAction>& actions) {
    std::vector<codec::Command> out;
    for (const auto& a : actions)
        if (const auto* say = std::get_if<codec::SayCmd>(&a)) out.push_back(*say);
    return out;
}

std::vector<codec::Command> trainer_commands(const std::vector<rpc::TrainerAction>& actions) {
    std::vector<codec::Command> out;
    for (const auto& a : actions) {
        std::visit(
            [&](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, rpc::MoveBall>) {
                    out.push_back(codec::TrainerMoveCmd{codec::BallTarget{}, t.pos.x, t.pos.y, t.vel.x, t.vel.y, {}});
                } else if constexpr (std::is_same_v<T, rpc::MovePlayer>) {
                    out.push_back(codec::TrainerMoveCmd{codec::PlayerTarget{t.side, t.unum}, t.pos.x, t.pos.y, {}, {},
                                                        normalize_angle(t.body_dir)});
                } else if constexpr (std::is_same_v<T, rpc::ChangePlayMode>) {
                    out.push_back(codec::ChangeModeCmd{t.play_mode});
                } else {
                    out.push_back(codec::RecoverCmd{});
                }
            },
            a);
    }
    return out;
}

}  // namespace cls::proxy
