#include <charconv>
#include <cmath>

#include "cls/world/model.hpp"

namespace cls::world {

void WorldParams::apply(const codec::ParamMap& m) {
    auto set = [&](const char* key, double& field) {
        if (auto it = m.find(key); it != m.end()) field = it->second;
    };
    set("ball_decay", ball_decay);
    set("player_decay", player_decay);
    set("player_speed_max", player_speed_max);
    set("dash_power_rate", dash_power_rate);
    set("effort_max", effort_max);
    set("kickable_area", kickable_area);
    set("kick_power_rate", kick_power_rate);
    set("ball_speed_max", ball_speed_max);
    set("max_neck_angle", max_neck_angle);
    set("inertia_moment", inertia_moment);
}

Vec2 normalize_pos(Side our_side, Vec2 global) { return our_side == Side::Left ? global : -global; }

double normalize_dir(Side our_side, double global_dir) {
    return normalize_angle(our_side == Side::Left ? global_dir : global_dir + 180.0);
}

WorldState make_world_state(AgentRole role, const std::string& team, const WorldParams& params) {
    WorldState ws;
    ws.role = role;
    ws.our_team = team;
    ws.params = params;
    return ws;
}

namespace {

PlayMode normalize_mode(Side our_side, const PlayMode& m) { return our_side == Side::Left ? m : mirrored(m); }

void decay_object(TrackedObject& o, double decay, double conf_decay) {
    if (!o.seen()) return;
    o.pos += o.vel;
    o.vel *= decay;
    o.confidence *= conf_decay;
}

/// Records a sighting at `pos` (normalized frame). Velocity comes from the
/// displacement since the previous cycle's sighting.
void sight(TrackedObject& o, Vec2 pos, int cycle, double decay, std::optional<Vec2>* displacement = nullptr) {
    if (o.seen() && o.last_seen_cycle == cycle - 1) {
        const Vec2 d = pos - o.seen_pos;
        o.vel = d * decay;
        if (displacement) *displacement = d;
    } else if (!o.seen()) {
        o.vel = {};
    }
    o.pos = pos;
    o.seen_pos = pos;
    o.confidence = 1.0;
    o.last_seen_cycle = cycle;
}

bool is_stale(WorldState& ws, int cycle) {
    if (cycle < ws.cycle) {
        ++ws.stale_messages;
        return true;
    }
    return false;
}

void on_hear(WorldState& ws, const codec::HearMsg& h) {
    ws.heard.push_back(h);
    if (h.sender != "referee") return;
    const std::string_view t = h.text;
    if (t.size() > 7 && t.starts_with("goal_") && t[6] == '_') {
        const auto side = side_from_char(t.substr(5, 1));
        int n = 0;
        const auto rest = t.substr(7);
        if (side && std::from_chars(rest.data(), rest.data() + rest.size(), n).ec == std::errc{}) {
            (*side == ws.our_side ? ws.our_score : ws.their_score) = n;
        }
        return;
    }
    if (auto m = play_mode_from_wire(t)) ws.play_mode = normalize_mode(ws.our_side, *m);
}

void on_see(WorldState& ws, const codec::SeeMsg& see) {
    const Side side = ws.our_side;
    LocalizeInput in;
    for (const auto& o : see.objects)
        if (std::holds_alternative<codec::FlagObject>(o.kind) || std::holds_alternative<codec::GoalObject>(o.kind))
            in.landmarks.push_back(o);
    in.prior = ws.self;
    in.prior.pos = normalize_pos(side, ws.self.pos);
    in.prior.body_dir = normalize_dir(side, ws.self.body_dir);
    in.last_velocity = normalize_pos(side, ws.self_vel);
    in.prior_age = ws.last_fix_cycle < 0 ? in.valid_age + see.cycle : see.cycle - ws.last_fix_cycle;
    in.valid_age = ws.params.pose_valid_age;

    const PoseEstimate pose = localize(in);
    if (in.landmarks.size() >= 2) ws.last_fix_cycle = see.cycle;

    const double face = pose.body_dir + pose.neck_dir;
    ws.self = pose;
    ws.self.pos = normalize_pos(side, pose.pos);
    ws.self.body_dir = normalize_dir(side, pose.body_dir);
    ws.self_vel = normalize_pos(side, ws.sensed_speed.rotated_deg(face));

    for (const auto& o : see.objects) {
        const Vec2 global = pose.pos + polar(o.distance, o.direction + face);
        const Vec2 pos = normalize_pos(side, global);
        if (std::holds_alternative<codec::BallObject>(o.kind)) {
            sight(ws.ball, pos, see.cycle, ws.params.ball_decay, &ws.ball_displacement);
        } else if (const auto* p = std::get_if<codec::PlayerObject>(&o.kind)) {
            if (!p->unum || !p->team) continue;
            const bool ours = *p->team == ws.our_team;
            if (!ours && ws.their_team.empty()) ws.their_team = *p->team;
            if (ours && *p->unum == ws.self_unum && ws.role == AgentRole::Player) continue;
            auto& slot = (ours ? ws.teammates : ws.opponents)[static_cast<std::size_t>(*p->unum - 1)];
            sight(slot, pos, see.cycle, ws.params.player_decay);
            slot.body_dir.reset();
        }
    }
    // The self slot among teammates mirrors the self estimate.
    if (ws.role == AgentRole::Player && ws.self_unum >= 1 && ws.self_unum <= 11) {
        auto& me = ws.teammates[static_cast<std::size_t>(ws.self_unum - 1)];
        me.pos = me.seen_pos = ws.self.pos;
        me.vel = ws.self_vel;
        me.body_dir = ws.self.body_dir;
        me.confidence = ws.self.valid ? 1.0 : 0.0;
        me.last_seen_cycle = see.cycle;
    }
}

void on_full_state(WorldState& ws, const codec::FullStateMsg& fs) {
    const WorldSnapshot& w = fs.world;
    const Side side = ws.our_side;
    ws.full_state = true;
    ws.play_mode = normalize_mode(side, w.play_mode);
    ws.our_team = side == Side::Left ? w.team_left : w.team_right;
    ws.their_team = side == Side::Left ? w.team_right : w.team_left;
    ws.our_score = side == Side::Left ? w.score_left : w.score_right;
    ws.their_score = side == Side::Left ? w.score_right : w.score_left;

    auto exact = [&](TrackedObject& o, Vec2 pos, Vec2 vel, std::optional<double> body) {
        o.pos = o.seen_pos = normalize_pos(side, pos);
        o.vel = normalize_pos(side, vel);
        o.confidence = 1.0;
        o.last_seen_cycle = w.cycle;
        o.body_dir = body;
    };
    exact(ws.ball, w.ball.pos, w.ball.vel, std::nullopt);
    ws.ball_displacement = ws.ball.vel / ws.params.ball_decay;

    for (const auto& p : w.players) {
        if (p.unum < 1 || p.unum > 11) continue;
        const bool ours = p.side == side;
        auto& slot = (ours ? ws.teammates : ws.opponents)[static_cast<std::size_t>(p.unum - 1)];
        exact(slot, p.pos, p.vel, normalize_dir(side, p.body_dir));
        if (ours && p.unum == ws.self_unum && ws.role == AgentRole::Player) {
            ws.self.pos = slot.pos;
            ws.self.body_dir = *slot.body_dir;
            ws.self.neck_dir = p.neck_dir;
            ws.self.pos_error = 0.0;
            ws.self.valid = true;
            ws.self_vel = slot.vel;
            ws.stamina = p.stamina;
            ws.effort = p.effort;
            ws.last_fix_cycle = w.cycle;
        }
    }
}

}  // namespace

void advance_to(WorldState& ws, int cycle) {
    if (cycle <= ws.cycle) return;
    const WorldParams& p = ws.params;
    for (int c = ws.cycle; c < cycle; ++c) {
        decay_object(ws.ball, p.ball_decay, p.confidence_decay);
        for (auto& t : ws.teammates) decay_object(t, p.player_decay, p.confidence_decay);
        for (auto& o : ws.opponents) decay_object(o, p.player_decay, p.confidence_decay);
    }
    ws.cycle = cycle;
    ws.heard.clear();
}

void integrate_observation(WorldState& ws, const codec::ServerMessage& msg) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, codec::InitMsg>) {
                ws.our_side = m.side;
                ws.self_unum = m.unum;
                ws.play_mode = normalize_mode(m.side, m.play_mode);
            } else if constexpr (std::is_same_v<T, codec::ServerParamMsg>) {
                ws.params.apply(m.params);
            } else if constexpr (std::is_same_v<T, codec::HearMsg>) {
                if (is_stale(ws, m.cycle)) return;
                advance_to(ws, m.cycle);
                on_hear(ws, m);
            } else if constexpr (std::is_same_v<T, codec::SenseBodyMsg>) {
                if (is_stale(ws, m.cycle)) return;
                advance_to(ws, m.cycle);
                ws.stamina = m.stamina;
                ws.effort = m.effort;
                ws.self.neck_dir = m.neck_dir;
                ws.sensed_speed = polar(m.speed_mag, m.speed_dir);
            } else if constexpr (std::is_same_v<T, codec::SeeMsg>) {
                if (is_stale(ws, m.cycle)) return;
                advance_to(ws, m.cycle);
                ws.full_state = false;
                on_see(ws, m);
                ws.intercept = build_intercept_table(ws);
            } else if constexpr (std::is_same_v<T, codec::FullStateMsg>) {
                if (is_stale(ws, m.world.cycle)) return;
                advance_to(ws, m.world.cycle);
                on_full_state(ws, m);
                ws.intercept = build_intercept_table(ws);
            }
        },
        msg);
}

}  // namespace cls::world
