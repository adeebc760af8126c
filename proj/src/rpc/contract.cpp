#include "cls/rpc/contract.hpp"

#include <cmath>

namespace cls::rpc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void set_vec(pb::Vector2* out, Vec2 v) {
    out->set_x(v.x);
    out->set_y(v.y);
}

Vec2 vec(const pb::Vector2& v) { return {v.x(), v.y()}; }

double finite(double v, const char* what) {
    if (!std::isfinite(v)) throw SchemaViolation(std::string("non-finite ") + what);
    return v;
}

Vec2 finite_vec(const pb::Vector2& v, const char* what) { return {finite(v.x(), what), finite(v.y(), what)}; }

constexpr std::pair<PlayModeKind, pb::PlayModeKind> kModes[] = {
    {PlayModeKind::BeforeKickOff, pb::BEFORE_KICK_OFF}, {PlayModeKind::KickOff, pb::KICK_OFF},
    {PlayModeKind::PlayOn, pb::PLAY_ON},                {PlayModeKind::KickIn, pb::KICK_IN},
    {PlayModeKind::GoalKick, pb::GOAL_KICK},            {PlayModeKind::CornerKick, pb::CORNER_KICK},
    {PlayModeKind::Goal, pb::GOAL},                     {PlayModeKind::TimeOver, pb::TIME_OVER},
};

void fill_player(pb::Player* out, int unum, const world::TrackedObject& o, std::optional<int> intercept) {
    out->set_unum(unum);
    set_vec(out->mutable_pos(), o.pos);
    set_vec(out->mutable_vel(), o.vel);
    out->set_seen(o.seen());
    out->set_confidence(o.seen() ? o.confidence : 0.0);
    out->set_last_seen_cycle(o.last_seen_cycle);
    out->set_has_body_dir(o.body_dir.has_value());
    out->set_body_dir(o.body_dir.value_or(0.0));
    out->set_intercept_cycles(intercept.value_or(-1));
}

std::optional<int> cycles(int v) { return v < 0 ? std::nullopt : std::optional<int>(v); }

world::TrackedObject read_player(const pb::Player& p) {
    world::TrackedObject o;
    o.pos = vec(p.pos());
    o.vel = vec(p.vel());
    o.confidence = p.confidence();
    o.last_seen_cycle = p.seen() ? p.last_seen_cycle() : -1;
    if (p.has_body_dir()) o.body_dir = p.body_dir();
    return o;
}

}  // namespace

// ---- actions ------------------------------------------------------------------

pb::PlayerAction to_proto(const PlayerAction& a) {
    pb::PlayerAction out;
    std::visit(overloaded{
                   [&](const codec::DashCmd& v) {
                       out.mutable_dash()->set_power(v.power);
                       out.mutable_dash()->set_dir(v.dir);
                   },
                   [&](const codec::TurnCmd& v) { out.mutable_turn()->set_moment(v.moment); },
                   [&](const codec::KickCmd& v) {
                       out.mutable_kick()->set_power(v.power);
                       out.mutable_kick()->set_dir(v.dir);
                   },
                   [&](const codec::TurnNeckCmd& v) { out.mutable_turn_neck()->set_moment(v.moment); },
                   [&](const codec::MoveCmd& v) {
                       out.mutable_move()->set_x(v.x);
                       out.mutable_move()->set_y(v.y);
                   },
                   [&](const codec::SayCmd& v) { out.mutable_say()->set_text(v.text); },
                   [&](const BodyGoToPoint& v) {
                       auto* m = out.mutable_body_go_to_point();
                       set_vec(m->mutable_target(), v.target);
                       m->set_distance_threshold(v.dist_thr);
                       m->set_max_dash_power(v.max_power);
                   },
                   [&](const BodySmartKick& v) {
                       auto* m = out.mutable_body_smart_kick();
                       set_vec(m->mutable_target(), v.target);
                       m->set_first_speed(v.first_speed);
                       m->set_first_speed_threshold(v.speed_thr);
                       m->set_max_steps(v.max_steps);
                   },
                   [&](const BodyTurnToPoint& v) { set_vec(out.mutable_body_turn_to_point()->mutable_target(), v.target); },
                   [&](const BodyInterceptBall&) { out.mutable_body_intercept_ball(); },
                   [&](const NeckTurnToBall&) { out.mutable_neck_turn_to_ball(); },
                   [&](const DoNothing&) { out.mutable_do_nothing(); },
               },
               a);
    return out;
}

PlayerAction from_proto(const pb::PlayerAction& a) {
    switch (a.action_case()) {
        case pb::PlayerAction::kDash:
            return codec::DashCmd{finite(a.dash().power(), "power"), finite(a.dash().dir(), "dir")};
        case pb::PlayerAction::kTurn:
            return codec::TurnCmd{finite(a.turn().moment(), "moment")};
        case pb::PlayerAction::kKick:
            return codec::KickCmd{finite(a.kick().power(), "power"), finite(a.kick().dir(), "dir")};
        case pb::PlayerAction::kTurnNeck:
            return codec::TurnNeckCmd{finite(a.turn_neck().moment(), "moment")};
        case pb::PlayerAction::kMove:
            return codec::MoveCmd{finite(a.move().x(), "x"), finite(a.move().y(), "y")};
        case pb::PlayerAction::kSay:
            return codec::SayCmd{a.say().text()};
        case pb::PlayerAction::kBodyGoToPoint: {
            const auto& m = a.body_go_to_point();
            return BodyGoToPoint{finite_vec(m.target(), "target"), finite(m.distance_threshold(), "threshold"),
                                 finite(m.max_dash_power(), "power")};
        }
        case pb::PlayerAction::kBodySmartKick: {
            const auto& m = a.body_smart_kick();
            return BodySmartKick{finite_vec(m.target(), "target"), finite(m.first_speed(), "speed"),
                                 finite(m.first_speed_threshold(), "threshold"), m.max_steps()};
        }
        case pb::PlayerAction::kBodyTurnToPoint:
            return BodyTurnToPoint{finite_vec(a.body_turn_to_point().target(), "target")};
        case pb::PlayerAction::kBodyInterceptBall:
            return BodyInterceptBall{};
        case pb::PlayerAction::kNeckTurnToBall:
            return NeckTurnToBall{};
        case pb::PlayerAction::kDoNothing:
            return DoNothing{};
        case pb::PlayerAction::ACTION_NOT_SET:
            break;
    }
    throw SchemaViolation("player action without variant");
}

pb::CoachAction to_proto(const CoachAction& a) {
    pb::CoachAction out;
    std::visit(overloaded{
                   [&](const codec::SayCmd& v) { out.mutable_say()->set_text(v.text); },
                   [&](const DoNothing&) { out.mutable_do_nothing(); },
               },
               a);
    return out;
}

CoachAction from_proto(const pb::CoachAction& a) {
    switch (a.action_case()) {
        case pb::CoachAction::kSay:
            return codec::SayCmd{a.say().text()};
        case pb::CoachAction::kDoNothing:
            return DoNothing{};
        case pb::CoachAction::ACTION_NOT_SET:
            break;
    }
    throw SchemaViolation("coach action without variant");
}

pb::TrainerAction to_proto(const TrainerAction& a) {
    pb::TrainerAction out;
    std::visit(overloaded{
                   [&](const MoveBall& v) {
                       set_vec(out.mutable_move_ball()->mutable_pos(), v.pos);
                       set_vec(out.mutable_move_ball()->mutable_vel(), v.vel);
                   },
                   [&](const MovePlayer& v) {
                       auto* m = out.mutable_move_player();
                       m->set_side(side_to_proto(v.side));
                       m->set_unum(v.unum);
                       set_vec(m->mutable_pos(), v.pos);
                       m->set_body_dir(v.body_dir);
                   },
                   [&](const ChangePlayMode& v) {
                       *out.mutable_change_play_mode()->mutable_play_mode() = to_proto(v.play_mode);
                   },
                   [&](const Recover&) { out.mutable_recover(); },
               },
               a);
    return out;
}

TrainerAction from_proto(const pb::TrainerAction& a) {
    switch (a.action_case()) {
        case pb::TrainerAction::kMoveBall:
            return MoveBall{finite_vec(a.move_ball().pos(), "pos"), finite_vec(a.move_ball().vel(), "vel")};
        case pb::TrainerAction::kMovePlayer: {
            const auto& m = a.move_player();
            const auto side = side_from_proto(m.side());
            if (!side) throw SchemaViolation("move_player without side");
            if (m.unum() < 1 || m.unum() > 11) throw SchemaViolation("move_player unum out of range");
            return MovePlayer{*side, m.unum(), finite_vec(m.pos(), "pos"), finite(m.body_dir(), "body_dir")};
        }
        case pb::TrainerAction::kChangePlayMode:
            return ChangePlayMode{from_proto(a.change_play_mode().play_mode())};
        case pb::TrainerAction::kRecover:
            return Recover{};
        case pb::TrainerAction::ACTION_NOT_SET:
            break;
    }
    throw SchemaViolation("trainer action without variant");
}

std::vector<PlayerAction> unmarshal_player_actions(const pb::PlayerActions& reply) {
    std::vector<PlayerAction> out;
    out.reserve(static_cast<std::size_t>(reply.actions_size()));
    for (const auto& a : reply.actions()) out.push_back(from_proto(a));
    return out;
}

std::vector<CoachAction> unmarshal_coach_actions(const pb::CoachActions& reply) {
    std::vector<CoachAction> out;
    for (const auto& a : reply.actions()) out.push_back(from_proto(a));
    return out;
}

std::vector<TrainerAction> unmarshal_trainer_actions(const pb::TrainerActions& reply) {
    std::vector<TrainerAction> out;
    for (const auto& a : reply.actions()) out.push_back(from_proto(a));
    return out;
}

pb::PlayerActions marshal_player_actions(const std::vector<PlayerAction>& actions) {
    pb::PlayerActions out;
    for (const auto& a : actions) *out.add_actions() = to_proto(a);
    return out;
}

pb::CoachActions marshal_coach_actions(const std::vector<CoachAction>& actions) {
    pb::CoachActions out;
    for (const auto& a : actions) *out.add_actions() = to_proto(a);
    return out;
}

pb::TrainerActions marshal_trainer_actions(const std::vector<TrainerAction>& actions) {
    pb::TrainerActions out;
    for (const auto& a : actions) *out.add_actions() = to_proto(a);
    return out;
}

std::string_view action_name(const PlayerAction& a) {
    static constexpr std::string_view kNames[] = {
        "dash",          "turn",           "kick",           "turn_neck",           "move",
        "say",           "body_go_to_point", "body_smart_kick", "body_turn_to_point", "body_intercept_ball",
        "neck_turn_to_ball", "do_nothing",
    };
    return kNames[a.index()];
}

// ---- state ------------------------------------------------------------------------

int register_id(AgentRole role, Side side, int unum) {
    const int base = side == Side::Left ? 0 : 100;
    switch (role) {
        case AgentRole::Player: return base + unum;
        case AgentRole::Coach: return base;
        case AgentRole::Trainer: return 200;
    }
    return -1;
}

pb::AgentType to_proto(AgentRole r) {
    switch (r) {
        case AgentRole::Player: return pb::AGENT_PLAYER;
        case AgentRole::Coach: return pb::AGENT_COACH;
        case AgentRole::Trainer: return pb::AGENT_TRAINER;
    }
    return pb::AGENT_PLAYER;
}

AgentRole from_proto(pb::AgentType t) {
    switch (t) {
        case pb::AGENT_COACH: return AgentRole::Coach;
        case pb::AGENT_TRAINER: return AgentRole::Trainer;
        default: return AgentRole::Player;
    }
}

pb::Side side_to_proto(Side s) { return s == Side::Left ? pb::SIDE_LEFT : pb::SIDE_RIGHT; }

std::optional<Side> side_from_proto(pb::Side s) {
    if (s == pb::SIDE_LEFT) return Side::Left;
    if (s == pb::SIDE_RIGHT) return Side::Right;
    return std::nullopt;
}

pb::PlayMode to_proto(const PlayMode& m) {
    pb::PlayMode out;
    for (auto [k, p] : kModes)
        if (k == m.kind) out.set_kind(p);
    out.set_side(m.side ? side_to_proto(*m.side) : pb::SIDE_UNKNOWN);
    return out;
}

PlayMode from_proto(const pb::PlayMode& m) {
    PlayMode out;
    bool found = false;
    for (auto [k, p] : kModes) {
        if (p == m.kind()) {
            out.kind = k;
            found = true;
        }
    }
    if (!found) throw SchemaViolation("unknown play mode kind");
    if (kind_has_side(out.kind)) {
        out.side = side_from_proto(m.side());
        if (!out.side) throw SchemaViolation("play mode requires a side");
    }
    return out;
}

pb::WorldModel marshal_world(const world::WorldState& ws) {
    pb::WorldModel m;
    m.set_cycle(ws.cycle);
    m.set_our_team_name(ws.our_team);
    m.set_their_team_name(ws.their_team);
    m.set_our_side(side_to_proto(ws.our_side));

    auto* self = m.mutable_self();
    self->set_unum(ws.self_unum);
    set_vec(self->mutable_pos(), ws.self.pos);
    set_vec(self->mutable_vel(), ws.self_vel);
    self->set_body_dir(ws.self.body_dir);
    self->set_neck_dir(ws.self.neck_dir);
    self->set_stamina(ws.stamina);
    self->set_effort(ws.effort);
    self->set_pos_error(ws.self.pos_error);
    self->set_pos_valid(ws.self.valid);

    auto* ball = m.mutable_ball();
    set_vec(ball->mutable_pos(), ws.ball.pos);
    set_vec(ball->mutable_vel(), ws.ball.vel);
    ball->set_seen(ws.ball.seen());
    ball->set_confidence(ws.ball.seen() ? ws.ball.confidence : 0.0);
    ball->set_last_seen_cycle(ws.ball.last_seen_cycle);

    for (int u = 1; u <= 11; ++u) {
        const auto i = static_cast<std::size_t>(u - 1);
        fill_player(m.add_teammates(), u, ws.teammates[i], ws.intercept.ours[i]);
        fill_player(m.add_opponents(), u, ws.opponents[i], ws.intercept.theirs[i]);
    }

    *m.mutable_play_mode() = to_proto(ws.play_mode);
    m.set_our_score(ws.our_score);
    m.set_their_score(ws.their_score);

    auto* ic = m.mutable_intercept();
    ic->set_self_cycles(ws.intercept.self_cycles.value_or(-1));
    ic->set_fastest_our_unum(ws.intercept.fastest_ours.value_or(0));
    ic->set_fastest_our_cycles(
        ws.intercept.fastest_ours ? ws.intercept.ours[static_cast<std::size_t>(*ws.intercept.fastest_ours - 1)].value_or(-1)
                                  : -1);
    ic->set_fastest_opp_unum(ws.intercept.fastest_theirs.value_or(0));
    ic->set_fastest_opp_cycles(ws.intercept.fastest_theirs
                                   ? ws.intercept.theirs[static_cast<std::size_t>(*ws.intercept.fastest_theirs - 1)]
                                         .value_or(-1)
                                   : -1);

    m.set_full_state(ws.full_state);
    if (ws.ball_displacement) set_vec(m.mutable_ball_displacement(), *ws.ball_displacement);
    m.set_stale_messages(ws.stale_messages);
    return m;
}

pb::State marshal_state(const world::WorldState& ws, const AgentMeta& meta) {
    pb::State s;
    s.set_agent_type(to_proto(meta.role));
    s.set_register_id(meta.register_id);
    *s.mutable_world() = marshal_world(ws);
    if (ws.full_state) *s.mutable_full_world() = s.world();
    s.set_need_preprocess(meta.need_preprocess);
    return s;
}

world::WorldState unmarshal_world(const pb::WorldModel& m, AgentRole role) {
    world::WorldState ws;
    ws.role = role;
    ws.cycle = m.cycle();
    ws.our_team = m.our_team_name();
    ws.their_team = m.their_team_name();
    ws.our_side = side_from_proto(m.our_side()).value_or(Side::Left);

    ws.self_unum = m.self().unum();
    ws.self.pos = vec(m.self().pos());
    ws.self_vel = vec(m.self().vel());
    ws.self.body_dir = m.self().body_dir();
    ws.self.neck_dir = m.self().neck_dir();
    ws.stamina = m.self().stamina();
    ws.effort = m.self().effort();
    ws.self.pos_error = m.self().pos_error();
    ws.self.valid = m.self().pos_valid();

    ws.ball.pos = vec(m.ball().pos());
    ws.ball.vel = vec(m.ball().vel());
    ws.ball.confidence = m.ball().confidence();
    ws.ball.last_seen_cycle = m.ball().seen() ? m.ball().last_seen_cycle() : -1;

    for (const auto& p : m.teammates()) {
        if (p.unum() < 1 || p.unum() > 11) throw SchemaViolation("teammate unum out of range");
        const auto i = static_cast<std::size_t>(p.unum() - 1);
        ws.teammates[i] = read_player(p);
        ws.intercept.ours[i] = cycles(p.intercept_cycles());
    }
    for (const auto& p : m.opponents()) {
        if (p.unum() < 1 || p.unum() > 11) throw SchemaViolation("opponent unum out of range");
        const auto i = static_cast<std::size_t>(p.unum() - 1);
        ws.opponents[i] = read_player(p);
        ws.intercept.theirs[i] = cycles(p.intercept_cycles());
    }

    ws.play_mode = from_proto(m.play_mode());
    ws.our_score = m.our_score();
    ws.their_score = m.their_score();
    ws.intercept.self_cycles = cycles(m.intercept().self_cycles());
    if (m.intercept().fastest_our_unum() > 0) ws.intercept.fastest_ours = m.intercept().fastest_our_unum();
    if (m.intercept().fastest_opp_unum() > 0) ws.intercept.fastest_theirs = m.intercept().fastest_opp_unum();

    ws.full_state = m.full_state();
    if (m.has_ball_displacement()) ws.ball_displacement = vec(m.ball_displacement());
    ws.stale_messages = m.stale_messages();
    return ws;
}

// ---- registration -------------------------------------------------------------

std::vector<OutboundCall> registration_sequence(const RegistrationInfo& info, const CapturedParams& params) {
    if (!params.server) throw MissingPrerequisite("server_param not received");
    if (!params.player) throw MissingPrerequisite("player_param not received");
    const auto it = params.player->params.find("player_types");
    const int n_types = it == params.player->params.end() ? 0 : static_cast<int>(it->second);
    for (int id = 0; id < n_types; ++id)
        if (!params.types.contains(id)) throw MissingPrerequisite("player_type " + std::to_string(id) + " not received");

    std::vector<OutboundCall> calls;

    auto init = std::make_shared<pb::InitMessage>();
    init->set_register_id(info.register_id);
    init->set_team_name(info.team);
    init->set_unum(info.unum);
    init->set_agent_type(to_proto(info.role));
    init->set_version(kContractVersion);
    init->set_debug_mode(info.debug);
    calls.push_back({Method::SendInitMessage, init});

    auto sp = std::make_shared<pb::ServerParam>();
    sp->set_register_id(info.register_id);
    for (const auto& [k, v] : params.server->params) (*sp->mutable_params())[k] = v;
    calls.push_back({Method::SendServerParams, sp});

    auto pp = std::make_shared<pb::PlayerParam>();
    pp->set_register_id(info.register_id);
    pp->set_player_types(n_types);
    if (auto s = params.player->params.find("subs_max"); s != params.player->params.end())
        pp->set_subs_max(static_cast<int>(s->second));
    for (const auto& [k, v] : params.player->params) (*pp->mutable_params())[k] = v;
    calls.push_back({Method::SendPlayerParams, pp});

    for (int id = 0; id < n_types; ++id) {
        auto pt = std::make_shared<pb::PlayerType>();
        pt->set_register_id(info.register_id);
        pt->set_id(id);
        for (const auto& [k, v] : params.types.at(id).params) (*pt->mutable_params())[k] = v;
        calls.push_back({Method::SendPlayerType, pt});
    }
    return calls;
}

void RegistrationGate::acknowledge(Method m) {
    Method expected;
    if (step_ == 0) expected = Method::SendInitMessage;
    else if (step_ == 1) expected = Method::SendServerParams;
    else if (step_ == 2) expected = Method::SendPlayerParams;
    else if (step_ < 3 + player_types_) expected = Method::SendPlayerType;
    else throw MissingPrerequisite("registration already complete");
    if (m != expected)
        throw MissingPrerequisite("expected " + std::string(method_name(expected)) + ", got " +
                                  std::string(method_name(m)));
    ++step_;
}

void RegistrationGate::require_complete(Method m) const {
    if (!complete())
        throw MissingPrerequisite(std::string(method_name(m)) + " before registration completed (" +
                                  std::to_string(step_) + "/" + std::to_string(3 + player_types_) + " acks)");
}

}  // namespace cls::rpc
