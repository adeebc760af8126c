#include "cls/match/playmaker.hpp"

#include "cls/sim/world.hpp"

namespace cls::match {

namespace {

constexpr Vec2 kGoalCenter{52.5, 0.0};
constexpr double kFirstSpeed = 2.5;
constexpr double kFormationShift = 0.3;
constexpr double kGoToThreshold = 1.0;
constexpr double kGoToPower = 80.0;

}  // namespace

Vec2 formation_point(int unum, std::optional<Vec2> ball) {
    const Vec2 home = sim::home_position(unum);
    return ball ? home + *ball * kFormationShift : home;
}

std::vector<rpc::PlayerAction> builtin_playmaker_decide(const rpc::pb::State& state, double kickable_area) {
    const auto& w = state.world();
    const Vec2 self{w.self().pos().x(), w.self().pos().y()};
    const int unum = w.self().unum();
    std::optional<Vec2> ball;
    if (w.ball().confidence() > 0.0) ball = Vec2{w.ball().pos().x(), w.ball().pos().y()};

    if (ball && self.distance(*ball) <= kickable_area) return {rpc::BodySmartKick{kGoalCenter, kFirstSpeed, 0.0, 1}};
    if (ball && unum != 0 && w.intercept().fastest_our_unum() == unum)
        return {rpc::BodyInterceptBall{}, rpc::NeckTurnToBall{}};
    if (unum < 1 || unum > 11) return {rpc::DoNothing{}};
    return {rpc::BodyGoToPoint{formation_point(unum, ball), kGoToThreshold, kGoToPower}, rpc::NeckTurnToBall{}};
}

int registration_order_violations(const std::vector<CallRecord>& log, int player_types) {
    std::map<int, rpc::RegistrationGate> gates;
    int violations = 0;
    for (const auto& c : log) {
        try {
            switch (c.method) {
                case rpc::Method::SendInitMessage:
                    gates.insert_or_assign(c.register_id, rpc::RegistrationGate(player_types));
                    gates.at(c.register_id).acknowledge(c.method);
                    break;
                case rpc::Method::SendServerParams:
                case rpc::Method::SendPlayerParams:
                case rpc::Method::SendPlayerType:
                    gates.try_emplace(c.register_id, player_types).first->second.acknowledge(c.method);
                    break;
                default:
                    gates.try_emplace(c.register_id, player_types).first->second.require_complete(c.method);
                    break;
            }
        } catch (const rpc::MissingPrerequisite&) {
            ++violations;
        }
    }
    return violations;
}

BuiltinPlaymaker::Agent& BuiltinPlaymaker::advance(rpc::Method m, int id) {
    log_.push_back({m, id});
    Agent& a = agents_[id];
    const bool ok = (m == rpc::Method::SendServerParams && a.step == 1) ||
                    (m == rpc::Method::SendPlayerParams && a.step == 2) ||
                    (m == rpc::Method::SendPlayerType && a.step >= 3 && a.step < 3 + a.player_types);
    if (!ok) {
        ++refused_;
        throw rpc::RpcError(rpc::grpc_code::kFailedPrecondition,
                            std::string(rpc::method_name(m)) + " out of order for agent " + std::to_string(id));
    }
    ++a.step;
    return a;
}

BuiltinPlaymaker::Agent BuiltinPlaymaker::require_registered(rpc::Method m, int id) {
    std::lock_guard lock(mu_);
    log_.push_back({m, id});
    auto it = agents_.find(id);
    if (it == agents_.end() || it->second.player_types < 0 || it->second.step != 3 + it->second.player_types) {
        ++refused_;
        throw rpc::RpcError(rpc::grpc_code::kFailedPrecondition, "agent " + std::to_string(id) + " is not registered");
    }
    return it->second;
}

void BuiltinPlaymaker::send_init_message(const rpc::pb::InitMessage& m) {
    std::lock_guard lock(mu_);
    log_.push_back({rpc::Method::SendInitMessage, m.register_id()});
    agents_[m.register_id()] = Agent{1, -1, 1.085};
}

void BuiltinPlaymaker::send_server_params(const rpc::pb::ServerParam& m) {
    std::lock_guard lock(mu_);
    Agent& a = advance(rpc::Method::SendServerParams, m.register_id());
    if (auto it = m.params().find("kickable_area"); it != m.params().end()) a.kickable_area = it->second;
}

void BuiltinPlaymaker::send_player_params(const rpc::pb::PlayerParam& m) {
    std::lock_guard lock(mu_);
    Agent& a = advance(rpc::Method::SendPlayerParams, m.register_id());
    a.player_types = m.player_types();
}

void BuiltinPlaymaker::send_player_type(const rpc::pb::PlayerType& m) {
    std::lock_guard lock(mu_);
    advance(rpc::Method::SendPlayerType, m.register_id());
}

rpc::pb::PlayerActions BuiltinPlaymaker::get_player_actions(const rpc::pb::State& s) {
    const Agent a = require_registered(rpc::Method::GetPlayerActions, s.register_id());
    return rpc::marshal_player_actions(builtin_playmaker_decide(s, a.kickable_area));
}

rpc::pb::CoachActions BuiltinPlaymaker::get_coach_actions(const rpc::pb::State& s) {
    require_registered(rpc::Method::GetCoachActions, s.register_id());
    return rpc::marshal_coach_actions({rpc::DoNothing{}});
}

rpc::pb::TrainerActions BuiltinPlaymaker::get_trainer_actions(const rpc::pb::State& s) {
    require_registered(rpc::Method::GetTrainerActions, s.register_id());
    return {};
}

std::vector<CallRecord> BuiltinPlaymaker::call_log() const {
    std::lock_guard lock(mu_);
    return log_;
}

int BuiltinPlaymaker::refused_calls() const {
    std::lock_guard lock(mu_);
    return refused_;
}

}  // namespace cls::match
