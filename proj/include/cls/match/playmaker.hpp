#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "cls/rpc/contract.hpp"

namespace cls::match {

/// 4-3-3 kick-off grid (own frame) shifted by 0.3 x ball position when the
/// ball is known.
Vec2 formation_point(int unum, std::optional<Vec2> ball);

/// Reference player policy:
///   ball kickable            -> [BodySmartKick((52.5, 0), 2.5)]
///   we are fastest teammate  -> [BodyInterceptBall, NeckTurnToBall]
///   otherwise                -> [BodyGoToPoint(formation, 1.0, 80), NeckTurnToBall]
/// The ball counts as known when its confidence is positive.
std::vector<rpc::PlayerAction> builtin_playmaker_decide(const rpc::pb::State& state, double kickable_area = 1.085);

struct CallRecord {
    rpc::Method method;
    int register_id;
    bool operator==(const CallRecord&) const = default;
};

/// Replays a call log through the contract's registration gate, one gate per
/// register_id, restarting on SendInitMessage. Returns the number of calls
/// that break the ordering.
int registration_order_violations(const std::vector<CallRecord>& log, int player_types);

/// In-process Game service running the reference policy. Keeps per-agent
/// registration state keyed by register_id and refuses per-cycle calls from
/// unregistered agents with FAILED_PRECONDITION.
class BuiltinPlaymaker : public rpc::GameHandler {
public:
    void send_init_message(const rpc::pb::InitMessage& m) override;
    void send_server_params(const rpc::pb::ServerParam& m) override;
    void send_player_params(const rpc::pb::PlayerParam& m) override;
    void send_player_type(const rpc::pb::PlayerType& m) override;
    rpc::pb::PlayerActions get_player_actions(const rpc::pb::State& s) override;
    rpc::pb::CoachActions get_coach_actions(const rpc::pb::State& s) override;
    rpc::pb::TrainerActions get_trainer_actions(const rpc::pb::State& s) override;

    std::vector<CallRecord> call_log() const;
    int refused_calls() const;

private:
    struct Agent {
        int step = 0;
        int player_types = -1;
        double kickable_area = 1.085;
    };

    /// Advances the agent's registration; throws RpcError when out of order.
    Agent& advance(rpc::Method m, int register_id);
    Agent require_registered(rpc::Method m, int register_id);

    mutable std::mutex mu_;
    std::map<int, Agent> agents_;
    std::vector<CallRecord> log_;
    int refused_ = 0;
};

}  // namespace cls::match
