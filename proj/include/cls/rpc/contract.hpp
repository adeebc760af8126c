#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cls/codec/command.hpp"
#include "cls/codec/server_message.hpp"
#include "cls/rpc/grpc.hpp"
#include "cls/world/model.hpp"
#include "game.pb.h"

namespace cls::rpc {

inline constexpr const char* kContractVersion = "cls-game/1";

/// A reply that parses but breaks the schema's rules (unset oneof, non-finite
/// number, impossible play mode). Callers treat it like a failed call.
class SchemaViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingPrerequisite : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---- actions ------------------------------------------------------------------

struct BodyGoToPoint {
    Vec2 target;
    double dist_thr = 1.0;
    double max_power = 100.0;
    bool operator==(const BodyGoToPoint&) const = default;
};
struct BodySmartKick {
    Vec2 target;
    double first_speed = 2.5;
    double speed_thr = 0.0;
    int max_steps = 1;
    bool operator==(const BodySmartKick&) const = default;
};
struct BodyTurnToPoint {
    Vec2 target;
    bool operator==(const BodyTurnToPoint&) const = default;
};
struct BodyInterceptBall {
    bool operator==(const BodyInterceptBall&) const = default;
};
struct NeckTurnToBall {
    bool operator==(const NeckTurnToBall&) const = default;
};
struct DoNothing {
    bool operator==(const DoNothing&) const = default;
};

/// Positions are team-normalized, like the State they answer.
using PlayerAction = std::variant<codec::DashCmd, codec::TurnCmd, codec::KickCmd, codec::TurnNeckCmd, codec::MoveCmd,
                                  codec::SayCmd, BodyGoToPoint, BodySmartKick, BodyTurnToPoint, BodyInterceptBall,
                                  NeckTurnToBall, DoNothing>;

using CoachAction = std::variant<codec::SayCmd, DoNothing>;

/// Trainer actions use global coordinates.
struct MoveBall {
    Vec2 pos;
    Vec2 vel;
    bool operator==(const MoveBall&) const = default;
};
struct MovePlayer {
    Side side = Side::Left;
    int unum = 1;
    Vec2 pos;
    double body_dir = 0.0;
    bool operator==(const MovePlayer&) const = default;
};
struct ChangePlayMode {
    PlayMode play_mode;
    bool operator==(const ChangePlayMode&) const = default;
};
struct Recover {
    bool operator==(const Recover&) const = default;
};
using TrainerAction = std::variant<MoveBall, MovePlayer, ChangePlayMode, Recover>;

pb::PlayerAction to_proto(const PlayerAction& a);
pb::CoachAction to_proto(const CoachAction& a);
pb::TrainerAction to_proto(const TrainerAction& a);

PlayerAction from_proto(const pb::PlayerAction& a);
CoachAction from_proto(const pb::CoachAction& a);
TrainerAction from_proto(const pb::TrainerAction& a);

/// Order-preserving; an empty reply yields an empty list. Throws SchemaViolation.
std::vector<PlayerAction> unmarshal_player_actions(const pb::PlayerActions& reply);
std::vector<CoachAction> unmarshal_coach_actions(const pb::CoachActions& reply);
std::vector<TrainerAction> unmarshal_trainer_actions(const pb::TrainerActions& reply);

pb::PlayerActions marshal_player_actions(const std::vector<PlayerAction>& actions);
pb::CoachActions marshal_coach_actions(const std::vector<CoachAction>& actions);
pb::TrainerActions marshal_trainer_actions(const std::vector<TrainerAction>& actions);

std::string_view action_name(const PlayerAction& a);

// ---- state ------------------------------------------------------------------------

/// Left players: unum; right players: 100 + unum; coaches 0 and 100; trainer 200.
int register_id(AgentRole role, Side side, int unum);

pb::AgentType to_proto(AgentRole r);
AgentRole from_proto(pb::AgentType t);
pb::Side side_to_proto(Side s);
std::optional<Side> side_from_proto(pb::Side s);
pb::PlayMode to_proto(const PlayMode& m);
/// Throws SchemaViolation for a sided kind without a side.
PlayMode from_proto(const pb::PlayMode& m);

struct AgentMeta {
    AgentRole role = AgentRole::Player;
    int register_id = 0;
    bool need_preprocess = false;
};

pb::WorldModel marshal_world(const world::WorldState& ws);

/// full_world is set iff the last observation was a full-state snapshot.
pb::State marshal_state(const world::WorldState& ws, const AgentMeta& meta);

/// Inverse of marshal_world on every carried field. Fields the schema does
/// not carry (sighting positions, heard messages, parameters) stay default.
world::WorldState unmarshal_world(const pb::WorldModel& m, AgentRole role);

// ---- registration -------------------------------------------------------------

/// Parameter messages received from the sim server before registration.
struct CapturedParams {
    std::optional<codec::ServerParamMsg> server;
    std::optional<codec::PlayerParamMsg> player;
    std::map<int, codec::PlayerTypeMsg> types;
};

struct OutboundCall {
    Method method;
    std::shared_ptr<const google::protobuf::Message> request;
};

struct RegistrationInfo {
    AgentRole role = AgentRole::Player;
    int register_id = 0;
    std::string team;
    int unum = 0;
    bool debug = false;
};

/// SendInitMessage, SendServerParams, SendPlayerParams, then one
/// SendPlayerType per type id in ascending order. Throws MissingPrerequisite
/// if any parameter message has not been captured.
std::vector<OutboundCall> registration_sequence(const RegistrationInfo& info, const CapturedParams& params);

/// Tracks acknowledged registration calls and guards the per-cycle calls.
class RegistrationGate {
public:
    explicit RegistrationGate(int player_types) : player_types_(player_types) {}

    /// Records an acknowledged call. Throws MissingPrerequisite when out of order.
    void acknowledge(Method m);
    bool complete() const { return step_ == 3 + player_types_; }
    /// Throws MissingPrerequisite unless registration is complete.
    void require_complete(Method m) const;

private:
    int player_types_;
    int step_ = 0;
};

}  // namespace cls::rpc
