#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cls/codec/sexpr.hpp"
#include "cls/common/snapshot.hpp"
#include "cls/common/types.hpp"

namespace cls::codec {

// ---- observed objects -------------------------------------------------------

struct FlagObject {
    std::string id;  ///< landmark key, e.g. "f c t"
    bool operator==(const FlagObject&) const = default;
};
struct BallObject {
    bool operator==(const BallObject&) const = default;
};
struct PlayerObject {
    std::optional<std::string> team;
    std::optional<int> unum;
    bool operator==(const PlayerObject&) const = default;
};
struct GoalObject {
    Side side = Side::Left;
    bool operator==(const GoalObject&) const = default;
};
struct LineObject {
    char id = 'l';  ///< one of l r t b
    bool operator==(const LineObject&) const = default;
};

using ObjectKind = std::variant<FlagObject, BallObject, PlayerObject, GoalObject, LineObject>;

struct ObservedObject {
    ObjectKind kind;
    double distance = 0.0;   ///< meters, >= 0
    double direction = 0.0;  ///< degrees relative to face direction, in [-180, 180)
    std::optional<double> dist_change;
    std::optional<double> dir_change;
    bool operator==(const ObservedObject&) const = default;
};

// ---- messages ---------------------------------------------------------------

struct InitMsg {
    Side side = Side::Left;
    int unum = 0;  ///< 0 for a coach
    PlayMode play_mode;
    bool operator==(const InitMsg&) const = default;
};

struct SeeMsg {
    int cycle = 0;
    std::vector<ObservedObject> objects;
    bool operator==(const SeeMsg&) const = default;
};

struct SenseBodyMsg {
    int cycle = 0;
    double stamina = 0.0;
    double effort = 1.0;
    double speed_mag = 0.0;
    double speed_dir = 0.0;  ///< relative to face direction
    double neck_dir = 0.0;   ///< relative to body
    bool operator==(const SenseBodyMsg&) const = default;
};

struct FullStateMsg {
    WorldSnapshot world;
    bool operator==(const FullStateMsg&) const = default;
};

struct HearMsg {
    int cycle = 0;
    std::string sender;  ///< "referee", "coach_l", "l_7", ...
    std::string text;
    bool operator==(const HearMsg&) const = default;
};

using ParamMap = std::map<std::string, double>;

struct ServerParamMsg {
    ParamMap params;
    bool operator==(const ServerParamMsg&) const = default;
};
struct PlayerParamMsg {
    ParamMap params;
    bool operator==(const PlayerParamMsg&) const = default;
};
struct PlayerTypeMsg {
    int id = 0;
    ParamMap params;
    bool operator==(const PlayerTypeMsg&) const = default;
};
struct ErrorMsg {
    std::string text;
    bool operator==(const ErrorMsg&) const = default;
};
struct OkMsg {
    std::string text;
    bool operator==(const OkMsg&) const = default;
};

using ServerMessage = std::variant<InitMsg, SeeMsg, SenseBodyMsg, FullStateMsg, HearMsg, ServerParamMsg,
                                   PlayerParamMsg, PlayerTypeMsg, ErrorMsg, OkMsg>;

/// Cycle stamp of the message, if it carries one.
std::optional<int> message_cycle(const ServerMessage& m);

/// Typed decoding. Throws CodecError (UnknownMessageHead, FieldCountMismatch,
/// NumericParseFailure, UnknownObject, OutOfRangeField).
ServerMessage decode_server_message(const SExpr& expr);

/// parse_sexpr + decode_server_message.
ServerMessage decode_server_message(std::string_view text);

/// Server-side encoding. Sensor values (see, sense_body) are written with two
/// decimals; full-state snapshots and parameters are written exactly.
std::string encode_server_message(const ServerMessage& m);

}  // namespace cls::codec
