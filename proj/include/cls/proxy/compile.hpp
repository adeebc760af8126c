#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cls/codec/command.hpp"
#include "cls/rpc/contract.hpp"
#include "cls/world/model.hpp"

namespace cls::proxy {

/// Outcome of a one-step kick plan.
struct KickPlan {
    codec::KickCmd kick;
    Vec2 ball_velocity;  ///< predicted ball velocity right after the kick, before decay
};

/// Kick that sends the ball toward `target` at `first_speed` if one kick can,
/// otherwise the kick with the largest achievable speed along that line.
/// nullopt if the ball is outside the kickable area. All vectors in the
/// agent's frame.
std::optional<KickPlan> plan_kick(const world::WorldState& ws, Vec2 target, double first_speed);

/// Lowers one action to a primitive command; nullopt means Infeasible.
/// Primitives pass through when in range and legal for the play mode.
/// BodyGoToPoint turns when the bearing error exceeds the turn threshold and
/// otherwise dashes with min(max_power, distance / (dash_power_rate * effort)).
/// DoNothing lowers to a zero turn so the body slot is still filled.
std::optional<codec::Command> compile_action(const rpc::PlayerAction& a, const world::WorldState& ws);

enum class FallbackPolicy { Standard, Scan };

std::string_view fallback_policy_name(FallbackPolicy p);
std::optional<FallbackPolicy> fallback_policy_from_name(std::string_view s);

/// Body command used when the playmaker gave nothing usable. Standard: scan
/// with Turn(60) while the ball is uncertain, intercept when we are the
/// fastest teammate, else face the ball. Scan always turns.
codec::Command fallback_command(const world::WorldState& ws, FallbackPolicy policy = FallbackPolicy::Standard);

enum class ActionSource { Playmaker, Fallback, Preprocess };

std::string_view action_source_name(ActionSource s);

/// Commands for one cycle: exactly one body command first, then at most one
/// TurnNeck and one Say.
struct ActionPlan {
    ActionSource source = ActionSource::Fallback;
    std::vector<rpc::PlayerAction> actions;
    std::vector<codec::Command> commands;
};

/// True in before_kick_off and after a goal while the player is away from
/// its kick-off position; the proxy then moves it there itself.
bool needs_preprocess(const world::WorldState& ws);

/// Kick-off position for the agent's unum, own frame.
Vec2 kickoff_position(int unum);

/// First-feasible selection over `actions`. The first feasible body action
/// supplies the body command; the first feasible neck and say actions ride
/// along. With no feasible body action the fallback supplies it.
/// `preprocess` replaces the body command with a Move to the kick-off
/// position.
ActionPlan plan_commands(const std::vector<rpc::PlayerAction>& actions, bool from_playmaker, const world::WorldState& ws,
                         FallbackPolicy policy = FallbackPolicy::Standard);

/// Coach and trainer actions to wire commands; DoNothing yields nothing.
std::vector<codec::Command> coach_commands(const std::vector<rpc::CoachAction>& actions);
std::vector<codec::Command> trainer_commands(const std::vector<rpc::TrainerAction>& actions);

}  // namespace cls::proxy
