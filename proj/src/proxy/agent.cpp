#include "cls/proxy/agent.hpp"

#include <fstream>
#include <thread>

#include <json.hpp>

#include "cls/codec/error.hpp"
#include "cls/common/udp.hpp"
#include "cls/rpc/contract.hpp"

namespace cls::proxy {

using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

void AgentConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(role == AgentRole::Trainer || !team_name.empty(), "team_name is required");
    require(server_port > 0 && server_port < 65536, "server_port out of range");
    require(playmaker_port >= 0 && playmaker_port < 65536, "playmaker_port out of range");
    require(cycle_ms > 0, "cycle_ms must be > 0");
    require(deadline.count() > 0 && deadline.count() < cycle_ms, "deadline must be in (0, cycle_ms)");
}

namespace {

bool is_trigger(const codec::ServerMessage& m) {
    return std::holds_alternative<codec::SeeMsg>(m) || std::holds_alternative<codec::FullStateMsg>(m);
}

class AgentLoop {
public:
    AgentLoop(const AgentConfig& cfg, const std::atomic<bool>* stop)
        : cfg_(cfg), stop_(stop), ws_(world::make_world_state(cfg.role, cfg.team_name)) {
        cfg_.validate();
        stats_.role = cfg.role;
        if (cfg.channel) {
            channel_ = cfg.channel;
        } else if (cfg.playmaker_port > 0) {
            channel_ = std::make_shared<rpc::GrpcChannel>(cfg.playmaker_host, cfg.playmaker_port);
        }
    }

    AgentStats run() {
        register_with_server();
        if (!cfg_.log_path.empty()) {
            std::filesystem::create_directories(cfg_.log_path.parent_path());
            log_.open(cfg_.log_path);
        }
        register_with_playmaker(cfg_.registration_deadline);

        bool act = false;
        for (auto& m : early_) act = absorb(m) || act;
        early_.clear();
        if (act && !finished()) decide();

        auto last_heard = Clock::now();
        while (!finished()) {
            if (stop_ && stop_->load()) {
                stats_.end_reason = "stopped";
                break;
            }
            auto d = sock_.receive(20ms);
            if (!d) {
                if (Clock::now() - last_heard > cfg_.server_timeout) {
                    stats_.end_reason = "server_silent";
                    break;
                }
                continue;
            }
            last_heard = Clock::now();
            act = handle(d->payload);
            while (auto more = sock_.try_receive()) act = handle(more->payload) || act;
            if (act && !finished()) decide();
        }
        if (finished()) stats_.end_reason = "time_over";
        try {
            sock_.send_to(server_, codec::encode_client_command(codec::ByeCmd{}));
        } catch (...) {
        }
        return stats_;
    }

private:
    bool finished() const { return ws_.play_mode.kind == PlayModeKind::TimeOver; }

    std::optional<codec::ServerMessage> decode(const std::string& payload) {
        try {
            return codec::decode_server_message(payload);
        } catch (const codec::CodecError&) {
            ++stats_.protocol_errors;
            return std::nullopt;
        }
    }

    void register_with_server() {
        sock_ = UdpSocket::bind("0.0.0.0", 0);
        server_ = Endpoint::resolve(cfg_.server_host, static_cast<std::uint16_t>(cfg_.server_port));
        codec::InitCmd init;
        if (cfg_.role != AgentRole::Trainer) init.team = cfg_.team_name;
        init.goalie = cfg_.goalie;
        sock_.send_to(server_, codec::encode_client_command(init));

        bool replied = false;
        int types_expected = -1;
        const auto deadline = Clock::now() + cfg_.server_timeout;
        while (!(replied && params_.server && params_.player &&
                 static_cast<int>(params_.types.size()) >= types_expected)) {
            const auto now = Clock::now();
            if (now >= deadline)
                throw ServerUnreachable("no registration reply from " + server_.to_string());
            auto d = sock_.receive(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
            if (!d) continue;
            auto m = decode(d->payload);
            if (!m) continue;
            if (const auto* e = std::get_if<codec::ErrorMsg>(&*m)) throw RegistrationRefused(e->text);
            if (const auto* init_reply = std::get_if<codec::InitMsg>(&*m)) {
                replied = true;
                stats_.side = init_reply->side;
                stats_.unum = init_reply->unum;
            } else if (std::holds_alternative<codec::OkMsg>(*m)) {
                replied = true;
            } else if (const auto* sp = std::get_if<codec::ServerParamMsg>(&*m)) {
                params_.server = *sp;
            } else if (const auto* pp = std::get_if<codec::PlayerParamMsg>(&*m)) {
                params_.player = *pp;
                auto it = pp->params.find("player_types");
                types_expected = it == pp->params.end() ? 1 : static_cast<int>(it->second);
            } else if (const auto* pt = std::get_if<codec::PlayerTypeMsg>(&*m)) {
                params_.types[pt->id] = *pt;
            } else {
                early_.push_back(std::move(*m));
                continue;
            }
            world::integrate_observation(ws_, *m);
        }
        stats_.register_id = rpc::register_id(cfg_.role, stats_.side, stats_.unum);
        gate_.emplace(types_expected);
    }

    /// Runs the whole registration sequence; false if any call failed.
    bool register_with_playmaker(std::chrono::milliseconds per_call) {
        if (!channel_) return false;
        gate_.emplace(static_cast<int>(params_.types.size()));
        const rpc::RegistrationInfo info{cfg_.role, stats_.register_id, cfg_.team_name, stats_.unum, cfg_.debug};
        for (const auto& call : rpc::registration_sequence(info, params_)) {
            rpc::pb::Empty empty;
            const auto r = channel_->call(call.method, *call.request, empty, per_call);
            ++stats_.rpc_calls;
            if (!r.ok()) {
                count_failure(r);
                return false;
            }
            gate_->acknowledge(call.method);
        }
        stats_.playmaker_registered = true;
        return true;
    }

    void count_failure(const rpc::CallResult& r) {
        switch (r.status) {
            case rpc::CallStatus::Timeout: ++stats_.timeouts; break;
            case rpc::CallStatus::ChannelDown: ++stats_.channel_down; break;
            case rpc::CallStatus::RemoteError: ++stats_.remote_errors; break;
            case rpc::CallStatus::Ok: break;
        }
    }

    bool absorb(const codec::ServerMessage& m) {
        if (std::holds_alternative<codec::ErrorMsg>(m)) {
            ++stats_.protocol_errors;
            return false;
        }
        const int stale = ws_.stale_messages;
        world::integrate_observation(ws_, m);
        return is_trigger(m) && ws_.stale_messages == stale;
    }

    bool handle(const std::string& payload) {
        auto m = decode(payload);
        return m && absorb(*m);
    }

    /// Calls the playmaker unless it is absent or unregistered. Returns the
    /// status name for the log.
    template <class Reply>
    std::string_view ask(rpc::Method method, const rpc::pb::State& state, Reply& reply, std::optional<double>& latency_ms) {
        if (!channel_) return "no_playmaker";
        if (!gate_ || !gate_->complete()) {
            // Retry registration sparingly; the cycle itself falls back.
            if (ws_.cycle >= next_registration_try_) {
                next_registration_try_ = ws_.cycle + 10;
                register_with_playmaker(cfg_.deadline);
            }
            return "unregistered";
        }
        gate_->require_complete(method);
        const auto r = channel_->call(method, state, reply, cfg_.deadline);
        ++stats_.rpc_calls;
        latency_ms = std::chrono::duration<double, std::milli>(r.latency).count();
        stats_.latency_sum_ms += *latency_ms;
        stats_.latency_max_ms = std::max(stats_.latency_max_ms, *latency_ms);
        if (!r.ok()) {
            count_failure(r);
            // A dropped channel may come back as a fresh server that has never
            // seen us.
            if (r.status == rpc::CallStatus::ChannelDown) {
                gate_.reset();
                stats_.playmaker_registered = false;
            }
        }
        return rpc::call_status_name(r.status);
    }

    void decide() {
        ++stats_.cycles;
        const bool preprocess = needs_preprocess(ws_);
        const rpc::pb::State state = rpc::marshal_state(ws_, {cfg_.role, stats_.register_id, preprocess});
        std::optional<double> latency;
        std::string status;
        std::vector<codec::Command> commands;
        std::string_view source = "playmaker";

        try {
            if (cfg_.role == AgentRole::Player) {
                rpc::pb::PlayerActions reply;
                status = ask(rpc::Method::GetPlayerActions, state, reply, latency);
                std::vector<rpc::PlayerAction> actions;
                const bool ok = status == "ok";
                if (ok) actions = rpc::unmarshal_player_actions(reply);
                ActionPlan plan = plan_commands(actions, ok, ws_, cfg_.fallback);
                commands = std::move(plan.commands);
                source = action_source_name(plan.source);
                switch (plan.source) {
                    case ActionSource::Playmaker: ++stats_.playmaker_cycles; break;
                    case ActionSource::Fallback: ++stats_.fallback_cycles; break;
                    case ActionSource::Preprocess: ++stats_.preprocess_cycles; break;
                }
            } else if (cfg_.role == AgentRole::Coach) {
                rpc::pb::CoachActions reply;
                status = ask(rpc::Method::GetCoachActions, state, reply, latency);
                if (status == "ok") commands = coach_commands(rpc::unmarshal_coach_actions(reply));
            } else {
                rpc::pb::TrainerActions reply;
                status = ask(rpc::Method::GetTrainerActions, state, reply, latency);
                if (status == "ok") commands = trainer_commands(rpc::unmarshal_trainer_actions(reply));
            }
        } catch (const rpc::SchemaViolation&) {
            ++stats_.schema_violations;
            status = "schema_violation";
            if (cfg_.role == AgentRole::Player) {
                commands = plan_commands({}, false, ws_, cfg_.fallback).commands;
                source = "fallback";
                ++stats_.fallback_cycles;
            } else {
                commands.clear();
            }
        }

        std::string wire;
        if (!commands.empty()) {
            wire = codec::encode_client_commands(commands);
            if (sock_.send_to(server_, wire)) ++stats_.command_cycles;
        }
        if (log_.is_open()) {
            nlohmann::json line = {{"cycle", ws_.cycle},
                                   {"rpc_latency_ms", latency ? nlohmann::json(*latency) : nlohmann::json(nullptr)},
                                   {"rpc_status", status},
                                   {"action_source", commands.empty() ? "none" : source},
                                   {"command", wire}};
            log_ << line.dump() << '\n';
        }
    }

    AgentConfig cfg_;
    const std::atomic<bool>* stop_;
    world::WorldState ws_;
    std::shared_ptr<rpc::Channel> channel_;
    UdpSocket sock_;
    Endpoint server_;
    rpc::CapturedParams params_;
    std::optional<rpc::RegistrationGate> gate_;
    int next_registration_try_ = 0;
    std::vector<codec::ServerMessage> early_;
    AgentStats stats_;
    std::ofstream log_;
};

}  // namespace

AgentStats run_agent(const AgentConfig& cfg, const std::atomic<bool>* stop) { return AgentLoop(cfg, stop).run(); }

TeamResult run_team(const TeamConfig& cfg, const std::atomic<bool>* stop) {
    struct Slot {
        AgentConfig agent;
        std::optional<AgentStats> stats;
        std::string error;
    };
    std::vector<Slot> slots;
    auto add = [&](AgentRole role, int port) {
        AgentConfig a;
        a.team_name = cfg.team_name;
        a.role = role;
        a.server_host = cfg.server_host;
        a.server_port = port;
        a.playmaker_host = cfg.playmaker_host;
        a.playmaker_port = cfg.playmaker_port;
        if (cfg.channel_for) a.channel = cfg.channel_for(static_cast<int>(slots.size()));
        a.deadline = cfg.deadline;
        a.cycle_ms = cfg.cycle_ms;
        a.fallback = cfg.fallback;
        a.server_timeout = cfg.server_timeout;
        if (!cfg.log_dir.empty()) {
            const std::string who = role == AgentRole::Player ? "player" + std::to_string(slots.size() + 1)
                                                               : std::string(role_name(role));
            a.log_path = cfg.log_dir / (cfg.team_name + "_" + who + ".jsonl");
        }
        slots.push_back({std::move(a), std::nullopt, {}});
    };
    for (int i = 0; i < cfg.players; ++i) add(AgentRole::Player, cfg.player_port);
    if (cfg.coach) add(AgentRole::Coach, cfg.coach_port);
    if (cfg.trainer) add(AgentRole::Trainer, cfg.trainer_port);

    std::vector<std::thread> threads;
    threads.reserve(slots.size());
    for (auto& s : slots) {
        if (!threads.empty()) std::this_thread::sleep_for(cfg.stagger);
        threads.emplace_back([&s, stop] {
            try {
                s.stats = run_agent(s.agent, stop);
            } catch (const std::exception& e) {
                s.error = std::string(role_name(s.agent.role)) + ": " + e.what();
            }
        });
    }
    for (auto& t : threads) t.join();

    TeamResult result;
    for (auto& s : slots) {
        if (s.stats) result.agents.push_back(std::move(*s.stats));
        if (!s.error.empty()) result.errors.push_back(std::move(s.error));
    }
    return result;
}

}  // namespace cls::proxy
