#include "cls/sim/server.hpp"

#include <poll.h>

#include <algorithm>

#include "cls/codec/error.hpp"
#include "cls/sim/observation.hpp"

namespace cls::sim {

namespace {

enum PortKind { kPlayerPort = 0, kTrainerPort = 1, kCoachPort = 2 };

using Clock = std::chrono::steady_clock;

}  // namespace

struct SimServer::Client {
    AgentId id;
    int port_kind = kPlayerPort;
    Endpoint endpoint;
    bool sent = false;       ///< any datagram since the last tick
    bool body_sent = false;  ///< a body command since the last tick
    bool responsive = true;
};

SimServer::SimServer(SimConfig cfg, ServerOptions opts, ReplaySink* replay)
    : cfg_(std::move(cfg)), opts_(std::move(opts)), replay_(replay), world_(make_world(cfg_)) {
    cfg_.validate();
}

SimServer::~SimServer() = default;

void SimServer::bind() {
    sockets_[kPlayerPort] = UdpSocket::bind(opts_.host, static_cast<std::uint16_t>(cfg_.player_port));
    sockets_[kTrainerPort] = UdpSocket::bind(opts_.host, static_cast<std::uint16_t>(cfg_.trainer_port));
    sockets_[kCoachPort] = UdpSocket::bind(opts_.host, static_cast<std::uint16_t>(cfg_.coach_port));
    player_port_ = sockets_[kPlayerPort].local_port();
    trainer_port_ = sockets_[kTrainerPort].local_port();
    coach_port_ = sockets_[kCoachPort].local_port();
}

ServerStats SimServer::stats() const {
    std::lock_guard lock(stats_mu_);
    return stats_;
}

void SimServer::send(const Client& c, const codec::ServerMessage& m) {
    sockets_[c.port_kind].send_to(c.endpoint, codec::encode_server_message(m));
}

void SimServer::send_error(int port_kind, const Endpoint& to, const std::string& text) {
    sockets_[port_kind].send_to(to, codec::encode_server_message(codec::ErrorMsg{text}));
}

void SimServer::handle_init(int port_kind, const Endpoint& from, const codec::InitCmd& init) {
    AgentId id;
    if (port_kind == kTrainerPort) {
        for (const auto& [ep, c] : clients_)
            if (c->id.role == AgentRole::Trainer) return send_error(port_kind, from, "no_more_trainer");
        id.role = AgentRole::Trainer;
    } else if (init.team.empty()) {
        return send_error(port_kind, from, "illegal_command_form");
    } else if (port_kind == kCoachPort) {
        id.role = AgentRole::Coach;
        if (init.team == world_.team_left) {
            id.side = Side::Left;
        } else if (init.team == world_.team_right) {
            id.side = Side::Right;
        } else {
            return send_error(port_kind, from, "no_such_team");
        }
        for (const auto& [ep, c] : clients_)
            if (c->id.role == AgentRole::Coach && c->id.side == id.side)
                return send_error(port_kind, from, "no_more_coach");
    } else {
        if (world_.team_left.empty() || world_.team_left == init.team) {
            world_.team_left = init.team;
            id.side = Side::Left;
        } else if (world_.team_right.empty() || world_.team_right == init.team) {
            world_.team_right = init.team;
            id.side = Side::Right;
        } else {
            return send_error(port_kind, from, "no_more_team_or_player");
        }
        int unum = 1;
        while (unum <= 11 && world_.find(id.side, unum)) ++unum;
        if (unum > 11) return send_error(port_kind, from, "no_more_team_or_player");
        id.unum = unum;
        world_.add_player(id.side, unum, cfg_);
    }

    auto client = std::make_unique<Client>();
    client->id = id;
    client->port_kind = port_kind;
    client->endpoint = from;
    const Client& c = *clients_.emplace(from, std::move(client)).first->second;

    if (id.role == AgentRole::Trainer) {
        send(c, codec::OkMsg{"init"});
    } else {
        send(c, codec::InitMsg{id.side, id.unum, world_.play_mode});
    }
    send(c, cfg_.server_param_message());
    send(c, cfg_.player_param_message());
    for (int t = 0; t < cfg_.player_types; ++t) send(c, cfg_.player_type_message(t));
    registered_.fetch_add(1);
}

void SimServer::handle(int port_kind, UdpSocket::Datagram d) {
    std::vector<codec::Command> cmds;
    try {
        cmds = codec::decode_client_commands(d.payload);
    } catch (const codec::CodecError&) {
        {
            std::lock_guard lock(stats_mu_);
            ++stats_.protocol_errors;
        }
        return send_error(port_kind, d.from, "illegal_command_form");
    }

    auto it = clients_.find(d.from);
    if (it == clients_.end()) {
        if (cmds.size() == 1 && std::holds_alternative<codec::InitCmd>(cmds.front()))
            return handle_init(port_kind, d.from, std::get<codec::InitCmd>(cmds.front()));
        {
            std::lock_guard lock(stats_mu_);
            ++stats_.protocol_errors;
        }
        return send_error(port_kind, d.from, "unknown_client");
    }

    Client& c = *it->second;
    bool bye = false;
    for (auto& cmd : cmds) {
        if (std::holds_alternative<codec::InitCmd>(cmd)) {
            std::lock_guard lock(stats_mu_);
            ++stats_.protocol_errors;
            send_error(port_kind, d.from, "already_registered");
            continue;
        }
        if (std::holds_alternative<codec::ByeCmd>(cmd)) {
            bye = true;
            break;
        }
        if (c.id.role == AgentRole::Player && codec::is_body_command(cmd)) c.body_sent = true;
        pending_.push_back({c.id, std::move(cmd)});
    }
    c.sent = true;
    c.responsive = true;
    if (bye) clients_.erase(it);
}

void SimServer::poll_once(std::chrono::milliseconds timeout) {
    pollfd fds[3];
    for (int i = 0; i < 3; ++i) fds[i] = {sockets_[i].fd(), POLLIN, 0};
    const int r = ::poll(fds, 3, static_cast<int>(std::max<long long>(0, timeout.count())));
    if (r <= 0) return;
    for (int i = 0; i < 3; ++i) {
        if (!(fds[i].revents & POLLIN)) continue;
        while (auto d = sockets_[i].try_receive()) handle(i, std::move(*d));
    }
}

bool SimServer::all_players_ready() const {
    for (const auto& [ep, c] : clients_)
        if (c->id.role == AgentRole::Player && c->responsive && !c->sent) return false;
    return true;
}

void SimServer::send_observations(const std::vector<codec::HearMsg>& hears) {
    for (const auto& [ep, c] : clients_) {
        for (const auto& h : hears) send(*c, h);
        const ObservationMode mode = cfg_.observation_mode;
        try {
            for (const auto& m : render_observation(world_, c->id, mode, cfg_)) send(*c, m);
        } catch (const UnknownAgent&) {
        }
    }
}

void SimServer::tick() {
    std::vector<AgentId> senders;
    for (const auto& [ep, c] : clients_)
        if (c->id.role == AgentRole::Player && c->body_sent) senders.push_back(c->id);
    std::sort(senders.begin(), senders.end());

    StepReport report = step_simulation(world_, pending_, cfg_);
    pending_.clear();
    referee_judge(world_, cfg_, report.events);

    std::vector<codec::HearMsg> hears;
    int rejected = 0;
    for (const auto& e : report.events) {
        switch (e.kind) {
            case EventKind::ModeChange:
                hears.push_back({world_.cycle, "referee", e.detail});
                break;
            case EventKind::Goal:
                hears.push_back({world_.cycle, "referee", std::string("goal_") + side_char(e.agent.side) + "_" + e.detail});
                break;
            default:
                ++rejected;
                break;
        }
    }
    for (const auto& [who, text] : report.said) {
        std::string sender = who.role == AgentRole::Coach ? std::string("coach_") + side_char(who.side)
                                                          : std::string(1, side_char(who.side)) + "_" + std::to_string(who.unum);
        hears.push_back({world_.cycle, sender, text});
    }

    {
        std::lock_guard lock(stats_mu_);
        stats_.cycles = world_.cycle;
        stats_.rejected_commands += rejected;
        for (const auto& s : senders) ++stats_.body_command_cycles[s];
    }
    if (replay_) replay_->record(world_, report.events, senders);
    send_observations(hears);
    for (auto& [ep, c] : clients_) c->sent = c->body_sent = false;
}

void SimServer::run() {
    if (!sockets_[kPlayerPort].is_open()) bind();

    const auto gate_end = Clock::now() + opts_.start_timeout;
    while (!stop_ && registered_.load() < opts_.expected_agents && Clock::now() < gate_end)
        poll_once(std::chrono::milliseconds(20));

    if (replay_) replay_->record(world_, {}, {});
    send_observations({});

    bool first = true;
    auto next_tick = Clock::now() + std::chrono::milliseconds(cfg_.cycle_ms);
    while (!stop_ && world_.play_mode.kind != PlayModeKind::TimeOver) {
        const auto deadline = opts_.fast ? Clock::now() + (first ? opts_.start_timeout : opts_.fast_tick_limit) : next_tick;
        while (!stop_) {
            if (opts_.fast && all_players_ready()) break;
            const auto now = Clock::now();
            if (now >= deadline) break;
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
            poll_once(std::clamp(left, std::chrono::milliseconds(1), std::chrono::milliseconds(20)));
        }
        if (stop_) break;
        if (opts_.fast) {
            for (auto& [ep, c] : clients_)
                if (c->id.role == AgentRole::Player && !c->sent) c->responsive = false;
        } else {
            next_tick += std::chrono::milliseconds(cfg_.cycle_ms);
        }
        tick();
        first = false;
    }
}

}  // namespace cls::sim
