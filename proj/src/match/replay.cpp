#include "cls/match/replay.hpp"

#include <json.hpp>

namespace cls::match {

using nlohmann::json;

namespace {

json vec(Vec2 v) { return json::array({v.x, v.y}); }

std::string agent_tag(const sim::AgentId& a) {
    return std::string(1, side_char(a.side)) + "_" + std::to_string(a.unum);
}

json header(const sim::SimConfig& cfg, const sim::SimWorld& w) {
    json params = json::object();
    for (const auto& [k, v] : cfg.server_param_message().params) params[k] = v;
    params["before_kickoff_cycles"] = cfg.before_kickoff_cycles;
    params["goal_pause_cycles"] = cfg.goal_pause_cycles;
    params["dead_ball_timeout"] = cfg.dead_ball_timeout;
    params["player_types"] = cfg.player_types;
    return {{"schema", kReplaySchema},
            {"seed", cfg.seed},
            {"observation_mode", sim::observation_mode_name(cfg.observation_mode)},
            {"config", params},
            {"team_left", w.team_left},
            {"team_right", w.team_right}};
}

json record(const sim::SimWorld& w, const std::vector<sim::Event>& events, const std::vector<sim::AgentId>& senders) {
    json players = json::array();
    for (const auto& p : w.players) {
        players.push_back({{"side", std::string(1, side_char(p.side))},
                           {"unum", p.unum},
                           {"pos", vec(p.pos)},
                           {"vel", vec(p.vel)},
                           {"body", p.body_dir},
                           {"neck", p.neck_dir},
                           {"stamina", p.stamina},
                           {"effort", p.effort}});
    }
    json evs = json::array();
    for (const auto& e : events) {
        evs.push_back({{"kind", sim::event_kind_name(e.kind)},
                       {"side", std::string(1, side_char(e.agent.side))},
                       {"unum", e.agent.unum},
                       {"detail", e.detail}});
    }
    json body = json::array();
    for (const auto& s : senders) body.push_back(agent_tag(s));
    return {{"cycle", w.cycle},
            {"mode", to_wire(w.play_mode)},
            {"score", json::array({w.score_left, w.score_right})},
            {"ball", {{"pos", vec(w.ball.pos)}, {"vel", vec(w.ball.vel)}}},
            {"players", players},
            {"events", evs},
            {"body_commands", body}};
}

}  // namespace

void ReplayLog::append(const sim::SimWorld& world, const std::vector<sim::Event>& events,
                       const std::vector<sim::AgentId>& body_senders) {
    if (last_cycle_ && world.cycle != *last_cycle_ + 1)
        throw OutOfOrderCycle("replay expects cycle " + std::to_string(*last_cycle_ + 1) + ", got " +
                              std::to_string(world.cycle));
    if (records_ == 0) out_ << header(cfg_, world).dump() << '\n';
    out_ << record(world, events, body_senders).dump() << '\n';
    ++records_;
    last_cycle_ = world.cycle;
    if (records_ % kReplayFlushInterval == 0) out_.flush();
}

void append_replay(ReplayLog& log, const sim::SimWorld& world, const std::vector<sim::Event>& events) {
    log.append(world, events);
}

ReplayFile::ReplayFile(const std::filesystem::path& path, const sim::SimConfig& cfg)
    : file_(path, std::ios::binary | std::ios::trunc), log_(file_, cfg) {
    if (!file_) throw std::runtime_error("cannot open replay file " + path.string());
}

ReplayFile::~ReplayFile() { file_.flush(); }

void ReplayFile::record(const sim::SimWorld& world, const std::vector<sim::Event>& events,
                        const std::vector<sim::AgentId>& body_senders) {
    log_.append(world, events, body_senders);
}

ReplaySummary validate_replay(std::istream& in) {
    ReplaySummary s;
    auto fail = [&](int line, const std::string& what) {
        if (s.errors.size() < 20) s.errors.push_back("line " + std::to_string(line) + ": " + what);
    };

    std::string text;
    int line_no = 0;
    if (!std::getline(in, text)) {
        s.errors.push_back("empty replay");
        return s;
    }
    ++line_no;
    try {
        const json h = json::parse(text);
        if (h.value("schema", "") != kReplaySchema) fail(line_no, "unknown schema");
        if (!h.contains("config") || !h["config"].is_object()) fail(line_no, "missing config");
        s.team_left = h.value("team_left", "");
        s.team_right = h.value("team_right", "");
    } catch (const json::exception& e) {
        fail(line_no, std::string("bad header: ") + e.what());
        return s;
    }

    int prev_left = 0, prev_right = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        try {
            const json r = json::parse(text);
            const int cycle = r.at("cycle").get<int>();
            if (s.records == 0) {
                s.first_cycle = cycle;
                if (cycle != 0) fail(line_no, "first record is not cycle 0");
            } else if (cycle != s.last_cycle + 1) {
                fail(line_no, "cycle " + std::to_string(cycle) + " after " + std::to_string(s.last_cycle));
            }
            s.last_cycle = cycle;
            ++s.records;

            s.final_mode = r.at("mode").get<std::string>();
            if (!play_mode_from_wire(s.final_mode)) fail(line_no, "bad play mode " + s.final_mode);
            const auto& score = r.at("score");
            s.score_left = score.at(0).get<int>();
            s.score_right = score.at(1).get<int>();
            if (s.score_left < prev_left || s.score_right < prev_right) fail(line_no, "score decreased");
            prev_left = s.score_left;
            prev_right = s.score_right;

            r.at("ball").at("pos").at(1).get<double>();
            for (const auto& p : r.at("players")) {
                const int unum = p.at("unum").get<int>();
                if (unum < 1 || unum > 11) fail(line_no, "bad unum");
                p.at("pos").at(1).get<double>();
            }
            for (const auto& e : r.at("events")) {
                if (e.at("kind").get<std::string>() != "goal") continue;
                (e.at("side").get<std::string>() == "l" ? s.goals_left : s.goals_right) += 1;
            }
            if (s.goals_left != s.score_left || s.goals_right != s.score_right)
                fail(line_no, "goal events disagree with the score");
            r.at("body_commands").size();
        } catch (const json::exception& e) {
            fail(line_no, e.what());
        }
    }
    if (s.records == 0) s.errors.push_back("no records");
    else if (s.final_mode != "time_over") s.errors.push_back("final record is not time_over");
    return s;
}

ReplaySummary validate_replay_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ReplaySummary s;
        s.errors.push_back("cannot open " + path.string());
        return s;
    }
    return validate_replay(in);
}

}  // namespace cls::match
