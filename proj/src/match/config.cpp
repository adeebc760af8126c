#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <functional>
#include <map>

#include "cls/match/match.hpp"

namespace cls::match {

namespace {

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError(key + ": not a number: " + v);
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError(key + ": not an integer: " + v);
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": not a boolean: " + v);
}

using Setter = std::function<void(MatchConfig&, const std::string& key, const std::string& value)>;

Setter real(double sim::SimConfig::*field) {
    return [field](MatchConfig& c, const std::string& k, const std::string& v) { c.sim.*field = to_double(k, v); };
}
Setter integer(int sim::SimConfig::*field) {
    return [field](MatchConfig& c, const std::string& k, const std::string& v) {
        c.sim.*field = static_cast<int>(to_int(k, v));
    };
}

const std::map<std::string, Setter>& setters() {
    using S = sim::SimConfig;
    static const std::map<std::string, Setter> table = {
        {"sim.pitch_length", real(&S::pitch_length)},
        {"sim.pitch_width", real(&S::pitch_width)},
        {"sim.goal_width", real(&S::goal_width)},
        {"sim.cycle_ms", integer(&S::cycle_ms)},
        {"sim.half_cycles", integer(&S::half_cycles)},
        {"sim.before_kickoff_cycles", integer(&S::before_kickoff_cycles)},
        {"sim.goal_pause_cycles", integer(&S::goal_pause_cycles)},
        {"sim.dead_ball_timeout", integer(&S::dead_ball_timeout)},
        {"sim.ball_decay", real(&S::ball_decay)},
        {"sim.player_decay", real(&S::player_decay)},
        {"sim.dash_power_rate", real(&S::dash_power_rate)},
        {"sim.kick_power_rate", real(&S::kick_power_rate)},
        {"sim.player_speed_max", real(&S::player_speed_max)},
        {"sim.ball_speed_max", real(&S::ball_speed_max)},
        {"sim.inertia_moment", real(&S::inertia_moment)},
        {"sim.player_size", real(&S::player_size)},
        {"sim.ball_size", real(&S::ball_size)},
        {"sim.kickable_margin", real(&S::kickable_margin)},
        {"sim.max_neck_angle", real(&S::max_neck_angle)},
        {"sim.visible_angle", real(&S::visible_angle)},
        {"sim.quantize_step", real(&S::quantize_step)},
        {"sim.stamina_max", real(&S::stamina_max)},
        {"sim.stamina_recovery", real(&S::stamina_recovery)},
        {"sim.effort_max", real(&S::effort_max)},
        {"sim.effort_min", real(&S::effort_min)},
        {"sim.player_types", integer(&S::player_types)},
        {"sim.subs_max", integer(&S::subs_max)},
        {"sim.observation_mode",
         [](MatchConfig& c, const std::string& k, const std::string& v) {
             auto m = sim::observation_mode_from_name(v);
             if (!m) throw ConfigError(k + ": expected see or fullstate");
             c.sim.observation_mode = *m;
         }},
        {"match.seed",
         [](MatchConfig& c, const std::string& k, const std::string& v) {
             const long long s = to_int(k, v);
             if (s < 0) throw ConfigError(k + ": must be >= 0");
             c.sim.seed = static_cast<std::uint64_t>(s);
         }},
        {"match.replay", [](MatchConfig& c, const std::string&, const std::string& v) { c.replay_path = v; }},
        {"match.log_dir", [](MatchConfig& c, const std::string&, const std::string& v) { c.log_dir = v; }},
        {"match.accelerated",
         [](MatchConfig& c, const std::string& k, const std::string& v) { c.accelerated = to_bool(k, v); }},
        {"match.deadline_ms",
         [](MatchConfig& c, const std::string& k, const std::string& v) {
             c.deadline = std::chrono::milliseconds(to_int(k, v));
         }},
        {"match.coaches", [](MatchConfig& c, const std::string& k, const std::string& v) { c.coaches = to_bool(k, v); }},
        {"match.fallback",
         [](MatchConfig& c, const std::string& k, const std::string& v) {
             auto p = proxy::fallback_policy_from_name(v);
             if (!p) throw ConfigError(k + ": expected standard or scan");
             c.fallback = *p;
         }},
        {"match.protocol_error_budget",
         [](MatchConfig& c, const std::string& k, const std::string& v) {
             c.protocol_error_budget = static_cast<int>(to_int(k, v));
         }},
        {"match.start_timeout_ms",
         [](MatchConfig& c, const std::string& k, const std::string& v) {
             c.start_timeout = std::chrono::milliseconds(to_int(k, v));
         }},
        {"left.name", [](MatchConfig& c, const std::string&, const std::string& v) { c.left.name = v; }},
        {"left.endpoint", [](MatchConfig& c, const std::string&, const std::string& v) { c.left.endpoint = v; }},
        {"right.name", [](MatchConfig& c, const std::string&, const std::string& v) { c.right.name = v; }},
        {"right.endpoint", [](MatchConfig& c, const std::string&, const std::string& v) { c.right.endpoint = v; }},
    };
    return table;
}

bool valid_team_name(const std::string& s) {
    if (s.empty() || s.size() > 15) return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
    return true;
}

}  // namespace

void set_config_value(MatchConfig& cfg, const std::string& key, const std::string& value) {
    const auto& t = setters();
    auto it = t.find(key);
    if (it == t.end()) throw ConfigError("unknown key: " + key);
    it->second(cfg, key, value);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
}

MatchConfig load_match_config(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    MatchConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("key outside a section: " + section);
        for (const auto& [key, value] : body) set_config_value(cfg, section + "." + key, value.data());
    }
    cfg.validate();
    return cfg;
}

void MatchConfig::validate() const {
    try {
        sim.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sim: ") + e.what());
    }
    for (const auto* t : {&left, &right}) {
        if (!valid_team_name(t->name)) throw ConfigError("team name must be 1-15 of [A-Za-z0-9_-]: " + t->name);
        if (t->endpoint != "builtin" && t->endpoint != "none") parse_endpoint(t->endpoint);
    }
    if (left.name == right.name) throw ConfigError("team names must differ");
    if (deadline.count() <= 0 || deadline.count() >= sim.cycle_ms) throw ConfigError("deadline_ms must be in (0, cycle_ms)");
    if (protocol_error_budget < 0) throw ConfigError("protocol_error_budget must be >= 0");
}

PlaymakerEndpoint parse_endpoint(const std::string& text) {
    const auto colon = text.rfind(':');
    PlaymakerEndpoint e;
    e.host = colon == std::string::npos ? "127.0.0.1" : text.substr(0, colon);
    const std::string port = colon == std::string::npos ? text : text.substr(colon + 1);
    const long long p = to_int("endpoint", port);
    if (e.host.empty() || p <= 0 || p > 65535) throw ConfigError("bad endpoint: " + text);
    e.port = static_cast<int>(p);
    return e;
}

}  // namespace cls::match
